//! Social choice rules stored as dense outcome tables.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{PreferenceDomain, ProductDomain};
use crate::error::{Error, Result};
use crate::ranking::{AltSet, Alternatives, Ranking};

/// Default cap on outcome-table size.
pub const DEFAULT_MAX_PROFILES: usize = 10_000_000;

/// A total function from profiles of a product domain to alternatives.
///
/// `table[k]` is the outcome at mixed-radix profile index `k` (agent 0 most
/// significant, each digit the canonical position of that agent's ranking).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    domain: ProductDomain,
    table: Vec<u8>,
}

fn check_profiles(domain: &ProductDomain, max_profiles: usize) -> Result<()> {
    if domain.profile_count() > max_profiles {
        return Err(Error::SizeLimit {
            what: "profile count",
            actual: domain.profile_count() as u128,
            limit: max_profiles as u128,
        });
    }
    Ok(())
}

impl Rule {
    pub fn new(domain: ProductDomain, table: Vec<u8>) -> Result<Self> {
        check_profiles(&domain, DEFAULT_MAX_PROFILES)?;
        if table.len() != domain.profile_count() {
            return Err(Error::InvalidParams(format!(
                "table has {} entries, domain has {} profiles",
                table.len(),
                domain.profile_count()
            )));
        }
        let m = domain.m() as u8;
        if let Some(bad) = table.iter().find(|&&a| a >= m) {
            return Err(Error::InvalidParams(format!("outcome {bad} is not an alternative")));
        }
        Ok(Rule { domain, table })
    }

    /// Builds the table by evaluating `f` at each profile index.
    pub fn from_fn(
        domain: ProductDomain,
        max_profiles: usize,
        f: impl Fn(&ProductDomain, usize) -> u8,
    ) -> Result<Self> {
        check_profiles(&domain, max_profiles)?;
        let table = (0..domain.profile_count()).map(|k| f(&domain, k)).collect();
        Rule::new(domain, table)
    }

    pub fn constant(domain: ProductDomain, outcome: u8) -> Result<Self> {
        Rule::from_fn(domain, DEFAULT_MAX_PROFILES, |_, _| outcome)
    }

    /// The dictatorship of `agent` over `range`: best element of `range`
    /// under the agent's ranking.
    pub fn dictatorship(domain: ProductDomain, agent: usize, range: AltSet) -> Result<Self> {
        if agent >= domain.agent_count() || range.is_empty() {
            return Err(Error::InvalidParams("bad dictator or empty range".into()));
        }
        Rule::from_fn(domain, DEFAULT_MAX_PROFILES, |d, k| {
            d.ranking_at(k, agent).best_of(range).expect("nonempty range")
        })
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    #[inline]
    pub fn outcome(&self, index: usize) -> u8 {
        self.table[index]
    }

    pub fn outcome_at(&self, profile: &[usize]) -> Result<u8> {
        Ok(self.table[self.domain.index(profile)?])
    }
}

pub fn range_of(rule: &Rule) -> AltSet {
    rule.table.iter().copied().collect()
}

/// Outcomes agent `agent` attains by varying her ranking within `over`
/// while the others report as in `profile`.
pub fn option_set(
    rule: &Rule,
    agent: usize,
    profile: &[usize],
    over: &PreferenceDomain,
) -> Result<AltSet> {
    let d = rule.domain();
    if agent >= d.agent_count() {
        return Err(Error::OutOfRange(format!("agent {agent}")));
    }
    let base = d.index(profile)?;
    let own = d.agent(agent);
    over.rankings()
        .iter()
        .map(|r| {
            let k = own
                .index_of(r)
                .ok_or_else(|| Error::NotSubset(format!("agent {agent}: {r:?} not in domain")))?;
            Ok(rule.outcome(d.with_coordinate(base, agent, k)))
        })
        .collect()
}

/// Option set over the agent's full domain, by profile index.
fn option_set_full(rule: &Rule, agent: usize, index: usize) -> AltSet {
    let d = rule.domain();
    (0..d.agent(agent).len())
        .map(|k| rule.outcome(d.with_coordinate(index, agent, k)))
        .collect()
}

/// A profitable misreport.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ManipulationWitness {
    pub agent: usize,
    pub profile_index: usize,
    pub profile: Vec<usize>,
    /// Canonical index of the misreported ranking in the agent's domain.
    pub deviation: usize,
    pub sincere_outcome: u8,
    pub deviating_outcome: u8,
}

fn first_deviation(rule: &Rule, agent: usize, index: usize) -> Option<ManipulationWitness> {
    let d = rule.domain();
    let truth = d.ranking_at(index, agent);
    let sincere = rule.outcome(index);
    (0..d.agent(agent).len()).find_map(|k| {
        let out = rule.outcome(d.with_coordinate(index, agent, k));
        truth.prefers(out, sincere).then(|| ManipulationWitness {
            agent,
            profile_index: index,
            profile: d.decode(index),
            deviation: k,
            sincere_outcome: sincere,
            deviating_outcome: out,
        })
    })
}

/// Like `find_manipulation(..).is_some()` for a bare outcome table.
pub(crate) fn table_manipulable(d: &ProductDomain, table: &[u8]) -> bool {
    (0..d.agent_count()).any(|agent| {
        (0..d.profile_count()).any(|index| {
            let truth = d.ranking_at(index, agent);
            let sincere = table[index];
            (0..d.agent(agent).len())
                .any(|k| truth.prefers(table[d.with_coordinate(index, agent, k)], sincere))
        })
    })
}

/// First manipulation in (agent, profile, deviation) order, or `None` if
/// the rule is strategy-proof.
pub fn find_manipulation(rule: &Rule) -> Option<ManipulationWitness> {
    let p = rule.domain().profile_count();
    (0..rule.domain().agent_count()).find_map(|agent| {
        if p >= 4096 {
            (0..p)
                .into_par_iter()
                .find_map_first(|k| first_deviation(rule, agent, k))
        } else {
            (0..p).find_map(|k| first_deviation(rule, agent, k))
        }
    })
}

pub fn is_strategy_proof(rule: &Rule) -> bool {
    find_manipulation(rule).is_none()
}

/// Every profitable misreport, in scan order.
pub fn all_manipulations(rule: &Rule) -> Vec<ManipulationWitness> {
    let d = rule.domain();
    let mut out = Vec::new();
    for agent in 0..d.agent_count() {
        for index in 0..d.profile_count() {
            let truth = d.ranking_at(index, agent);
            let sincere = rule.outcome(index);
            for k in 0..d.agent(agent).len() {
                let dev = rule.outcome(d.with_coordinate(index, agent, k));
                if truth.prefers(dev, sincere) {
                    out.push(ManipulationWitness {
                        agent,
                        profile_index: index,
                        profile: d.decode(index),
                        deviation: k,
                        sincere_outcome: sincere,
                        deviating_outcome: dev,
                    });
                }
            }
        }
    }
    out
}

/// Agents whose reported ranking always gets its best element of the range.
pub fn dictators_of(rule: &Rule) -> Vec<usize> {
    let range = range_of(rule);
    let d = rule.domain();
    (0..d.agent_count())
        .filter(|&i| {
            (0..d.profile_count())
                .all(|k| d.ranking_at(k, i).best_of(range) == Some(rule.outcome(k)))
        })
        .collect()
}

/// Restriction of `rule` to a subdomain, re-indexed canonically.
pub fn restrict_rule(rule: &Rule, sub: &ProductDomain) -> Result<Rule> {
    let d = rule.domain();
    if !sub.is_subdomain_of(d) {
        return Err(Error::NotSubset(
            "restriction target is not a subdomain of the rule's domain".into(),
        ));
    }
    // position of each sub-agent ranking in the original domain
    let maps: Vec<Vec<usize>> = sub
        .agents()
        .iter()
        .zip(d.agents())
        .map(|(s, o)| {
            s.rankings()
                .iter()
                .map(|r| o.index_of(r).expect("subset"))
                .collect()
        })
        .collect();
    Rule::from_fn(sub.clone(), DEFAULT_MAX_PROFILES, |sd, k| {
        let mut idx = 0;
        for (i, m) in maps.iter().enumerate() {
            idx += m[sd.coordinate(k, i)] * d.stride(i);
        }
        rule.outcome(idx)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaViolation {
    pub agent: usize,
    pub profile_index: usize,
    pub option_set: AltSet,
    pub outcome: u8,
}

/// Checks, for a strategy-proof rule, that the outcome is the agent's best
/// element of her option set, and that every two option-set members form a
/// free pair of her domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaAudit {
    /// False when the rule is manipulable; no checks are run then.
    pub applicable: bool,
    pub maximality: Vec<LemmaViolation>,
    pub free_pairs: Vec<LemmaViolation>,
}

impl LemmaAudit {
    pub fn is_clean(&self) -> bool {
        self.applicable && self.maximality.is_empty() && self.free_pairs.is_empty()
    }
}

pub fn audit_sp_lemmas(rule: &Rule) -> LemmaAudit {
    if !is_strategy_proof(rule) {
        return LemmaAudit {
            applicable: false,
            maximality: Vec::new(),
            free_pairs: Vec::new(),
        };
    }
    let d = rule.domain();
    let mut maximality = Vec::new();
    let mut free_pairs = Vec::new();
    for agent in 0..d.agent_count() {
        let own = d.agent(agent);
        for index in 0..d.profile_count() {
            let opts = option_set_full(rule, agent, index);
            let outcome = rule.outcome(index);
            let violation = LemmaViolation {
                agent,
                profile_index: index,
                option_set: opts,
                outcome,
            };
            if d.ranking_at(index, agent).best_of(opts) != Some(outcome) {
                maximality.push(violation.clone());
            }
            // only check each subprofile once, at the agent's first ranking
            if d.coordinate(index, agent) == 0 {
                let members: Vec<u8> = opts.iter().collect();
                let all_free = members.iter().enumerate().all(|(i, &a)| {
                    members[i + 1..].iter().all(|&b| own.is_free(a, b))
                });
                if !all_free {
                    free_pairs.push(violation);
                }
            }
        }
    }
    LemmaAudit {
        applicable: true,
        maximality,
        free_pairs,
    }
}

/// Text form: header `alternatives: x y z`, then `xyz,yxz -> x` per
/// profile in canonical order.
pub fn serialize_rule(alts: &Alternatives, rule: &Rule) -> String {
    let mut s = String::new();
    writeln!(s, "alternatives: {}", alts.labels().join(" ")).unwrap();
    let d = rule.domain();
    for k in 0..d.profile_count() {
        let parts: Vec<String> = (0..d.agent_count())
            .map(|i| alts.format_ranking(d.ranking_at(k, i)))
            .collect();
        writeln!(s, "{} -> {}", parts.join(","), alts.label(rule.outcome(k))).unwrap();
    }
    s
}

/// Parses the text form. Per-agent domains are the rankings appearing in
/// each position; profiles must cover the full product in canonical order.
pub fn parse_rule(text: &str) -> Result<(Alternatives, Rule)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, 1, "empty rule file"))?;
    let labels = header
        .strip_prefix("alternatives:")
        .ok_or_else(|| Error::parse(hline, 1, "expected `alternatives:` header"))?;
    let alts = Alternatives::new(labels.split_whitespace().map(str::to_owned))
        .map_err(|e| Error::parse(hline, 1, e.to_string()))?;
    let m = alts.len();

    let mut rows: Vec<(usize, Vec<Ranking>, u8)> = Vec::new();
    for (ln, line) in lines {
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| Error::parse(ln, 1, "expected `rankings -> outcome`"))?;
        let profile = lhs
            .split(',')
            .map(|t| alts.parse_ranking(t))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::parse(ln, 1, e.to_string()))?;
        let out_label = rhs.trim();
        let col = line.len() - rhs.trim_start().len() + 1;
        let outcome = alts
            .id(out_label)
            .ok_or_else(|| Error::parse(ln, col, format!("unknown outcome `{out_label}`")))?;
        if let Some((_, first, _)) = rows.first() {
            if first.len() != profile.len() {
                return Err(Error::parse(ln, 1, "inconsistent number of agents"));
            }
        }
        rows.push((ln, profile, outcome));
    }
    let n = rows
        .first()
        .map(|r| r.1.len())
        .ok_or_else(|| Error::parse(hline, 1, "rule file lists no profiles"))?;
    let agents = (0..n)
        .map(|i| PreferenceDomain::new(m, rows.iter().map(|r| r.1[i])))
        .collect::<Result<Vec<_>>>()?;
    let domain = ProductDomain::new(agents)?;
    if domain.profile_count() != rows.len() {
        return Err(Error::parse(
            hline,
            1,
            format!(
                "{} profiles listed, product of agent domains has {}",
                rows.len(),
                domain.profile_count()
            ),
        ));
    }
    for (k, (ln, profile, _)) in rows.iter().enumerate() {
        let expected = (0..n).map(|i| *domain.ranking_at(k, i));
        if !expected.eq(profile.iter().copied()) {
            return Err(Error::parse(*ln, 1, "profiles are not in canonical order"));
        }
    }
    let table = rows.into_iter().map(|r| r.2).collect();
    Ok((alts, Rule::new(domain, table)?))
}
