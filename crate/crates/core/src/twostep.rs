//! The two-step procedure: agents first answer the antecedent questions of
//! their restriction maps, then a subrule is applied on the product of the
//! resulting answer blocks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{classify, partition_by_answers, satisfied_antecedents, AnswerSet, RestrictionMap};
use crate::domain::{PreferenceDomain, ProductDomain};
use crate::enumerate::subrule_catalog;
use crate::error::{Error, Result};
use crate::pairs::{OrderedPair, PairSet};
use crate::ranking::Alternatives;
use crate::rules::{
    all_manipulations, dictators_of, is_strategy_proof, range_of,
    restrict_rule, table_manipulable, ManipulationWitness, Rule, DEFAULT_MAX_PROFILES,
};

/// Default number of assembled candidates `search_sp_combinations` tries.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// One answer set per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ResponseProfile {
    pub answers: Vec<AnswerSet>,
}

/// A product domain together with each agent's restriction map and the
/// answer blocks the maps induce.
#[derive(Debug, Clone)]
pub struct TwoStep {
    domain: ProductDomain,
    maps: Vec<RestrictionMap>,
    blocks: Vec<BTreeMap<AnswerSet, PreferenceDomain>>,
    /// Per agent and canonical ranking index: (answer set, its position
    /// among the agent's answer sets, index in its block).
    lookup: Vec<Vec<(AnswerSet, usize, usize)>>,
}

impl TwoStep {
    /// Fails unless every map rebuilds its agent's domain.
    pub fn new(domain: ProductDomain, maps: Vec<RestrictionMap>) -> Result<Self> {
        if maps.len() != domain.agent_count() {
            return Err(Error::InvalidParams(format!(
                "{} maps for {} agents",
                maps.len(),
                domain.agent_count()
            )));
        }
        let blocks = domain
            .agents()
            .iter()
            .zip(&maps)
            .map(|(d, m)| partition_by_answers(d, m))
            .collect::<Result<Vec<_>>>()?;
        let lookup = domain
            .agents()
            .iter()
            .zip(&maps)
            .zip(&blocks)
            .map(|((d, map), bl)| {
                let c = map.antecedent_pairs();
                d.rankings()
                    .iter()
                    .map(|r| {
                        let b = satisfied_antecedents(r, c);
                        let pos = bl.keys().position(|k| *k == b).expect("realizable");
                        (b, pos, bl[&b].index_of(r).expect("partition covers domain"))
                    })
                    .collect()
            })
            .collect();
        Ok(TwoStep {
            domain,
            maps,
            blocks,
            lookup,
        })
    }

    /// Uses the classifier's map for every agent.
    pub fn classified(domain: ProductDomain) -> Result<Self> {
        let maps = domain.agents().iter().map(classify).collect::<Result<Vec<_>>>()?;
        TwoStep::new(domain, maps)
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn maps(&self) -> &[RestrictionMap] {
        &self.maps
    }

    pub fn blocks(&self, agent: usize) -> &BTreeMap<AnswerSet, PreferenceDomain> {
        &self.blocks[agent]
    }

    /// All combinations of realizable answer sets, agent 0 most significant.
    pub fn response_profiles(&self) -> Vec<ResponseProfile> {
        let mut out = vec![Vec::new()];
        for bl in &self.blocks {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<AnswerSet>| {
                    bl.keys().map(move |&b| {
                        let mut v = prefix.clone();
                        v.push(b);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(|answers| ResponseProfile { answers }).collect()
    }

    pub fn block_domain(&self, rp: &ResponseProfile) -> Result<ProductDomain> {
        if rp.answers.len() != self.blocks.len() {
            return Err(Error::InvalidParams("response profile has wrong length".into()));
        }
        let agents = rp
            .answers
            .iter()
            .zip(&self.blocks)
            .enumerate()
            .map(|(i, (b, bl))| {
                bl.get(b).cloned().ok_or_else(|| {
                    Error::Assignment(format!("agent {i}: answer set is not realizable"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ProductDomain::new(agents)
    }

    /// The answer set agent `agent` gives with the ranking at canonical index `k`.
    pub fn answer_of(&self, agent: usize, k: usize) -> AnswerSet {
        self.lookup[agent][k].0
    }

    pub fn response_at(&self, index: usize) -> ResponseProfile {
        ResponseProfile {
            answers: (0..self.domain.agent_count())
                .map(|i| self.answer_of(i, self.domain.coordinate(index, i)))
                .collect(),
        }
    }

    /// Position of the profile's response profile in `response_profiles()`.
    pub fn response_index(&self, index: usize) -> usize {
        (0..self.domain.agent_count()).fold(0, |acc, i| {
            acc * self.blocks[i].len() + self.lookup[i][self.domain.coordinate(index, i)].1
        })
    }

    /// Index of a full-domain profile within its block product.
    fn block_index(&self, block: &ProductDomain, index: usize) -> usize {
        (0..self.domain.agent_count())
            .map(|i| self.lookup[i][self.domain.coordinate(index, i)].2 * block.stride(i))
            .sum()
    }
}

/// A subrule for every realizable response profile.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TwoStepAssignment {
    pub subrules: BTreeMap<ResponseProfile, Rule>,
}

/// Routes each profile to the subrule of its response profile.
pub fn assemble(setup: &TwoStep, assignment: &TwoStepAssignment) -> Result<Rule> {
    let profiles = setup.response_profiles();
    let mut blocks = Vec::with_capacity(profiles.len());
    for rp in &profiles {
        let sub = assignment
            .subrules
            .get(rp)
            .ok_or_else(|| Error::Assignment(format!("no subrule for response profile {:?}", rp.answers)))?;
        let block = setup.block_domain(rp)?;
        if *sub.domain() != block {
            return Err(Error::Assignment(format!(
                "subrule for {:?} is not defined on its answer blocks",
                rp.answers
            )));
        }
        blocks.push((block, sub));
    }
    if assignment.subrules.len() != profiles.len() {
        return Err(Error::Assignment("assignment names unrealizable response profiles".into()));
    }
    Rule::from_fn(setup.domain().clone(), DEFAULT_MAX_PROFILES, |_, k| {
        let (block, sub) = &blocks[setup.response_index(k)];
        sub.outcome(setup.block_index(block, k))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "agents", rename_all = "kebab-case")]
pub enum BlockClass {
    Dictatorial(Vec<usize>),
    SpRange2,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockReport {
    pub profile: ResponseProfile,
    pub subrule: Rule,
    pub class: BlockClass,
}

pub fn classify_subrule(sub: &Rule) -> BlockClass {
    let dict = dictators_of(sub);
    if !dict.is_empty() {
        BlockClass::Dictatorial(dict)
    } else if range_of(sub).len() <= 2 && is_strategy_proof(sub) {
        BlockClass::SpRange2
    } else {
        BlockClass::Violation
    }
}

/// Restricts `rule` to every block product and classifies the pieces.
pub fn decompose(rule: &Rule, setup: &TwoStep) -> Result<Vec<BlockReport>> {
    if rule.domain() != setup.domain() {
        return Err(Error::InvalidParams("rule and maps are over different domains".into()));
    }
    setup
        .response_profiles()
        .into_iter()
        .map(|profile| {
            let subrule = restrict_rule(rule, &setup.block_domain(&profile)?)?;
            let class = classify_subrule(&subrule);
            Ok(BlockReport {
                profile,
                subrule,
                class,
            })
        })
        .collect()
}

/// Inverse of `decompose`: the block pieces as an assignment.
pub fn assignment_of(reports: &[BlockReport]) -> TwoStepAssignment {
    TwoStepAssignment {
        subrules: reports
            .iter()
            .map(|b| (b.profile.clone(), b.subrule.clone()))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedWitness {
    #[serde(flatten)]
    pub witness: ManipulationWitness,
    /// Whether the misreport changes the manipulator's own answer set.
    pub answer_changing: bool,
}

pub fn first_step_witnesses(rule: &Rule, setup: &TwoStep) -> Vec<AnnotatedWitness> {
    all_manipulations(rule)
        .into_iter()
        .map(|w| {
            let truth = w.profile[w.agent];
            let answer_changing = setup.answer_of(w.agent, truth) != setup.answer_of(w.agent, w.deviation);
            AnnotatedWitness {
                witness: w,
                answer_changing,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// SP assembled rules in candidate order.
    pub rules: Vec<Rule>,
    pub explored: u64,
    /// Candidate count, saturating at `u128::MAX`.
    pub total: u128,
    /// True when every candidate was examined.
    pub complete: bool,
}

/// Assembles combinations of per-block catalog subrules (first response
/// profile most significant) and keeps the SP ones.
pub fn search_sp_combinations(setup: &TwoStep, budget: u64) -> Result<SearchOutcome> {
    let profiles = setup.response_profiles();
    let catalogs = profiles
        .iter()
        .map(|rp| subrule_catalog(&setup.block_domain(rp)?))
        .collect::<Result<Vec<_>>>()?;
    let total = catalogs
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX);
    let explored = total.min(budget as u128) as u64;
    let d = setup.domain();
    let block_domains = profiles
        .iter()
        .map(|rp| setup.block_domain(rp))
        .collect::<Result<Vec<_>>>()?;
    // (response profile, index within its block) for every profile
    let routes: Vec<(usize, usize)> = (0..d.profile_count())
        .map(|k| {
            let r = setup.response_index(k);
            (r, setup.block_index(&block_domains[r], k))
        })
        .collect();
    let tables: Vec<Vec<u8>> = (0..explored)
        .into_par_iter()
        .filter_map(|code| {
            let mut rest = code as u128;
            let mut picks = vec![0usize; catalogs.len()];
            for (j, cat) in catalogs.iter().enumerate().rev() {
                picks[j] = (rest % cat.len() as u128) as usize;
                rest /= cat.len() as u128;
            }
            let table: Vec<u8> = routes
                .iter()
                .map(|&(r, bi)| catalogs[r][picks[r]].outcome(bi))
                .collect();
            (!table_manipulable(d, &table)).then_some(table)
        })
        .collect();
    let rules = tables
        .into_iter()
        .map(|t| Rule::new(d.clone(), t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchOutcome {
        rules,
        explored,
        total,
        complete: explored as u128 == total,
    })
}

/// Where a line of an assignment file takes its subrule from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubruleRef {
    /// Index into the block's subrule catalog.
    Catalog(usize),
    /// Path of a rule file.
    File(String),
}

fn format_answers(alts: &Alternatives, b: AnswerSet) -> String {
    let inner: Vec<String> = b.pairs().iter().map(|p| alts.format_pair(p)).collect();
    format!("{{{}}}", inner.join(", "))
}

pub fn format_response_profile(alts: &Alternatives, rp: &ResponseProfile) -> String {
    rp.answers
        .iter()
        .map(|&b| format_answers(alts, b))
        .collect::<Vec<_>>()
        .join(" | ")
}

fn parse_answers(alts: &Alternatives, text: &str, line: usize) -> Result<AnswerSet> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| Error::parse(line, 1, format!("expected `{{...}}`, found `{}`", text.trim())))?;
    let mut set = PairSet::EMPTY;
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = part
            .split_once('>')
            .ok_or_else(|| Error::parse(line, 1, format!("expected `a > b`, found `{part}`")))?;
        let id = |s: &str| {
            alts.id(s.trim())
                .ok_or_else(|| Error::parse(line, 1, format!("unknown alternative `{}`", s.trim())))
        };
        set.insert(OrderedPair::new(id(a)?, id(b)?));
    }
    Ok(AnswerSet(set))
}

/// Parses assignment lines `{x > y} | {} -> catalog 3` or
/// `{} | {} -> rule path/to/sub.rule`.
pub fn parse_assignment(
    alts: &Alternatives,
    text: &str,
) -> Result<Vec<(ResponseProfile, SubruleRef)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ln = i + 1;
        let (lhs, rhs) = line
            .rsplit_once("->")
            .ok_or_else(|| Error::parse(ln, 1, "expected `answers -> reference`"))?;
        let answers = lhs
            .split('|')
            .map(|part| parse_answers(alts, part, ln))
            .collect::<Result<Vec<_>>>()?;
        let col = line.len() - rhs.trim_start().len() + 1;
        let reference = match rhs.trim().split_once(char::is_whitespace) {
            Some(("catalog", n)) => SubruleRef::Catalog(
                n.trim()
                    .parse()
                    .map_err(|_| Error::parse(ln, col, format!("bad catalog index `{}`", n.trim())))?,
            ),
            Some(("rule", path)) => SubruleRef::File(path.trim().to_owned()),
            _ => return Err(Error::parse(ln, col, "expected `catalog N` or `rule PATH`")),
        };
        out.push((ResponseProfile { answers }, reference));
    }
    Ok(out)
}

/// Resolves assignment lines against a setup; `load` reads rule files.
pub fn resolve_assignment(
    setup: &TwoStep,
    lines: Vec<(ResponseProfile, SubruleRef)>,
    mut load: impl FnMut(&str) -> Result<Rule>,
) -> Result<TwoStepAssignment> {
    let mut subrules = BTreeMap::new();
    for (rp, reference) in lines {
        let block = setup.block_domain(&rp)?;
        let rule = match reference {
            SubruleRef::Catalog(k) => {
                let cat = subrule_catalog(&block)?;
                let len = cat.len();
                cat.into_iter().nth(k).ok_or_else(|| {
                    Error::Assignment(format!("catalog index {k} out of range (catalog has {len})"))
                })?
            }
            SubruleRef::File(path) => load(&path)?,
        };
        if subrules.insert(rp.clone(), rule).is_some() {
            return Err(Error::Assignment(format!("response profile {:?} assigned twice", rp.answers)));
        }
    }
    Ok(TwoStepAssignment { subrules })
}

/// Writes an assignment as catalog references, failing if some subrule is
/// not in its block's catalog.
pub fn serialize_assignment(
    alts: &Alternatives,
    setup: &TwoStep,
    assignment: &TwoStepAssignment,
) -> Result<String> {
    let mut s = String::new();
    for (rp, rule) in &assignment.subrules {
        let cat = subrule_catalog(&setup.block_domain(rp)?)?;
        let k = cat
            .iter()
            .position(|c| c == rule)
            .ok_or_else(|| Error::Assignment(format!("subrule for {:?} is not in the catalog", rp.answers)))?;
        writeln!(s, "{} -> catalog {k}", format_response_profile(alts, rp)).unwrap();
    }
    Ok(s)
}
