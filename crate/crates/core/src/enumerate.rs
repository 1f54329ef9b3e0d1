//! Exhaustive enumeration of strategy-proof rules and closed-form counts of
//! the subrules that may be used after the first step.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::classifier::AnswerSet;
use crate::domain::{all_nonconditional_domains, PreferenceDomain, ProductDomain};
use crate::error::{Error, Result};
use crate::pairs::OrderedPair;
use crate::ranking::AltSet;
use crate::rules::{dictators_of, range_of, Rule, DEFAULT_MAX_PROFILES};
use crate::twostep::TwoStep;

/// Largest product domain the enumerator will search.
pub const ENUMERATION_GUARD: usize = 10_000;

/// Backtracking search over outcome tables.
///
/// Two profiles that differ only in agent `i`'s ranking (`R` at `p`, `R'`
/// at `q`) constrain the outcomes `a = f(p)` and `b = f(q)`: either `a == b`,
/// or `R` ranks `a` above `b` and `R'` ranks `b` above `a`. Any other pair
/// lets agent `i` gain by switching reports. The search keeps every profile's
/// candidate outcomes arc-consistent with its neighbours under these
/// constraints, so each leaf it reaches is strategy-proof.
pub struct SpEnumerator {
    domain: ProductDomain,
    /// `support[i][kp * n_i + kq][b]`: outcomes at `p` compatible with `b` at `q`.
    support: Vec<Vec<[u8; 8]>>,
    domains: Vec<u8>,
    trail: Vec<(usize, u8)>,
    frames: Vec<Frame>,
    descend: bool,
    done: bool,
}

struct Frame {
    remaining: u8,
    mark: usize,
}

fn pair_support(r: &crate::ranking::Ranking, r2: &crate::ranking::Ranking, m: usize) -> [u8; 8] {
    let mut out = [0u8; 8];
    for (b, slot) in out.iter_mut().enumerate().take(m) {
        let b = b as u8;
        let mut mask = 1u8 << b;
        for a in 0..m as u8 {
            if a != b && r.prefers(a, b) && r2.prefers(b, a) {
                mask |= 1 << a;
            }
        }
        *slot = mask;
    }
    out
}

impl SpEnumerator {
    /// Enumerates SP rules on `domain` whose range lies in `range_filter`
    /// (all alternatives when `None`).
    pub fn new(domain: ProductDomain, range_filter: Option<AltSet>) -> Result<Self> {
        if domain.profile_count() > ENUMERATION_GUARD {
            return Err(Error::SizeLimit {
                what: "enumeration profile count",
                actual: domain.profile_count() as u128,
                limit: ENUMERATION_GUARD as u128,
            });
        }
        let m = domain.m();
        let support = domain
            .agents()
            .iter()
            .map(|d| {
                let n = d.len();
                let mut v = Vec::with_capacity(n * n);
                for kp in 0..n {
                    for kq in 0..n {
                        v.push(pair_support(d.ranking(kp), d.ranking(kq), m));
                    }
                }
                v
            })
            .collect();
        let mask = range_filter.unwrap_or(AltSet::full(m)).bits() & AltSet::full(m).bits();
        let mut e = SpEnumerator {
            domains: vec![mask; domain.profile_count()],
            domain,
            support,
            trail: Vec::new(),
            frames: Vec::new(),
            descend: true,
            done: false,
        };
        let all: Vec<usize> = (0..e.domains.len()).collect();
        if mask == 0 || !e.propagate(all) {
            e.done = true;
        }
        e.trail.clear();
        Ok(e)
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    fn set(&mut self, v: usize, mask: u8) {
        self.trail.push((v, self.domains[v]));
        self.domains[v] = mask;
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (v, old) = self.trail.pop().unwrap();
            self.domains[v] = old;
        }
    }

    /// AC-3 from the given changed profiles. Returns false on a wipeout.
    fn propagate(&mut self, seeds: Vec<usize>) -> bool {
        let mut queue: VecDeque<usize> = seeds.into();
        let mut queued = vec![false; self.domains.len()];
        for &v in &queue {
            queued[v] = true;
        }
        while let Some(p) = queue.pop_front() {
            queued[p] = false;
            let dp = self.domains[p];
            for i in 0..self.domain.agent_count() {
                let n = self.domain.agent(i).len();
                let kp = self.domain.coordinate(p, i);
                for kq in 0..n {
                    if kq == kp {
                        continue;
                    }
                    let q = self.domain.with_coordinate(p, i, kq);
                    let sup = &self.support[i][kp * n + kq];
                    let dq = self.domains[q];
                    let mut keep = 0u8;
                    let mut rest = dq;
                    while rest != 0 {
                        let b = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        if sup[b] & dp != 0 {
                            keep |= 1 << b;
                        }
                    }
                    if keep != dq {
                        if keep == 0 {
                            return false;
                        }
                        self.set(q, keep);
                        if !queued[q] {
                            queued[q] = true;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        true
    }

    fn current_rule(&self) -> Rule {
        let table = self.domains.iter().map(|d| d.trailing_zeros() as u8).collect();
        Rule::new(self.domain.clone(), table).expect("valid table")
    }
}

impl Iterator for SpEnumerator {
    type Item = Rule;

    fn next(&mut self) -> Option<Rule> {
        if self.done {
            return None;
        }
        loop {
            if self.descend {
                self.descend = false;
                let depth = self.frames.len();
                if depth == self.domains.len() {
                    return Some(self.current_rule());
                }
                self.frames.push(Frame {
                    remaining: self.domains[depth],
                    mark: self.trail.len(),
                });
            }
            let Some(top) = self.frames.last_mut() else {
                self.done = true;
                return None;
            };
            let mark = top.mark;
            if top.remaining == 0 {
                self.frames.pop();
                self.undo_to(mark);
                if self.frames.is_empty() {
                    self.done = true;
                    return None;
                }
                continue;
            }
            let a = top.remaining.trailing_zeros() as u8;
            top.remaining &= top.remaining - 1;
            let depth = self.frames.len() - 1;
            self.undo_to(mark);
            if self.domains[depth] != 1 << a {
                self.set(depth, 1 << a);
            }
            if self.propagate(vec![depth]) {
                self.descend = true;
            }
        }
    }
}

pub fn enumerate_sp_rules(d: &ProductDomain, range_filter: Option<AltSet>) -> Result<SpEnumerator> {
    SpEnumerator::new(d.clone(), range_filter)
}

/// Precomputed monotone Boolean function counts for 5 to 8 variables.
const DEDEKIND_TABLE: [u128; 4] = [7581, 7_828_354, 2_414_682_040_998, 56_130_437_228_687_557_907_788];

/// Number of monotone Boolean functions of `n` variables.
pub fn dedekind(n: usize) -> Result<u128> {
    match n {
        0..=4 => Ok(monotone_truth_tables_brute(n).count() as u128),
        5..=8 => Ok(DEDEKIND_TABLE[n - 5]),
        _ => Err(Error::SizeLimit {
            what: "Dedekind number argument",
            actual: n as u128,
            limit: 8,
        }),
    }
}

fn monotone_truth_tables_brute(n: usize) -> impl Iterator<Item = u64> {
    let points = 1usize << n;
    (0u64..1 << points).filter(move |&f| {
        (0..points).all(|v| {
            (0..n).all(|j| {
                let w = v | 1 << j;
                f >> v & 1 <= f >> w & 1
            })
        })
    })
}

/// Truth tables (bit `v` = value at vote vector `v`) of all monotone
/// functions of `n ≤ 5` variables, in ascending order.
pub fn monotone_functions(n: usize) -> Result<Vec<u64>> {
    if n > 5 {
        return Err(Error::SizeLimit {
            what: "monotone function listing",
            actual: n as u128,
            limit: 5,
        });
    }
    // f(x, v) = (f0(v), f1(v)) with f0 ≤ f1 pointwise
    let mut fs = vec![0u64, 1];
    for k in 0..n {
        let half = 1u32 << k;
        let mut next = Vec::new();
        for &f0 in &fs {
            for &f1 in &fs {
                if f0 & !f1 == 0 {
                    next.push(f0 | f1 << half);
                }
            }
        }
        fs = next;
    }
    fs.sort_unstable();
    Ok(fs)
}

/// How each agent can vote on the pair `{a, b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoteStatus {
    FixedA,
    FixedB,
    Free,
}

/// Reduction of a product domain to per-agent `a`-vs-`b` votes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VoteQuotient {
    pub a: u8,
    pub b: u8,
    pub statuses: Vec<VoteStatus>,
}

impl VoteQuotient {
    pub fn new(d: &ProductDomain, a: u8, b: u8) -> Self {
        let statuses = d
            .agents()
            .iter()
            .map(|dom| {
                if dom.is_free(a, b) {
                    VoteStatus::Free
                } else if dom.ranking(0).prefers(a, b) {
                    VoteStatus::FixedA
                } else {
                    VoteStatus::FixedB
                }
            })
            .collect();
        VoteQuotient { a, b, statuses }
    }

    pub fn free_agents(&self) -> Vec<usize> {
        (0..self.statuses.len())
            .filter(|&i| self.statuses[i] == VoteStatus::Free)
            .collect()
    }

    /// Bit `j` set iff the `j`th free agent ranks `a` above `b` at the profile.
    pub fn votes_at(&self, d: &ProductDomain, index: usize) -> usize {
        self.free_agents()
            .iter()
            .enumerate()
            .filter(|&(_, &i)| d.ranking_at(index, i).prefers(self.a, self.b))
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }

    /// The rule as a function of the free votes (true = `a`), if its range
    /// lies in `{a, b}` and it factors through the votes.
    pub fn vote_function(&self, rule: &Rule) -> Option<Vec<bool>> {
        let d = rule.domain();
        let n = self.free_agents().len();
        let mut f: Vec<Option<bool>> = vec![None; 1 << n];
        for k in 0..d.profile_count() {
            let o = rule.outcome(k);
            if o != self.a && o != self.b {
                return None;
            }
            let slot = &mut f[self.votes_at(d, k)];
            match slot {
                Some(prev) if *prev != (o == self.a) => return None,
                _ => *slot = Some(o == self.a),
            }
        }
        f.into_iter().collect()
    }

    /// Builds the rule that returns `a` exactly at the vote vectors where
    /// bit `v` of `truth` is set.
    pub fn rule_from_truth_table(&self, d: &ProductDomain, truth: u64) -> Result<Rule> {
        Rule::from_fn(d.clone(), DEFAULT_MAX_PROFILES, |d, k| {
            if truth >> self.votes_at(d, k) & 1 == 1 {
                self.a
            } else {
                self.b
            }
        })
    }
}

/// True when `f` (true = `a`) never switches from `a` to `b` as a vote
/// moves toward `a`.
pub fn is_monotone(f: &[bool]) -> bool {
    (0..f.len()).all(|v| {
        let mut bit = 1;
        while bit < f.len() {
            if v & bit == 0 && f[v] && !f[v | bit] {
                return false;
            }
            bit <<= 1;
        }
        true
    })
}

/// SP rules with range exactly `{a, b}`.
pub fn count_sp_range2(d: &ProductDomain, a: u8, b: u8) -> Result<u128> {
    let n = (0..d.agent_count()).filter(|&i| d.agent(i).is_free(a, b)).count();
    Ok(dedekind(n)? - 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum DictatorKey {
    Constant(u8),
    Agent(usize, Vec<u8>),
}

/// Extensional identity of a dictatorship: a table that depends only on
/// agent `i`'s ranking is fixed by that map, and non-constant maps of
/// different agents never coincide on a product domain.
fn dictator_key(d: &PreferenceDomain, agent: usize, range: AltSet) -> DictatorKey {
    let g: Vec<u8> = d.rankings().iter().map(|r| r.best_of(range).unwrap()).collect();
    if g.iter().all(|&o| o == g[0]) {
        DictatorKey::Constant(g[0])
    } else {
        DictatorKey::Agent(agent, g)
    }
}

fn dictator_candidates(d: &ProductDomain, k: usize) -> Vec<(usize, AltSet)> {
    let mut out = Vec::new();
    for i in 0..d.agent_count() {
        for r in AltSet::subsets_of_size(d.m(), k) {
            if d.agent(i).attainable_maxima(r) == r {
                out.push((i, r));
            }
        }
    }
    out
}

/// Distinct dictatorship tables whose range has exactly `k` elements.
pub fn count_dictatorial(d: &ProductDomain, k: usize) -> Result<u128> {
    if k == 0 {
        return Err(Error::InvalidParams("range size must be at least 1".into()));
    }
    let keys: HashSet<DictatorKey> = dictator_candidates(d, k)
        .into_iter()
        .map(|(i, r)| dictator_key(d.agent(i), i, r))
        .collect();
    Ok(keys.len() as u128)
}

/// Closed-form number of SP rules on `d` that are dictatorial or have at
/// most two outcomes.
pub fn formula_count(d: &ProductDomain) -> Result<SubruleCount> {
    let m = d.m();
    let constants = m as u128;
    let mut range2 = Vec::new();
    for p in crate::pairs::PairSet::all_unordered(m).iter() {
        range2.push((p, count_sp_range2(d, p.top, p.bottom)?));
    }
    let mut dictatorial = Vec::new();
    for k in 3..=m {
        dictatorial.push((k, count_dictatorial(d, k)?));
    }
    let subtotal = constants
        + range2.iter().map(|x| x.1).sum::<u128>()
        + dictatorial.iter().map(|x| x.1).sum::<u128>();
    Ok(SubruleCount {
        constants,
        range2,
        dictatorial,
        subtotal,
    })
}

/// The formula count re-derived by backtracking: SP rules that are
/// dictatorial or use at most two outcomes.
pub fn enumerated_count(d: &ProductDomain) -> Result<u128> {
    let mut n = 0;
    for rule in enumerate_sp_rules(d, None)? {
        if range_of(&rule).len() <= 2 || !dictators_of(&rule).is_empty() {
            n += 1;
        }
    }
    Ok(n)
}

fn ser_u128_pairs<S: Serializer>(v: &[(OrderedPair, u128)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(p, c)| ([p.top, p.bottom], c)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubruleCount {
    pub constants: u128,
    #[serde(serialize_with = "ser_u128_pairs")]
    pub range2: Vec<(OrderedPair, u128)>,
    /// `(k, count)` for each range size `k ≥ 3`.
    pub dictatorial: Vec<(usize, u128)>,
    pub subtotal: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResponseCount {
    pub answers: Vec<AnswerSet>,
    #[serde(flatten)]
    pub count: SubruleCount,
}

fn ser_biguint<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubruleCountReport {
    pub rows: Vec<ResponseCount>,
    #[serde(serialize_with = "ser_biguint")]
    pub product: BigUint,
}

/// Per-response-profile subrule counts and their product.
pub fn count_second_step(setup: &TwoStep) -> Result<SubruleCountReport> {
    let rows = setup
        .response_profiles()
        .into_iter()
        .map(|rp| {
            let block = setup.block_domain(&rp)?;
            Ok(ResponseCount {
                answers: rp.answers,
                count: formula_count(&block)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let product = rows
        .iter()
        .fold(BigUint::from(1u8), |acc, r| acc * BigUint::from(r.count.subtotal));
    Ok(SubruleCountReport { rows, product })
}

/// Re-derives every row of a report by backtracking on its block.
pub fn oracle_check(setup: &TwoStep, report: &SubruleCountReport) -> Result<Vec<usize>> {
    let profiles = setup.response_profiles();
    let mut bad = Vec::new();
    for (idx, (rp, row)) in profiles.iter().zip(&report.rows).enumerate() {
        if enumerated_count(&setup.block_domain(rp)?)? != row.count.subtotal {
            bad.push(idx);
        }
    }
    Ok(bad)
}

/// Every dictatorial-or-range-two SP subrule on `d`: constants by id, then
/// vote functions per pair (pairs ascending, truth tables ascending), then
/// dictatorships of range size 3 and up (size, agent, range).
pub fn subrule_catalog(d: &ProductDomain) -> Result<Vec<Rule>> {
    let m = d.m();
    let mut out = Vec::new();
    for a in 0..m as u8 {
        out.push(Rule::constant(d.clone(), a)?);
    }
    for p in crate::pairs::PairSet::all_unordered(m).iter() {
        let q = VoteQuotient::new(d, p.top, p.bottom);
        let n = q.free_agents().len();
        let full = (1u64 << (1 << n)) - 1;
        for t in monotone_functions(n)? {
            if t != 0 && t != full {
                out.push(q.rule_from_truth_table(d, t)?);
            }
        }
    }
    let mut seen = HashSet::new();
    for k in 3..=m {
        for (i, r) in dictator_candidates(d, k) {
            if seen.insert(dictator_key(d.agent(i), i, r)) {
                out.push(Rule::dictatorship(d.clone(), i, r)?);
            }
        }
    }
    Ok(out)
}

/// An SP rule that is neither dictatorial nor of range two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub instance: usize,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpossibilityReport {
    pub instances: usize,
    pub sp_rules: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl ImpossibilityReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn violates(rule: &Rule) -> bool {
    range_of(rule).len() != 2 && dictators_of(rule).is_empty()
}

/// Enumerates the SP rules of each family member and collects those with
/// range size other than two and no dictator.
pub fn verify_impossibility(family: &[ProductDomain]) -> Result<ImpossibilityReport> {
    let per: Vec<(u64, Vec<Counterexample>)> = family
        .par_iter()
        .enumerate()
        .map(|(instance, d)| {
            let mut n = 0;
            let mut bad = Vec::new();
            for rule in enumerate_sp_rules(d, None)? {
                n += 1;
                if violates(&rule) {
                    bad.push(Counterexample { instance, rule });
                }
            }
            Ok((n, bad))
        })
        .collect::<Result<_>>()?;
    let sp_rules = per.iter().map(|p| p.0).sum();
    let counterexamples = per.into_iter().flat_map(|p| p.1).collect();
    Ok(ImpossibilityReport {
        instances: family.len(),
        sp_rules,
        counterexamples,
    })
}

/// All `n`-agent products of non-conditional domains over `m` alternatives.
pub fn nonconditional_family(m: usize, n: usize) -> Result<Vec<ProductDomain>> {
    let doms = all_nonconditional_domains(m)?;
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<PreferenceDomain>| {
                doms.iter().map(move |d| {
                    let mut v = prefix.clone();
                    v.push(d.clone());
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(ProductDomain::new).collect()
}

/// Distinct outcome tables in a rule list, for catalog sanity checks.
pub fn distinct_tables(rules: &[Rule]) -> usize {
    rules.iter().map(|r| r.table()).collect::<BTreeSet<_>>().len()
}
