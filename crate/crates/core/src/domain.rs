//! Preference domains, product domains and the domain families used
//! throughout the crate.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::pairs::{OrderedPair, PairSet};
use crate::ranking::{all_rankings, AltSet, Ranking};

/// A nonempty set of rankings over `0..m`, held in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceDomain {
    m: usize,
    rankings: Vec<Ranking>,
    fixed: PairSet,
    free: PairSet,
}

impl PreferenceDomain {
    /// Sorts and deduplicates `rankings`. Fails on an empty set or on
    /// rankings over a different number of alternatives.
    pub fn new(m: usize, rankings: impl IntoIterator<Item = Ranking>) -> Result<Self> {
        let set: BTreeSet<Ranking> = rankings.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if let Some(r) = set.iter().find(|r| r.m() != m) {
            return Err(Error::InvalidRanking(format!(
                "{r:?} is over {} alternatives, domain has {m}",
                r.m()
            )));
        }
        let rankings: Vec<Ranking> = set.into_iter().collect();
        let fixed = rankings
            .iter()
            .fold(PairSet::all(m), |acc, r| acc.intersection(r.pairs()));
        let free = PairSet::all_unordered(m)
            .iter()
            .filter(|p| !fixed.contains(*p) && !fixed.contains(p.reversed()))
            .collect();
        Ok(PreferenceDomain {
            m,
            rankings,
            fixed,
            free,
        })
    }

    pub fn universal(m: usize) -> Result<Self> {
        Self::new(m, all_rankings(m)?)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn ranking(&self, index: usize) -> &Ranking {
        &self.rankings[index]
    }

    pub fn contains(&self, r: &Ranking) -> bool {
        self.rankings.binary_search(r).is_ok()
    }

    /// Position of `r` in canonical order.
    pub fn index_of(&self, r: &Ranking) -> Option<usize> {
        self.rankings.binary_search(r).ok()
    }

    pub fn is_subset(&self, other: &PreferenceDomain) -> bool {
        self.m == other.m && self.rankings.iter().all(|r| other.contains(r))
    }

    /// Ordered pairs on which every member agrees.
    pub fn fixed_pairs(&self) -> PairSet {
        self.fixed
    }

    /// Unordered pairs (normalized `top < bottom`) realized in both orders.
    pub fn free_pairs(&self) -> PairSet {
        self.free
    }

    pub fn is_free(&self, a: u8, b: u8) -> bool {
        a != b && self.free.contains(OrderedPair::new(a, b).unordered())
    }

    /// `(fixed, free)`.
    pub fn pair_sets(&self) -> (PairSet, PairSet) {
        (self.fixed, self.free)
    }

    /// True iff the domain is exactly the set of rankings consistent with its
    /// fixed pairs.
    pub fn is_non_conditional(&self) -> bool {
        // every member is consistent with the fixed pairs, so comparing sizes suffices
        match nonconditional_closure(self.fixed, self.m) {
            Ok(closure) => closure.len() == self.len(),
            Err(_) => false,
        }
    }

    /// Members satisfying `pred`; `None` when nothing survives.
    pub fn filter(&self, pred: impl Fn(&Ranking) -> bool) -> Option<PreferenceDomain> {
        let kept: Vec<Ranking> = self.rankings.iter().copied().filter(|r| pred(r)).collect();
        if kept.is_empty() {
            None
        } else {
            Some(PreferenceDomain::new(self.m, kept).expect("nonempty subset"))
        }
    }

    /// Alternatives that are the best element of `set` under some member.
    pub fn attainable_maxima(&self, set: AltSet) -> AltSet {
        self.rankings.iter().filter_map(|r| r.best_of(set)).collect()
    }
}

/// All rankings consistent with every pair in `fixed`.
pub fn nonconditional_closure(fixed: PairSet, m: usize) -> Result<PreferenceDomain> {
    if !fixed.is_subset(PairSet::all(m)) {
        return Err(Error::InvalidParams(
            "fixed pairs reference alternatives outside 0..m".into(),
        ));
    }
    let kept: Vec<Ranking> = all_rankings(m)?
        .into_iter()
        .filter(|r| r.satisfies(fixed))
        .collect();
    if kept.is_empty() {
        return Err(Error::Unsatisfiable(
            "fixed pairs are contradictory or cyclic".into(),
        ));
    }
    PreferenceDomain::new(m, kept)
}

/// Cartesian product of per-agent domains over a common alternative set.
///
/// Profiles are indexed mixed-radix with agent 0 as the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductDomain {
    agents: Vec<PreferenceDomain>,
    strides: Vec<usize>,
    profile_count: usize,
}

impl ProductDomain {
    pub fn new(agents: Vec<PreferenceDomain>) -> Result<Self> {
        let first = agents
            .first()
            .ok_or_else(|| Error::InvalidParams("product domain needs at least one agent".into()))?;
        let m = first.m();
        if agents.iter().any(|d| d.m() != m) {
            return Err(Error::InvalidParams(
                "all agents must share the alternative set".into(),
            ));
        }
        let mut strides = vec![1usize; agents.len()];
        let mut count: usize = 1;
        for i in (0..agents.len()).rev() {
            strides[i] = count;
            count = count
                .checked_mul(agents[i].len())
                .ok_or(Error::SizeLimit {
                    what: "profile count",
                    actual: u128::MAX,
                    limit: usize::MAX as u128,
                })?;
        }
        Ok(ProductDomain {
            agents,
            strides,
            profile_count: count,
        })
    }

    /// `n` copies of the same domain.
    pub fn common(domain: PreferenceDomain, n: usize) -> Result<Self> {
        Self::new(vec![domain; n])
    }

    pub fn m(&self) -> usize {
        self.agents[0].m()
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, i: usize) -> &PreferenceDomain {
        &self.agents[i]
    }

    pub fn agents(&self) -> &[PreferenceDomain] {
        &self.agents
    }

    pub fn profile_count(&self) -> usize {
        self.profile_count
    }

    pub fn stride(&self, agent: usize) -> usize {
        self.strides[agent]
    }

    pub fn is_non_conditional(&self) -> bool {
        self.agents.iter().all(PreferenceDomain::is_non_conditional)
    }

    /// Mixed-radix index of a profile given per-agent ranking indices.
    pub fn index(&self, profile: &[usize]) -> Result<usize> {
        if profile.len() != self.agents.len() {
            return Err(Error::OutOfRange(format!(
                "profile has {} entries, domain has {} agents",
                profile.len(),
                self.agents.len()
            )));
        }
        let mut idx = 0;
        for (i, &k) in profile.iter().enumerate() {
            if k >= self.agents[i].len() {
                return Err(Error::OutOfRange(format!(
                    "agent {i} ranking index {k} >= {}",
                    self.agents[i].len()
                )));
            }
            idx += k * self.strides[i];
        }
        Ok(idx)
    }

    /// Per-agent ranking indices of profile `index`.
    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.agents.len())
            .map(|i| self.coordinate(index, i))
            .collect()
    }

    #[inline]
    pub fn coordinate(&self, index: usize, agent: usize) -> usize {
        (index / self.strides[agent]) % self.agents[agent].len()
    }

    /// Profile index with agent `agent`'s coordinate replaced by `k`.
    #[inline]
    pub fn with_coordinate(&self, index: usize, agent: usize, k: usize) -> usize {
        let c = self.coordinate(index, agent);
        index - c * self.strides[agent] + k * self.strides[agent]
    }

    /// Agent `agent`'s ranking at profile `index`.
    #[inline]
    pub fn ranking_at(&self, index: usize, agent: usize) -> &Ranking {
        self.agents[agent].ranking(self.coordinate(index, agent))
    }

    /// True when every agent domain of `self` is a subset of the matching one in `other`.
    pub fn is_subdomain_of(&self, other: &ProductDomain) -> bool {
        self.agents.len() == other.agents.len()
            && self
                .agents
                .iter()
                .zip(&other.agents)
                .all(|(a, b)| a.is_subset(b))
    }
}

/// Parameters for the domain families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainKind {
    Universal,
    /// Single-peaked along `axis` (a permutation of `0..m`, left to right).
    SinglePeaked(Vec<u8>),
    /// Single-dipped along `axis`.
    SingleDipped(Vec<u8>),
    /// Non-conditional closure of a fixed pair set.
    FixedPairs(PairSet),
    /// Alternatives are the agents themselves; `agent` ranks itself first
    /// among everybody (allocation of an indivisible good).
    SelfPreferring(u8),
    /// Juror biased in favour of every member of `favoured` over every member
    /// of `disfavoured`.
    JurorBias { favoured: AltSet, disfavoured: AltSet },
    Explicit(Vec<Ranking>),
}

fn check_axis(axis: &[u8], m: usize) -> Result<Vec<usize>> {
    if axis.len() != m {
        return Err(Error::InvalidParams(format!(
            "axis has {} alternatives, expected {m}",
            axis.len()
        )));
    }
    let r = Ranking::from_order(axis)
        .map_err(|_| Error::InvalidParams("axis must be a permutation".into()))?;
    Ok((0..m as u8).map(|a| r.position(a)).collect())
}

/// `peaked = true`: decreasing away from the top along the axis.
fn is_single_peaked_or_dipped(r: &Ranking, pos: &[usize], peaked: bool) -> bool {
    // the extreme alternative (peak or dip) is first (resp. last) in r
    let order = r.order();
    let s = if peaked { order[0] } else { order[order.len() - 1] };
    let ps = pos[s as usize];
    let m = order.len() as u8;
    for t in 0..m {
        for u in 0..m {
            let (pt, pu) = (pos[t as usize], pos[u as usize]);
            let between = (ps >= pt && pt > pu) || (pu > pt && pt >= ps);
            if between {
                let ok = if peaked { r.prefers(t, u) } else { r.prefers(u, t) };
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

/// Exactly the rankings satisfying the family definition.
pub fn generate_domain(kind: &DomainKind, m: usize) -> Result<PreferenceDomain> {
    let all = all_rankings(m)?;
    match kind {
        DomainKind::Universal => PreferenceDomain::new(m, all),
        DomainKind::SinglePeaked(axis) | DomainKind::SingleDipped(axis) => {
            let pos = check_axis(axis, m)?;
            let peaked = matches!(kind, DomainKind::SinglePeaked(_));
            PreferenceDomain::new(
                m,
                all.into_iter()
                    .filter(|r| is_single_peaked_or_dipped(r, &pos, peaked)),
            )
        }
        DomainKind::FixedPairs(fixed) => nonconditional_closure(*fixed, m),
        DomainKind::SelfPreferring(agent) => {
            if *agent as usize >= m {
                return Err(Error::InvalidParams(format!(
                    "agent {agent} is not an alternative"
                )));
            }
            let fixed = (0..m as u8)
                .filter(|&j| j != *agent)
                .map(|j| OrderedPair::new(*agent, j))
                .collect();
            nonconditional_closure(fixed, m)
        }
        DomainKind::JurorBias {
            favoured,
            disfavoured,
        } => {
            let universe = AltSet::full(m);
            if !favoured.is_subset(universe) || !disfavoured.is_subset(universe) {
                return Err(Error::InvalidParams("bias sets outside the alternatives".into()));
            }
            if favoured.bits() & disfavoured.bits() != 0 {
                return Err(Error::InvalidParams(
                    "favoured and disfavoured sets must be disjoint".into(),
                ));
            }
            let mut fixed = PairSet::EMPTY;
            for a in favoured.iter() {
                for b in disfavoured.iter() {
                    fixed.insert(OrderedPair::new(a, b));
                }
            }
            nonconditional_closure(fixed, m)
        }
        DomainKind::Explicit(rankings) => PreferenceDomain::new(m, rankings.iter().copied()),
    }
}

/// Every distinct non-conditional domain over `0..m` (closures of acyclic
/// fixed-pair sets), in ascending canonical order.
pub fn all_nonconditional_domains(m: usize) -> Result<Vec<PreferenceDomain>> {
    let pairs: Vec<OrderedPair> = PairSet::all(m).iter().collect();
    if pairs.len() > 20 {
        return Err(Error::SizeLimit {
            what: "ordered pairs for fixed-set sweep",
            actual: pairs.len() as u128,
            limit: 20,
        });
    }
    let mut found = BTreeSet::new();
    for bits in 0u32..(1 << pairs.len()) {
        let fixed: PairSet = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, p)| *p)
            .collect();
        if let Ok(d) = nonconditional_closure(fixed, m) {
            found.insert(d.rankings().to_vec());
        }
    }
    Ok(found
        .into_iter()
        .map(|rs| PreferenceDomain::new(m, rs).expect("nonempty"))
        .collect())
}
