//! Restriction maps: describing a preference domain as non-conditional and
//! conditional restrictions of the universal domain, and restricting a
//! conditional domain by an agent's answers on the antecedent pairs.
//!
//! A *non-conditional* restriction `(x, y)` removes every ranking with
//! `y ≻ x`. A *conditional* restriction with antecedent `A` and conclusion
//! `(x, y)` removes every ranking that satisfies all of `A` and has `y ≻ x`.
//!
//! [`classify`] scans a domain in two phases:
//!
//! 1. unordered pairs in ascending id order; a pair fixed in the target
//!    domain is applied as a non-conditional restriction. The scan stops
//!    as soon as the intermediate domain equals the target.
//! 2. while rankings remain to be excluded: take the canonically smallest
//!    excluded ranking `R`, and among antecedents `A ⊆ pairs(R)` and
//!    conclusions `c` (the reverse of a pair `R` orders, on a free pair of
//!    the target) keep the antecedents of minimum size. For each, every
//!    acceptable conclusion `R` violates forms a bundle, reduced by
//!    transitivity. The antecedent with the largest bundle wins, ties going
//!    to the lexicographically smallest. The bundle is applied and the
//!    step repeats.
//!
//! Which `(A, c)` are acceptable is set by [`Criterion`].

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::Serialize;

use crate::domain::PreferenceDomain;
use crate::error::{Error, Result};
use crate::pairs::{OrderedPair, PairSet};
use crate::ranking::{all_rankings, Ranking};

/// A single restriction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    NonConditional(OrderedPair),
    Conditional {
        antecedent: PairSet,
        conclusion: OrderedPair,
    },
}

impl Restriction {
    /// True if the restriction removes `r`.
    pub fn excludes(&self, r: &Ranking) -> bool {
        match *self {
            Restriction::NonConditional(p) => r.prefers(p.bottom, p.top),
            Restriction::Conditional {
                antecedent,
                conclusion,
            } => r.satisfies(antecedent) && r.prefers(conclusion.bottom, conclusion.top),
        }
    }
}

/// Applies one restriction. An empty result is an error.
pub fn apply_restriction(d: &PreferenceDomain, r: Restriction) -> Result<PreferenceDomain> {
    d.filter(|x| !r.excludes(x))
        .ok_or_else(|| Error::Unsatisfiable("restriction removes every ranking".into()))
}

/// Conclusions sharing one antecedent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Conditional {
    pub antecedent: PairSet,
    pub conclusions: PairSet,
}

/// The identifying mapping of a domain: `base` is the image of the empty
/// antecedent, `conditionals` the nonempty antecedents and their images.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RestrictionMap {
    m: usize,
    base: PairSet,
    conditionals: Vec<Conditional>,
}

impl RestrictionMap {
    /// Conditionals with the same antecedent are merged; the list is kept
    /// sorted by antecedent.
    pub fn new(
        m: usize,
        base: PairSet,
        conditionals: impl IntoIterator<Item = (PairSet, PairSet)>,
    ) -> Result<Self> {
        let universe = PairSet::all(m);
        if !base.is_subset(universe) {
            return Err(Error::InvalidMap("base pair outside alternatives".into()));
        }
        let mut merged: BTreeMap<PairSet, PairSet> = BTreeMap::new();
        for (a, c) in conditionals {
            if a.is_empty() {
                return Err(Error::InvalidMap("conditional antecedent is empty".into()));
            }
            if !a.is_subset(universe) || !c.is_subset(universe) {
                return Err(Error::InvalidMap("pair outside alternatives".into()));
            }
            if c.is_empty() {
                continue;
            }
            if c.iter().any(|p| base.contains(p.reversed())) {
                return Err(Error::InvalidMap(
                    "conclusion contradicts a non-conditional restriction".into(),
                ));
            }
            let slot = merged.entry(a).or_default();
            *slot = slot.union(c);
        }
        Ok(RestrictionMap {
            m,
            base,
            conditionals: merged
                .into_iter()
                .map(|(antecedent, conclusions)| Conditional {
                    antecedent,
                    conclusions,
                })
                .collect(),
        })
    }

    pub fn non_conditional(m: usize, base: PairSet) -> Result<Self> {
        Self::new(m, base, [])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn base(&self) -> PairSet {
        self.base
    }

    pub fn conditionals(&self) -> &[Conditional] {
        &self.conditionals
    }

    pub fn is_non_conditional(&self) -> bool {
        self.conditionals.is_empty()
    }

    /// `C(f)`: union of all antecedents.
    pub fn antecedent_pairs(&self) -> PairSet {
        self.conditionals
            .iter()
            .fold(PairSet::EMPTY, |acc, c| acc.union(c.antecedent))
    }

    /// Every restriction, non-conditional first.
    pub fn restrictions(&self) -> impl Iterator<Item = Restriction> + '_ {
        self.base
            .iter()
            .map(Restriction::NonConditional)
            .chain(self.conditionals.iter().flat_map(|c| {
                c.conclusions.iter().map(move |p| Restriction::Conditional {
                    antecedent: c.antecedent,
                    conclusion: p,
                })
            }))
    }

    /// Fixed pairs of the block for answer set `b`:
    /// `f(∅) ∪ B ∪ (C \ B)⁻¹ ∪ ⋃_{D ⊆ B} f(D)`.
    pub fn answer_fixed_pairs(&self, b: AnswerSet) -> PairSet {
        let c = self.antecedent_pairs();
        let mut s = self.base.union(b.0).union(c.difference(b.0).reversed());
        for cond in &self.conditionals {
            if cond.antecedent.is_subset(b.0) {
                s = s.union(cond.conclusions);
            }
        }
        s
    }

    fn relabel(&self, perm: &[u8]) -> RestrictionMap {
        RestrictionMap::new(
            self.m,
            relabel_pairs(self.base, perm),
            self.conditionals.iter().map(|c| {
                (
                    relabel_pairs(c.antecedent, perm),
                    relabel_pairs(c.conclusions, perm),
                )
            }),
        )
        .expect("relabelling preserves validity")
    }
}

/// Universal domain with every restriction of `map` applied.
pub fn rebuild(map: &RestrictionMap) -> Result<PreferenceDomain> {
    let kept: Vec<Ranking> = all_rankings(map.m)?
        .into_iter()
        .filter(|r| map.restrictions().all(|x| !x.excludes(r)))
        .collect();
    if kept.is_empty() {
        return Err(Error::Unsatisfiable(
            "restriction map excludes every ranking".into(),
        ));
    }
    PreferenceDomain::new(map.m, kept)
}

/// Which conditional restrictions may be applied during the second phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    /// No member of the target domain satisfies the antecedent while
    /// violating the conclusion.
    #[default]
    Sound,
    /// Additionally, every ranking of the intermediate domain that satisfies
    /// the antecedent and the conclusion is a member of the target.
    Biconditional,
}

/// Order in which alternatives are scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanPolicy {
    #[default]
    Default,
    /// The default scan run on reversed alternative ids.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassifyOptions {
    pub scan: ScanPolicy,
    pub criterion: Criterion,
}

/// Classifies `d` with the default options.
pub fn classify(d: &PreferenceDomain) -> Result<RestrictionMap> {
    classify_with(d, ClassifyOptions::default())
}

pub fn classify_with(d: &PreferenceDomain, opts: ClassifyOptions) -> Result<RestrictionMap> {
    match opts.scan {
        ScanPolicy::Default => classify_default(d, opts.criterion),
        ScanPolicy::Reversed => {
            let m = d.m();
            let perm: Vec<u8> = (0..m as u8).rev().collect();
            let flipped = relabel_domain(d, &perm);
            // the reversal permutation is its own inverse
            Ok(classify_default(&flipped, opts.criterion)?.relabel(&perm))
        }
    }
}

/// True if `(antecedent, conclusion)` is acceptable at the current step.
pub fn is_admissible(
    target: &PreferenceDomain,
    current: &PreferenceDomain,
    antecedent: PairSet,
    conclusion: OrderedPair,
    criterion: Criterion,
) -> bool {
    let sound = target
        .rankings()
        .iter()
        .filter(|r| r.satisfies(antecedent))
        .all(|r| r.prefers(conclusion.top, conclusion.bottom));
    match criterion {
        Criterion::Sound => sound,
        Criterion::Biconditional => {
            sound
                && current
                    .rankings()
                    .iter()
                    .filter(|r| r.satisfies(antecedent) && r.prefers(conclusion.top, conclusion.bottom))
                    .all(|r| target.contains(r))
        }
    }
}

fn classify_default(d: &PreferenceDomain, criterion: Criterion) -> Result<RestrictionMap> {
    let m = d.m();
    let mut current = PreferenceDomain::universal(m)?;
    let fixed = d.fixed_pairs();
    let mut base = PairSet::EMPTY;

    for pair in PairSet::all_unordered(m) {
        if current.len() == d.len() {
            break;
        }
        let oriented = if fixed.contains(pair) {
            pair
        } else if fixed.contains(pair.reversed()) {
            pair.reversed()
        } else {
            continue;
        };
        base.insert(oriented);
        current = apply_restriction(&current, Restriction::NonConditional(oriented))?;
    }

    let mut conditionals: Vec<(PairSet, PairSet)> = Vec::new();
    // `current` always contains `d`, so equal size means equal
    while current.len() != d.len() {
        let excluded = *current
            .rankings()
            .iter()
            .find(|r| !d.contains(r))
            .expect("intermediate domain strictly contains target");
        let (antecedent, conclusions) = choose_conditional(d, &current, &excluded, criterion)
            .ok_or_else(|| Error::InvalidMap("no admissible antecedent found".into()))?;
        current = current
            .filter(|r| !(r.satisfies(antecedent) && !r.satisfies(conclusions)))
            .ok_or_else(|| Error::InvalidMap("conditional step emptied the domain".into()))?;
        conditionals.push((antecedent, conclusions));
    }

    RestrictionMap::new(m, base, conditionals)
}

/// Picks the antecedent of minimum size; among those, the one with the most
/// non-redundant conclusions; then the lexicographically smallest. All
/// admissible conclusions violated by `excluded` are applied together.
fn choose_conditional(
    target: &PreferenceDomain,
    current: &PreferenceDomain,
    excluded: &Ranking,
    criterion: Criterion,
) -> Option<(PairSet, PairSet)> {
    let candidates: Vec<OrderedPair> = excluded.pairs().iter().collect();
    // reversals of pairs the excluded ranking orders, on free pairs of the target
    let violated: PairSet = candidates
        .iter()
        .filter(|p| target.is_free(p.top, p.bottom))
        .map(|p| p.reversed())
        .collect();
    for k in 1..=candidates.len() {
        let mut best: Option<(PairSet, PairSet)> = None;
        for combo in candidates.iter().copied().combinations(k) {
            let antecedent: PairSet = combo.into_iter().collect();
            let implied = target
                .rankings()
                .iter()
                .filter(|r| r.satisfies(antecedent))
                .fold(PairSet::all(target.m()), |acc, r| acc.intersection(r.pairs()));
            let admissible: PairSet = implied
                .intersection(violated)
                .iter()
                .filter(|&c| {
                    criterion == Criterion::Sound
                        || is_admissible(target, current, antecedent, c, criterion)
                })
                .collect();
            if admissible.is_empty() {
                continue;
            }
            let bundle = transitive_reduction(antecedent, admissible);
            if best.is_none_or(|(_, b)| bundle.len() > b.len()) {
                best = Some((antecedent, bundle));
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Drops conclusions already implied by transitivity of the antecedent and
/// the remaining conclusions. Largest pairs are tried first.
fn transitive_reduction(antecedent: PairSet, conclusions: PairSet) -> PairSet {
    let mut kept = conclusions;
    let mut order: Vec<OrderedPair> = conclusions.iter().collect();
    order.reverse();
    for c in order {
        let rest = kept.difference(PairSet::EMPTY.with(c));
        if kept.len() > 1 && transitive_closure(antecedent.union(rest)).contains(c) {
            kept = rest;
        }
    }
    kept
}

pub(crate) fn transitive_closure(s: PairSet) -> PairSet {
    let mut reach = [0u8; 8];
    for p in s {
        reach[p.top as usize] |= 1 << p.bottom;
    }
    for k in 0..8 {
        for i in 0..8 {
            if reach[i] & (1 << k) != 0 {
                reach[i] |= reach[k];
            }
        }
    }
    let mut out = PairSet::EMPTY;
    for (i, &row) in reach.iter().enumerate() {
        for j in 0..8u8 {
            if row & (1 << j) != 0 && i as u8 != j {
                out.insert(OrderedPair::new(i as u8, j));
            }
        }
    }
    out
}

/// `B`: the antecedent pairs a ranking orders as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct AnswerSet(pub PairSet);

impl AnswerSet {
    pub fn pairs(self) -> PairSet {
        self.0
    }
}

pub fn satisfied_antecedents(r: &Ranking, c: PairSet) -> AnswerSet {
    AnswerSet(c.intersection(r.pairs()))
}

/// Members of `d` answering exactly `b` on `C(map)`; `Ok(None)` when no
/// member does. Fails if `b ⊄ C(map)`.
pub fn restrict_by_answers(
    d: &PreferenceDomain,
    map: &RestrictionMap,
    b: AnswerSet,
) -> Result<Option<PreferenceDomain>> {
    let c = map.antecedent_pairs();
    if !b.0.is_subset(c) {
        return Err(Error::InvalidParams(
            "answer set is not a subset of the antecedent pairs".into(),
        ));
    }
    Ok(d.filter(|r| satisfied_antecedents(r, c) == b))
}

/// Realizable answer sets with their blocks, in ascending answer-set order.
pub fn partition_by_answers(
    d: &PreferenceDomain,
    map: &RestrictionMap,
) -> Result<BTreeMap<AnswerSet, PreferenceDomain>> {
    if map.m() != d.m() || rebuild(map)? != *d {
        return Err(Error::InvalidMap(
            "restriction map does not rebuild the domain".into(),
        ));
    }
    let c = map.antecedent_pairs();
    let mut groups: BTreeMap<AnswerSet, Vec<Ranking>> = BTreeMap::new();
    for r in d.rankings() {
        groups.entry(satisfied_antecedents(r, c)).or_default().push(*r);
    }
    Ok(groups
        .into_iter()
        .map(|(b, rs)| (b, PreferenceDomain::new(d.m(), rs).expect("nonempty block")))
        .collect())
}

fn relabel_pairs(s: PairSet, perm: &[u8]) -> PairSet {
    s.iter()
        .map(|p| OrderedPair::new(perm[p.top as usize], perm[p.bottom as usize]))
        .collect()
}

fn relabel_domain(d: &PreferenceDomain, perm: &[u8]) -> PreferenceDomain {
    PreferenceDomain::new(
        d.m(),
        d.rankings().iter().map(|r| {
            let order: Vec<u8> = r.order().iter().map(|&a| perm[a as usize]).collect();
            Ranking::from_order(&order).expect("relabelled permutation")
        }),
    )
    .expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{generate_domain, nonconditional_closure, DomainKind};

    fn p(a: u8, b: u8) -> OrderedPair {
        OrderedPair::new(a, b)
    }

    fn ps(pairs: &[(u8, u8)]) -> PairSet {
        pairs.iter().map(|&(a, b)| p(a, b)).collect()
    }

    fn dom(orders: &[&[u8]]) -> PreferenceDomain {
        PreferenceDomain::new(
            orders[0].len(),
            orders.iter().map(|o| Ranking::from_order(o).unwrap()),
        )
        .unwrap()
    }

    // v=0 w=1 x=2 y=3 z=4
    const V: u8 = 0;
    const W: u8 = 1;
    const X: u8 = 2;
    const Y: u8 = 3;
    const Z: u8 = 4;

    fn example1_map() -> RestrictionMap {
        RestrictionMap::new(5, PairSet::EMPTY, [(ps(&[(X, Y)]), ps(&[(Z, W), (Z, V)]))]).unwrap()
    }

    fn example2_map() -> RestrictionMap {
        RestrictionMap::new(
            5,
            PairSet::EMPTY,
            [
                (ps(&[(V, W)]), ps(&[(W, X)])),
                (ps(&[(W, X)]), ps(&[(X, Y)])),
                (ps(&[(X, Y)]), ps(&[(Y, Z)])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn apply_restriction_examples() {
        let u = PreferenceDomain::universal(3).unwrap();
        let d = apply_restriction(&u, Restriction::NonConditional(p(0, 2))).unwrap();
        assert_eq!(d, dom(&[&[0, 1, 2], &[0, 2, 1], &[1, 0, 2]]));
        let d = apply_restriction(
            &u,
            Restriction::Conditional {
                antecedent: ps(&[(0, 1)]),
                conclusion: p(1, 2),
            },
        )
        .unwrap();
        assert_eq!(d, dom(&[&[0, 1, 2], &[1, 0, 2], &[1, 2, 0], &[2, 1, 0]]));
        let single = dom(&[&[0, 1, 2]]);
        assert_eq!(
            apply_restriction(&single, Restriction::NonConditional(p(0, 1))).unwrap(),
            single
        );
        assert!(apply_restriction(&single, Restriction::NonConditional(p(1, 0))).is_err());
    }

    #[test]
    fn classify_universal_and_single_peaked() {
        let u = PreferenceDomain::universal(3).unwrap();
        let map = classify(&u).unwrap();
        assert!(map.base().is_empty() && map.is_non_conditional());

        let sp = generate_domain(&DomainKind::SinglePeaked(vec![0, 1, 2]), 3).unwrap();
        let map = classify(&sp).unwrap();
        assert!(map.base().is_empty());
        assert_eq!(
            map.conditionals(),
            &[Conditional {
                antecedent: ps(&[(0, 1)]),
                conclusions: ps(&[(1, 2)])
            }]
        );
        assert_eq!(rebuild(&map).unwrap(), sp);
    }

    #[test]
    fn reversed_scan_gives_the_mirror_map() {
        let sp = generate_domain(&DomainKind::SinglePeaked(vec![0, 1, 2]), 3).unwrap();
        let map = classify_with(
            &sp,
            ClassifyOptions {
                scan: ScanPolicy::Reversed,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            map.conditionals(),
            &[Conditional {
                antecedent: ps(&[(2, 1)]),
                conclusions: ps(&[(1, 0)])
            }]
        );
        assert_eq!(rebuild(&map).unwrap(), sp);
    }

    #[test]
    fn classify_example1_domain() {
        let d = rebuild(&example1_map()).unwrap();
        assert_eq!(d.len(), 80);
        let map = classify(&d).unwrap();
        assert_eq!(map, example1_map());
    }

    #[test]
    fn biconditional_criterion_still_round_trips() {
        let d = rebuild(&example1_map()).unwrap();
        let opts = ClassifyOptions {
            criterion: Criterion::Biconditional,
            ..Default::default()
        };
        let map = classify_with(&d, opts).unwrap();
        assert_eq!(rebuild(&map).unwrap(), d);
        // the shared single antecedent is not reachable under the two-sided test
        assert_ne!(map, example1_map());
    }

    #[test]
    fn rebuild_examples() {
        let m = RestrictionMap::non_conditional(3, ps(&[(0, 2)])).unwrap();
        assert_eq!(rebuild(&m).unwrap(), dom(&[&[0, 1, 2], &[0, 2, 1], &[1, 0, 2]]));
        let sp5 = generate_domain(&DomainKind::SinglePeaked(vec![0, 1, 2, 3, 4]), 5).unwrap();
        assert_eq!(rebuild(&example2_map()).unwrap(), sp5);
        let empty = RestrictionMap::new(3, PairSet::EMPTY, []).unwrap();
        assert_eq!(rebuild(&empty).unwrap().len(), 6);
    }

    #[test]
    fn map_validation() {
        assert!(RestrictionMap::new(3, PairSet::EMPTY, [(PairSet::EMPTY, ps(&[(0, 1)]))]).is_err());
        assert!(RestrictionMap::new(3, ps(&[(0, 1)]), [(ps(&[(1, 2)]), ps(&[(1, 0)]))]).is_err());
        let merged = RestrictionMap::new(
            3,
            PairSet::EMPTY,
            [(ps(&[(0, 1)]), ps(&[(1, 2)])), (ps(&[(0, 1)]), ps(&[(0, 2)]))],
        )
        .unwrap();
        assert_eq!(merged.conditionals().len(), 1);
        assert_eq!(merged.conditionals()[0].conclusions.len(), 2);
    }

    #[test]
    fn satisfied_antecedents_examples() {
        let c = ps(&[(V, W), (W, X), (X, Y)]);
        let r = Ranking::from_order(&[V, W, X, Y, Z]).unwrap();
        assert_eq!(satisfied_antecedents(&r, c).pairs(), c);
        let r = Ranking::from_order(&[W, X, V, Y, Z]).unwrap();
        assert_eq!(satisfied_antecedents(&r, c).pairs(), ps(&[(W, X), (X, Y)]));
        let r = Ranking::from_order(&[Z, Y, X, W, V]).unwrap();
        assert!(satisfied_antecedents(&r, c).pairs().is_empty());
    }

    #[test]
    fn restrict_example1() {
        let map = example1_map();
        let d = rebuild(&map).unwrap();
        let b = AnswerSet(ps(&[(X, Y)]));
        let block = restrict_by_answers(&d, &map, b).unwrap().unwrap();
        assert_eq!(block, nonconditional_closure(ps(&[(X, Y), (Z, W), (Z, V)]), 5).unwrap());
        assert_eq!(block.len(), 20);
        let block = restrict_by_answers(&d, &map, AnswerSet::default()).unwrap().unwrap();
        assert_eq!(block, nonconditional_closure(ps(&[(Y, X)]), 5).unwrap());
        assert!(restrict_by_answers(&d, &map, AnswerSet(ps(&[(Z, W)]))).is_err());
    }

    #[test]
    fn restrict_example2() {
        let map = example2_map();
        let d = rebuild(&map).unwrap();
        let b = AnswerSet(ps(&[(W, X), (X, Y)]));
        let block = restrict_by_answers(&d, &map, b).unwrap().unwrap();
        assert_eq!(
            block,
            nonconditional_closure(ps(&[(W, V), (W, X), (X, Y), (Y, Z)]), 5).unwrap()
        );
        // (v, w) satisfied while (w, x) is not: no single-peaked member answers this
        let none = restrict_by_answers(&d, &map, AnswerSet(ps(&[(V, W)]))).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn partition_examples() {
        let sp = generate_domain(&DomainKind::SinglePeaked(vec![0, 1, 2]), 3).unwrap();
        let map = classify(&sp).unwrap();
        let parts = partition_by_answers(&sp, &map).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&AnswerSet(ps(&[(0, 1)]))], dom(&[&[0, 1, 2]]));
        assert_eq!(
            parts[&AnswerSet::default()],
            dom(&[&[1, 0, 2], &[1, 2, 0], &[2, 1, 0]])
        );

        let map = example2_map();
        let d = rebuild(&map).unwrap();
        let parts = partition_by_answers(&d, &map).unwrap();
        assert_eq!(parts.len(), 4);
        let sizes: Vec<usize> = parts.values().map(PreferenceDomain::len).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 16);

        let u = PreferenceDomain::universal(3).unwrap();
        let parts = partition_by_answers(&u, &classify(&u).unwrap()).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[&AnswerSet::default()], u);

        assert!(partition_by_answers(&u, &example1_map()).is_err());
    }

    #[test]
    fn answer_formula_matches_filter() {
        for map in [example1_map(), example2_map()] {
            let d = rebuild(&map).unwrap();
            for (b, block) in partition_by_answers(&d, &map).unwrap() {
                let closure = nonconditional_closure(map.answer_fixed_pairs(b), 5).unwrap();
                assert_eq!(closure, block);
                assert!(block.is_non_conditional());
            }
        }
    }
}
