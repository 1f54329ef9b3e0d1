//! Alternatives, rankings and small alternative sets.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pairs::{OrderedPair, PairSet, MAX_ALTERNATIVES};

/// Interned alternative labels. Ids are dense `0..m` in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternatives {
    labels: Vec<String>,
    index: HashMap<String, u8>,
}

impl Alternatives {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidParams("no alternatives declared".into()));
        }
        if labels.len() > MAX_ALTERNATIVES {
            return Err(Error::SizeLimit {
                what: "alternative count",
                actual: labels.len() as u128,
                limit: MAX_ALTERNATIVES as u128,
            });
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(Error::InvalidParams(format!("bad alternative label {l:?}")));
            }
            if index.insert(l.clone(), i as u8).is_some() {
                return Err(Error::InvalidParams(format!("duplicate alternative {l:?}")));
            }
        }
        Ok(Alternatives { labels, index })
    }

    /// Single-letter labels `a, b, c, ...`.
    pub fn letters(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| ((b'a' + i as u8) as char).to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: u8) -> &str {
        &self.labels[id as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id(&self, label: &str) -> Option<u8> {
        self.index.get(label).copied()
    }

    /// True when every label is one character, so rankings can be written
    /// as concatenated labels (`xyz`).
    pub fn compact(&self) -> bool {
        self.labels.iter().all(|l| l.chars().count() == 1)
    }

    /// `xyz` when labels are compact, `x y z` otherwise.
    pub fn format_ranking(&self, r: &Ranking) -> String {
        let sep = if self.compact() { "" } else { " " };
        r.order().iter().map(|&a| self.label(a)).join(sep)
    }

    pub fn format_pair(&self, p: OrderedPair) -> String {
        format!("{} > {}", self.label(p.top), self.label(p.bottom))
    }

    pub fn format_pairs(&self, s: PairSet) -> String {
        format!(
            "{{{}}}",
            s.iter()
                .map(|p| format!("({}, {})", self.label(p.top), self.label(p.bottom)))
                .join(", ")
        )
    }

    pub fn format_set(&self, s: AltSet) -> String {
        format!("{{{}}}", s.iter().map(|a| self.label(a)).join(", "))
    }

    /// Parses `xyz` (compact labels) or `x y z`.
    pub fn parse_ranking(&self, text: &str) -> Result<Ranking> {
        let text = text.trim();
        let tokens: Vec<String> = if text.contains(char::is_whitespace) {
            text.split_whitespace().map(str::to_owned).collect()
        } else if self.compact() {
            text.chars().map(|c| c.to_string()).collect()
        } else {
            vec![text.to_owned()]
        };
        let ids = tokens
            .iter()
            .map(|t| {
                self.id(t)
                    .ok_or_else(|| Error::InvalidRanking(format!("unknown alternative {t:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        if ids.len() != self.len() {
            return Err(Error::InvalidRanking(format!(
                "{text:?} ranks {} of {} alternatives",
                ids.len(),
                self.len()
            )));
        }
        Ranking::from_order(&ids)
    }
}

/// A set of alternatives as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct AltSet(u8);

impl AltSet {
    pub const EMPTY: AltSet = AltSet(0);

    pub fn from_bits(bits: u8) -> Self {
        AltSet(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn full(m: usize) -> Self {
        AltSet(((1u16 << m) - 1) as u8)
    }

    pub fn singleton(a: u8) -> Self {
        AltSet(1 << a)
    }

    pub fn contains(self, a: u8) -> bool {
        self.0 & (1 << a) != 0
    }

    pub fn insert(&mut self, a: u8) {
        self.0 |= 1 << a;
    }

    pub fn with(mut self, a: u8) -> Self {
        self.insert(a);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: AltSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = u8> {
        (0..8u8).filter(move |&a| self.contains(a))
    }

    /// Every subset of `0..m` of exactly `k` elements, in ascending bit order.
    pub fn subsets_of_size(m: usize, k: usize) -> impl Iterator<Item = AltSet> {
        (0u16..(1 << m))
            .map(|b| AltSet(b as u8))
            .filter(move |s| s.len() == k)
    }
}

impl FromIterator<u8> for AltSet {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        let mut s = AltSet::EMPTY;
        for a in iter {
            s.insert(a);
        }
        s
    }
}

impl Serialize for AltSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// A strict total order over `0..m`, best first.
///
/// The pairwise matrix (`prefers`) is held as a [`PairSet`]: bit `(a, b)` is
/// set iff `a` is strictly preferred to `b`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: [u8; MAX_ALTERNATIVES],
    len: u8,
    prefers: PairSet,
}

impl Ranking {
    /// Builds a ranking from a best-first permutation of `0..m`.
    pub fn from_order(order: &[u8]) -> Result<Self> {
        let m = order.len();
        if m == 0 || m > MAX_ALTERNATIVES {
            return Err(Error::InvalidRanking(format!(
                "ranking must have 1..={MAX_ALTERNATIVES} alternatives, got {m}"
            )));
        }
        let mut seen = 0u16;
        for &a in order {
            if a as usize >= m || seen & (1 << a) != 0 {
                return Err(Error::InvalidRanking(format!(
                    "{order:?} is not a permutation of 0..{m}"
                )));
            }
            seen |= 1 << a;
        }
        let mut buf = [0u8; MAX_ALTERNATIVES];
        buf[..m].copy_from_slice(order);
        let mut prefers = PairSet::EMPTY;
        for (i, &a) in order.iter().enumerate() {
            for &b in &order[i + 1..] {
                prefers.insert(OrderedPair::new(a, b));
            }
        }
        Ok(Ranking {
            order: buf,
            len: m as u8,
            prefers,
        })
    }

    /// Rebuilds the order from a pairwise matrix. Fails unless the set is a
    /// complete, antisymmetric, transitive relation over `0..m`.
    pub fn from_pairs(prefers: PairSet, m: usize) -> Result<Self> {
        if m == 0 || m > MAX_ALTERNATIVES || !prefers.is_subset(PairSet::all(m)) {
            return Err(Error::InvalidRanking("pair set outside 0..m".into()));
        }
        // wins(a) = number of alternatives a beats; a strict order has wins m-1, ..., 0
        let mut order: Vec<u8> = (0..m as u8).collect();
        let wins = |a: u8| prefers.iter().filter(|p| p.top == a).count();
        order.sort_by_key(|&a| std::cmp::Reverse(wins(a)));
        let r = Ranking::from_order(&order)?;
        if r.prefers != prefers {
            return Err(Error::InvalidRanking(
                "pairwise matrix is not a strict total order".into(),
            ));
        }
        Ok(r)
    }

    pub fn m(&self) -> usize {
        self.len as usize
    }

    pub fn order(&self) -> &[u8] {
        &self.order[..self.len as usize]
    }

    /// Pairwise comparison matrix.
    pub fn pairs(&self) -> PairSet {
        self.prefers
    }

    #[inline]
    pub fn prefers(&self, a: u8, b: u8) -> bool {
        a != b && self.prefers.contains(OrderedPair { top: a, bottom: b })
    }

    /// Weak preference `a R b`.
    #[inline]
    pub fn weakly_prefers(&self, a: u8, b: u8) -> bool {
        a == b || self.prefers(a, b)
    }

    #[inline]
    pub fn satisfies(&self, pairs: PairSet) -> bool {
        pairs.is_subset(self.prefers)
    }

    pub fn position(&self, a: u8) -> usize {
        self.order()
            .iter()
            .position(|&x| x == a)
            .expect("alternative in ranking")
    }

    pub fn top(&self) -> u8 {
        self.order[0]
    }

    /// The best alternative of a nonempty set.
    pub fn best_of(&self, set: AltSet) -> Option<u8> {
        self.order().iter().copied().find(|&a| set.contains(a))
    }

    /// Complete, antisymmetric and transitive, checked on the pair matrix.
    pub fn is_strict_order(&self) -> bool {
        let m = self.m() as u8;
        for a in 0..m {
            if self.prefers(a, a) {
                return false;
            }
            for b in 0..m {
                if a == b {
                    continue;
                }
                if self.prefers(a, b) == self.prefers(b, a) {
                    return false;
                }
                for c in 0..m {
                    if self.prefers(a, b) && self.prefers(b, c) && a != c && !self.prefers(a, c) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl Ord for Ranking {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(other.order())
    }
}

impl PartialOrd for Ranking {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ranking{:?}", self.order())
    }
}

/// All `m!` rankings over `0..m` in canonical (lexicographic) order.
pub fn all_rankings(m: usize) -> Result<Vec<Ranking>> {
    if m == 0 || m > MAX_ALTERNATIVES {
        return Err(Error::SizeLimit {
            what: "alternative count",
            actual: m as u128,
            limit: MAX_ALTERNATIVES as u128,
        });
    }
    Ok((0..m as u8)
        .permutations(m)
        .map(|p| Ranking::from_order(&p).expect("permutation"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_counts() {
        assert_eq!(all_rankings(1).unwrap().len(), 1);
        assert_eq!(all_rankings(3).unwrap().len(), 6);
        assert_eq!(all_rankings(5).unwrap().len(), 120);
        assert!(all_rankings(0).unwrap_err().is_size_limit());
        assert!(all_rankings(9).unwrap_err().is_size_limit());
    }

    #[test]
    fn canonical_order_is_sorted_and_matrices_valid() {
        let rs = all_rankings(4).unwrap();
        assert!(rs.windows(2).all(|w| w[0] < w[1]));
        for r in &rs {
            assert!(r.is_strict_order());
            assert_eq!(Ranking::from_pairs(r.pairs(), 4).unwrap(), *r);
            for (i, &a) in r.order().iter().enumerate() {
                for &b in &r.order()[i + 1..] {
                    assert!(r.prefers(a, b) && !r.prefers(b, a));
                }
            }
        }
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Ranking::from_order(&[0, 0, 1]).is_err());
        assert!(Ranking::from_order(&[0, 3, 1]).is_err());
        let cyclic = PairSet::from_iter([
            OrderedPair::new(0, 1),
            OrderedPair::new(1, 2),
            OrderedPair::new(2, 0),
        ]);
        assert!(Ranking::from_pairs(cyclic, 3).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let alts = Alternatives::new(["x", "y", "z"]).unwrap();
        let r = alts.parse_ranking("yzx").unwrap();
        assert_eq!(r.order(), &[1, 2, 0]);
        assert_eq!(alts.format_ranking(&r), "yzx");
        assert_eq!(alts.parse_ranking("y z x").unwrap(), r);
        assert!(alts.parse_ranking("yz").is_err());
        assert!(Alternatives::new(["x", "x"]).is_err());

        let long = Alternatives::new(["ann", "bob"]).unwrap();
        let r = long.parse_ranking("bob ann").unwrap();
        assert_eq!(long.format_ranking(&r), "bob ann");
    }

    #[test]
    fn best_of_set() {
        let r = Ranking::from_order(&[2, 0, 1]).unwrap();
        assert_eq!(r.best_of(AltSet::from_iter([0, 1])), Some(0));
        assert_eq!(r.best_of(AltSet::full(3)), Some(2));
        assert_eq!(r.best_of(AltSet::EMPTY), None);
    }
}
