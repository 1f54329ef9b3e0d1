//! Ordered pairs of alternatives and bitset-backed pair sets.
//!
//! With at most [`MAX_ALTERNATIVES`] alternatives every ordered pair `(a, b)`
//! maps to bit `a * 8 + b` of a `u64`. A ranking's full pairwise comparison
//! matrix is then a single [`PairSet`], and "ranking satisfies every pair in
//! `A`" is a subset test.

use std::fmt;

use serde::Serialize;

/// Hard cap on the number of alternatives (8! = 40320 rankings).
pub const MAX_ALTERNATIVES: usize = 8;

/// An ordered pair `(top, bottom)` of distinct alternatives, read as
/// "`top` is preferred to `bottom`".
///
/// Unordered pairs use the same type normalized so that `top < bottom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OrderedPair {
    pub top: u8,
    pub bottom: u8,
}

impl OrderedPair {
    /// Panics if `top == bottom` or either id is outside `0..MAX_ALTERNATIVES`.
    pub fn new(top: u8, bottom: u8) -> Self {
        assert!(top != bottom, "ordered pair needs distinct alternatives");
        assert!((top as usize) < MAX_ALTERNATIVES && (bottom as usize) < MAX_ALTERNATIVES);
        OrderedPair { top, bottom }
    }

    pub fn reversed(self) -> Self {
        OrderedPair {
            top: self.bottom,
            bottom: self.top,
        }
    }

    /// The unordered pair underlying `self`, as `(min, max)`.
    pub fn unordered(self) -> Self {
        if self.top < self.bottom {
            self
        } else {
            self.reversed()
        }
    }

    #[inline]
    fn bit(self) -> u64 {
        1u64 << (self.top as u32 * 8 + self.bottom as u32)
    }

    fn from_bit(index: u32) -> Self {
        OrderedPair {
            top: (index / 8) as u8,
            bottom: (index % 8) as u8,
        }
    }
}

impl fmt::Display for OrderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.top, self.bottom)
    }
}

/// A set of ordered pairs.
///
/// Iteration order is ascending `(top, bottom)`, which is also the derived
/// `Ord` of [`OrderedPair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PairSet(u64);

impl PairSet {
    pub const EMPTY: PairSet = PairSet(0);

    pub fn from_bits(bits: u64) -> Self {
        PairSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, p: OrderedPair) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn insert(&mut self, p: OrderedPair) {
        self.0 |= p.bit();
    }

    pub fn remove(&mut self, p: OrderedPair) {
        self.0 &= !p.bit();
    }

    pub fn with(mut self, p: OrderedPair) -> Self {
        self.insert(p);
        self
    }

    #[inline]
    pub fn is_subset(self, other: PairSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: PairSet) -> Self {
        PairSet(self.0 | other.0)
    }

    pub fn intersection(self, other: PairSet) -> Self {
        PairSet(self.0 & other.0)
    }

    pub fn difference(self, other: PairSet) -> Self {
        PairSet(self.0 & !other.0)
    }

    /// Every pair reversed.
    pub fn reversed(self) -> Self {
        self.iter().map(OrderedPair::reversed).collect()
    }

    /// True if some pair appears together with its reverse.
    pub fn has_opposed(self) -> bool {
        self.iter().any(|p| self.contains(p.reversed()))
    }

    pub fn iter(self) -> PairIter {
        PairIter(self.0)
    }

    /// Every ordered pair over `0..m`.
    pub fn all(m: usize) -> Self {
        let mut s = PairSet::EMPTY;
        for a in 0..m as u8 {
            for b in 0..m as u8 {
                if a != b {
                    s.insert(OrderedPair::new(a, b));
                }
            }
        }
        s
    }

    /// Every unordered pair over `0..m`, normalized `top < bottom`.
    pub fn all_unordered(m: usize) -> Self {
        let mut s = PairSet::EMPTY;
        for a in 0..m as u8 {
            for b in a + 1..m as u8 {
                s.insert(OrderedPair::new(a, b));
            }
        }
        s
    }
}

impl FromIterator<OrderedPair> for PairSet {
    fn from_iter<I: IntoIterator<Item = OrderedPair>>(iter: I) -> Self {
        let mut s = PairSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl<'a> FromIterator<&'a OrderedPair> for PairSet {
    fn from_iter<I: IntoIterator<Item = &'a OrderedPair>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl IntoIterator for PairSet {
    type Item = OrderedPair;
    type IntoIter = PairIter;
    fn into_iter(self) -> PairIter {
        self.iter()
    }
}

impl PartialOrd for PairSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on the ascending pair sequence, so `{(0,1)} < {(0,1),(0,2)} < {(0,2)}`.
impl Ord for PairSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl Serialize for PairSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|p| [p.top, p.bottom]))
    }
}

pub struct PairIter(u64);

impl Iterator for PairIter {
    type Item = OrderedPair;

    fn next(&mut self) -> Option<OrderedPair> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(OrderedPair::from_bit(i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for PairIter {}
