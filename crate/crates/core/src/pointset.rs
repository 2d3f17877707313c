//! Fixed-length bit vectors over a finite ground set.
//!
//! A [`PointSet`] is a subset of `{0, .., len - 1}` stored as packed `u64`
//! words. Bits at positions `>= len` are always zero, so derived equality and
//! hashing agree with set equality.

use std::fmt;

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet {
    len: usize,
    words: Vec<u64>,
}

/// A concept is a subset of the domain, stored as its membership indicator.
pub type Concept = PointSet;

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

impl PointSet {
    pub fn empty(len: usize) -> Self {
        Self { len, words: vec![0; word_count(len)] }
    }

    pub fn full(len: usize) -> Self {
        let mut set = Self { len, words: vec![!0; word_count(len)] };
        set.clear_tail();
        set
    }

    /// Builds a set from point indices; indices `>= len` are rejected.
    pub fn from_points<I: IntoIterator<Item = usize>>(len: usize, points: I) -> Option<Self> {
        let mut set = Self::empty(len);
        for p in points {
            if p >= len {
                return None;
            }
            set.insert(p);
        }
        Some(set)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut set = Self::empty(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                set.insert(i);
            }
        }
        set
    }

    /// Parses a `0`/`1` string; any other character yields `None`.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let mut set = Self::empty(s.len());
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => set.insert(i),
                _ => return None,
            }
        }
        Some(set)
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, p: usize) -> bool {
        p < self.len && (self.words[p / WORD_BITS] >> (p % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, p: usize) {
        assert!(p < self.len, "point {p} out of range {}", self.len);
        self.words[p / WORD_BITS] |= 1 << (p % WORD_BITS);
    }

    #[inline]
    pub fn remove(&mut self, p: usize) {
        if p < self.len {
            self.words[p / WORD_BITS] &= !(1 << (p % WORD_BITS));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !self.is_disjoint(other)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> Self {
        let mut out = Self { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        out.clear_tail();
        out
    }

    pub fn union_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Iterates over members in increasing order.
    pub fn iter(&self) -> Ones<'_> {
        Ones { words: &self.words, index: 0, current: self.words.first().copied().unwrap_or(0) }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        debug_assert_eq!(self.len, other.len);
        Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl serde::Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

/// Growable bitmask over concept indices, used by the shattering search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct IndexMask {
    words: Vec<u64>,
}

impl IndexMask {
    pub(crate) fn empty(len: usize) -> Self {
        Self { words: vec![0; word_count(len)] }
    }

    pub(crate) fn full(len: usize) -> Self {
        let mut mask = Self { words: vec![!0; word_count(len)] };
        let rem = len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = mask.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
        mask
    }

    pub(crate) fn set(&mut self, i: usize) {
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    pub(crate) fn and(&self, other: &Self) -> Self {
        Self { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub(crate) fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }
}
