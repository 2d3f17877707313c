//! Concept families as seen by learners and deviation estimators.
//!
//! [`ConceptFamily`] abstracts the three queries the simulations need: the
//! first consistent concept in enumeration order, the consistent concept
//! farthest from a target, and the exact supremum of `|μ(C) − μ_n(C)|`.
//! Extensional classes answer them by full scans. The finite/cofinite family
//! is answered in closed form so it can be used at sizes where listing its
//! concepts is impossible (already ~1.6·10^13 concepts at `m = 1000, t = 5`).

use std::cmp::Ordering;

use crate::domain::ConceptClass;
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::pointset::{Concept, PointSet};
use crate::shattering::binomial;

/// A learned concept, with its class index when the family is extensional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub concept: Concept,
    pub index: Option<usize>,
}

pub trait ConceptFamily: Sync {
    fn m(&self) -> usize;

    /// The first concept in enumeration order containing `positives` and
    /// missing `negatives`.
    fn first_consistent(&self, positives: &PointSet, negatives: &PointSet) -> Option<Hypothesis>;

    /// A consistent concept maximizing `μ(C △ target)`.
    fn farthest_consistent(
        &self,
        positives: &PointSet,
        negatives: &PointSet,
        target: &Concept,
        measure: &DiscreteMeasure,
    ) -> Option<Hypothesis>;

    /// `sup_C |μ(C) − ν(C)|` where `ν` has per-point masses `empirical`.
    fn sup_deviation(&self, measure: &DiscreteMeasure, empirical: &[f64]) -> f64;

    fn describe(&self) -> String;
}

fn consistent(c: &Concept, positives: &PointSet, negatives: &PointSet) -> bool {
    positives.is_subset(c) && c.is_disjoint(negatives)
}

fn deltas(measure: &DiscreteMeasure, empirical: &[f64]) -> Vec<f64> {
    empirical.iter().zip(measure.weights()).map(|(e, w)| e - w).collect()
}

/// An extensional class with an explicit enumeration order (a permutation of
/// concept indices).
#[derive(Clone, Debug)]
pub struct OrderedClass<'a> {
    class: &'a ConceptClass,
    order: Vec<usize>,
}

impl<'a> OrderedClass<'a> {
    pub fn new(class: &'a ConceptClass, order: Vec<usize>) -> Result<Self> {
        class.ensure_nonempty()?;
        let mut seen = vec![false; class.len()];
        if order.len() != class.len() {
            return Err(Error::InvalidParameter(format!(
                "order has {} entries for {} concepts",
                order.len(),
                class.len()
            )));
        }
        for &i in &order {
            if i >= class.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter("order is not a permutation".into()));
            }
        }
        Ok(Self { class, order })
    }

    /// File order.
    pub fn natural(class: &'a ConceptClass) -> Result<Self> {
        Self::new(class, (0..class.len()).collect())
    }

    pub fn class(&self) -> &ConceptClass {
        self.class
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of each concept index in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (rank, &i) in self.order.iter().enumerate() {
            pos[i] = rank;
        }
        pos
    }
}

impl ConceptFamily for OrderedClass<'_> {
    fn m(&self) -> usize {
        self.class.m()
    }

    fn first_consistent(&self, positives: &PointSet, negatives: &PointSet) -> Option<Hypothesis> {
        self.order
            .iter()
            .copied()
            .find(|&i| consistent(self.class.concept(i), positives, negatives))
            .map(|i| Hypothesis { concept: self.class.concept(i).clone(), index: Some(i) })
    }

    fn farthest_consistent(
        &self,
        positives: &PointSet,
        negatives: &PointSet,
        target: &Concept,
        measure: &DiscreteMeasure,
    ) -> Option<Hypothesis> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.class.concepts().iter().enumerate() {
            if !consistent(c, positives, negatives) {
                continue;
            }
            let d = measure.measure_of(&c.symmetric_difference(target));
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| Hypothesis { concept: self.class.concept(i).clone(), index: Some(i) })
    }

    fn sup_deviation(&self, measure: &DiscreteMeasure, empirical: &[f64]) -> f64 {
        let delta = deltas(measure, empirical);
        self.class
            .concepts()
            .iter()
            .map(|c| c.iter().map(|p| delta[p]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    fn describe(&self) -> String {
        format!("extensional class, m = {}, {} concepts", self.class.m(), self.class.len())
    }
}

/// All subsets of `0..m` with at most `t` points and all with at most `t`
/// points missing, `2t < m`. Enumeration order: `∅`, `Ω`, then by size, then
/// lexicographically by sorted point indices (the order of
/// [`crate::classgen::gen_finite_cofinite`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteCofinite {
    m: usize,
    t: usize,
}

impl FiniteCofinite {
    pub fn new(m: usize, t: usize) -> Result<Self> {
        if m == 0 || 2 * t >= m {
            return Err(Error::InvalidParameter(format!("finite/cofinite class needs 0 <= t < m/2, got m = {m}, t = {t}")));
        }
        Ok(Self { m, t })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of concepts, `2 Σ_{k ≤ t} C(m, k)` (saturating).
    pub fn count(&self) -> u128 {
        crate::shattering::sauer_shelah_bound(self.m, self.t).saturating_mul(2)
    }

    pub fn contains(&self, c: &Concept) -> bool {
        c.len() == self.m && (c.count() <= self.t || c.count() >= self.m - self.t)
    }

    /// Position of `c` in the enumeration order, when it fits in `u128`.
    pub fn index_of(&self, c: &Concept) -> Option<u128> {
        if !self.contains(c) {
            return None;
        }
        let k = c.count();
        if k == 0 {
            return Some(0);
        }
        if k == self.m {
            return Some(1);
        }
        let mut offset: u128 = 2;
        let sizes: Vec<usize> = (1..=self.t).chain(self.m - self.t..self.m).collect();
        for s in sizes {
            if s == k {
                return offset.checked_add(lex_rank(self.m, &c.to_vec()));
            }
            offset = offset.checked_add(binomial(self.m as u64, s as u64))?;
        }
        None
    }

    /// Free points sorted by weight (descending), ties by index (ascending).
    fn by_weight(free: &[usize], measure: &DiscreteMeasure) -> Vec<usize> {
        let w = measure.weights();
        let mut v = free.to_vec();
        v.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        v
    }
}

/// Lexicographic rank of a sorted combination among all `k`-subsets of `0..m`.
fn lex_rank(m: usize, combo: &[usize]) -> u128 {
    let k = combo.len();
    let mut rank: u128 = 0;
    let mut prev = 0usize;
    for (i, &c) in combo.iter().enumerate() {
        for v in prev..c {
            rank = rank.saturating_add(binomial((m - 1 - v) as u64, (k - 1 - i) as u64));
        }
        prev = c + 1;
    }
    rank
}

impl ConceptFamily for FiniteCofinite {
    fn m(&self) -> usize {
        self.m
    }

    fn first_consistent(&self, positives: &PointSet, negatives: &PointSet) -> Option<Hypothesis> {
        if positives.intersects(negatives) {
            return None;
        }
        let m = self.m;
        if positives.is_empty() {
            return Some(Hypothesis { concept: PointSet::empty(m), index: None });
        }
        if negatives.is_empty() {
            return Some(Hypothesis { concept: PointSet::full(m), index: None });
        }
        // Finite concepts precede cofinite ones; the smallest consistent finite
        // set is the positive set itself.
        if positives.count() <= self.t {
            return Some(Hypothesis { concept: positives.clone(), index: None });
        }
        // Cofinite Ω∖R with R ⊇ negatives, R ∩ positives = ∅, |R| <= t. Smaller
        // sets come first, so R is as large as possible, and the lex-least set
        // of that size leaves out the largest free points.
        let q = negatives.count();
        if q > self.t {
            return None;
        }
        let labelled = positives.union(negatives);
        let extra = self.t - q;
        let mut removed = negatives.clone();
        for p in (0..m).rev().filter(|&p| !labelled.contains(p)).take(extra) {
            removed.insert(p);
        }
        Some(Hypothesis { concept: removed.complement(), index: None })
    }

    fn farthest_consistent(
        &self,
        positives: &PointSet,
        negatives: &PointSet,
        target: &Concept,
        measure: &DiscreteMeasure,
    ) -> Option<Hypothesis> {
        if positives.intersects(negatives) {
            return None;
        }
        let w = measure.weights();
        let labelled = positives.union(negatives);
        let free: Vec<usize> = (0..self.m).filter(|&p| !labelled.contains(p)).collect();

        // Finite candidate: grow the positives with heavy points outside the
        // target. Cofinite candidate: drop heavy target points besides the
        // negatives.
        let finite = (positives.count() <= self.t).then(|| {
            let room = self.t - positives.count();
            let gain: Vec<usize> = Self::by_weight(&free, measure)
                .into_iter()
                .filter(|&p| !target.contains(p) && w[p] > 0.0)
                .take(room)
                .collect();
            let mut c = positives.clone();
            gain.into_iter().for_each(|p| c.insert(p));
            c
        });
        let cofinite = (negatives.count() <= self.t).then(|| {
            let room = self.t - negatives.count();
            let gain: Vec<usize> = Self::by_weight(&free, measure)
                .into_iter()
                .filter(|&p| target.contains(p) && w[p] > 0.0)
                .take(room)
                .collect();
            let mut r = negatives.clone();
            gain.into_iter().for_each(|p| r.insert(p));
            r.complement()
        });
        let score = |c: &Concept| measure.measure_of(&c.symmetric_difference(target));
        let best = match (finite, cofinite) {
            (Some(f), Some(c)) => {
                if score(&c) > score(&f) {
                    c
                } else {
                    f
                }
            }
            (Some(f), None) => f,
            (None, Some(c)) => c,
            (None, None) => return None,
        };
        Some(Hypothesis { concept: best, index: None })
    }

    fn sup_deviation(&self, measure: &DiscreteMeasure, empirical: &[f64]) -> f64 {
        // For a cofinite C = Ω∖R, μ(C) − ν(C) = ν(R) − μ(R), so the supremum is
        // attained by some set of at most t points either way.
        let mut delta = deltas(measure, empirical);
        delta.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        let up: f64 = delta.iter().take(self.t).filter(|d| **d > 0.0).sum();
        let down: f64 = delta.iter().rev().take(self.t).filter(|d| **d < 0.0).sum();
        up.max(-down)
    }

    fn describe(&self) -> String {
        format!("finite/cofinite family, m = {}, t = {}", self.m, self.t)
    }
}
