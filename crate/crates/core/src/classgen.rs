//! Deterministic concept-class generators.
//!
//! Orders are fixed because the enumeration learner depends on them:
//!
//! - finite/cofinite: `∅`, `Ω`, then by size, then lexicographically by sorted
//!   point indices;
//! - intervals: `∅`, then `[i..j]` by `(i, j)`;
//! - thresholds: `{0..k}` for `k = 0..=m` (so `∅` first, `Ω` last);
//! - power set and patterns: by bitmask value;
//! - random: first occurrences of the generated rows;
//! - cluster-decorated: blown-up base concepts in base order, then the noise
//!   concepts in a seeded order.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::domain::{ConceptClass, Domain};
use crate::error::{Error, Result};
use crate::limits::WorkLimits;
use crate::pointset::PointSet;
use crate::rng::derive_rng;
use crate::shattering::sauer_shelah_bound;

fn subsets_of_size(m: usize, k: usize) -> impl Iterator<Item = PointSet> {
    (0..m).combinations(k).map(move |c| PointSet::from_points(m, c).expect("in range"))
}

/// All sets with at most `t` points or at most `t` missing points, `2t < m`.
/// Meaningful as a stand-in for the finite/cofinite class when `t ≪ m`.
pub fn gen_finite_cofinite(m: usize, t: usize, limits: &WorkLimits) -> Result<ConceptClass> {
    if m == 0 || 2 * t >= m {
        return Err(Error::InvalidParameter(format!("need t < m/2, got m = {m}, t = {t}")));
    }
    let count = sauer_shelah_bound(m, t).saturating_mul(2);
    if count > limits.class_size as u128 {
        return Err(Error::WorkLimitExceeded { what: "finite/cofinite class size", limit: limits.class_size });
    }
    let mut concepts = vec![PointSet::empty(m), PointSet::full(m)];
    for k in (1..=t).chain(m - t..m) {
        concepts.extend(subsets_of_size(m, k));
    }
    Ok(ConceptClass::new(Domain::new(m)?, concepts))
}

/// `∅` and every discrete interval `[i..j]`, `0 <= i <= j < m`.
pub fn gen_intervals(m: usize) -> Result<ConceptClass> {
    if m < 2 {
        return Err(Error::InvalidParameter("intervals need m >= 2".into()));
    }
    let mut concepts = vec![PointSet::empty(m)];
    for i in 0..m {
        for j in i..m {
            concepts.push(PointSet::from_points(m, i..=j).expect("in range"));
        }
    }
    Ok(ConceptClass::new(Domain::new(m)?, concepts))
}

/// Initial segments `{0, .., k-1}` for `k = 0..=m`.
pub fn gen_thresholds(m: usize) -> Result<ConceptClass> {
    let concepts = (0..=m).map(|k| PointSet::from_points(m, 0..k).expect("in range")).collect();
    Ok(ConceptClass::new(Domain::new(m)?, concepts))
}

pub fn gen_power_set(m: usize) -> Result<ConceptClass> {
    if m > 20 {
        return Err(Error::InvalidParameter(format!("power set of {m} points is too large")));
    }
    let concepts = (0..1u32 << m)
        .map(|mask| PointSet::from_points(m, (0..m).filter(|i| mask >> i & 1 == 1)).expect("in range"))
        .collect();
    Ok(ConceptClass::new(Domain::new(m)?, concepts))
}

/// The `2^d` unions of `d` disjoint clusters of `cluster_size` points each;
/// cluster `i` is `i·cluster_size .. (i+1)·cluster_size`.
pub fn gen_patterns(d: usize, cluster_size: usize) -> Result<ConceptClass> {
    if d == 0 || d > 20 || cluster_size == 0 {
        return Err(Error::InvalidParameter(format!("patterns need 1 <= d <= 20 and cluster_size >= 1, got d = {d}")));
    }
    let m = d * cluster_size;
    let concepts = (0..1u32 << d)
        .map(|mask| {
            PointSet::from_points(
                m,
                (0..d).filter(|i| mask >> i & 1 == 1).flat_map(|i| i * cluster_size..(i + 1) * cluster_size),
            )
            .expect("in range")
        })
        .collect();
    Ok(ConceptClass::new(Domain::new(m)?, concepts))
}

/// `count` seeded Bernoulli(`density`) rows, deduplicated in order.
pub fn gen_random(m: usize, count: usize, density: f64, seed: u64) -> Result<ConceptClass> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("density must lie in [0, 1], got {density}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let mut rng = derive_rng(seed, "gen-random", &[m as u64, count as u64]);
    let concepts = (0..count)
        .map(|_| PointSet::from_bools(&(0..m).map(|_| rng.gen_bool(density)).collect::<Vec<_>>()))
        .collect();
    Ok(ConceptClass::new(Domain::new(m)?, concepts).deduplicated())
}

/// Blows every base point up into a cluster of `cluster_size` points and
/// appends `noise` extra points that the output class shatters.
///
/// Base point `i` becomes points `i·cluster_size .. (i+1)·cluster_size`; the
/// noise points come last. Each base concept becomes the union of its
/// clusters. Every nonempty noise pattern is then attached to a single seeded
/// base concept, so noise never combines with the cluster structure: the thick
/// dimension at `cluster_size` stays at the base VC dimension (as long as
/// `noise < 2·cluster_size`), while the classical VC dimension rises to at
/// least `noise`.
pub fn gen_cluster_decorated(
    base: &ConceptClass,
    cluster_size: usize,
    noise: usize,
    seed: u64,
) -> Result<ConceptClass> {
    base.ensure_nonempty()?;
    if cluster_size == 0 {
        return Err(Error::InvalidParameter("cluster_size must be positive".into()));
    }
    if noise > 16 {
        return Err(Error::InvalidParameter(format!("{noise} noise points is too many")));
    }
    let r = base.m();
    let m = r * cluster_size + noise;
    let blow = |c: &PointSet| {
        PointSet::from_points(m, c.iter().flat_map(|i| i * cluster_size..(i + 1) * cluster_size)).expect("in range")
    };
    let mut concepts: Vec<PointSet> = base.concepts().iter().map(blow).collect();
    if noise > 0 {
        let mut rng = derive_rng(seed, "gen-cluster-decorated", &[r as u64, cluster_size as u64, noise as u64]);
        let anchor = rng.gen_range(0..base.len());
        let mut patterns: Vec<u32> = (1..1u32 << noise).collect();
        patterns.shuffle(&mut rng);
        let anchor_set = blow(base.concept(anchor));
        for p in patterns {
            let mut c = anchor_set.clone();
            (0..noise).filter(|i| p >> i & 1 == 1).for_each(|i| c.insert(r * cluster_size + i));
            concepts.push(c);
        }
    }
    Ok(ConceptClass::new(Domain::new(m)?, concepts))
}

/// Serializable generator description shared by the CLI and experiment
/// configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum GenSpec {
    FiniteCofinite { m: usize, t: usize },
    Intervals { m: usize },
    Thresholds { m: usize },
    PowerSet { m: usize },
    Patterns { d: usize, cluster_size: usize },
    Random { m: usize, count: usize, density: f64, seed: u64 },
    ClusterDecorated { base: Box<GenSpec>, cluster_size: usize, noise: usize, seed: u64 },
}

impl GenSpec {
    pub fn generate(&self, limits: &WorkLimits) -> Result<ConceptClass> {
        match self {
            GenSpec::FiniteCofinite { m, t } => gen_finite_cofinite(*m, *t, limits),
            GenSpec::Intervals { m } => gen_intervals(*m),
            GenSpec::Thresholds { m } => gen_thresholds(*m),
            GenSpec::PowerSet { m } => gen_power_set(*m),
            GenSpec::Patterns { d, cluster_size } => gen_patterns(*d, *cluster_size),
            GenSpec::Random { m, count, density, seed } => gen_random(*m, *count, *density, *seed),
            GenSpec::ClusterDecorated { base, cluster_size, noise, seed } => {
                gen_cluster_decorated(&base.generate(limits)?, *cluster_size, *noise, *seed)
            }
        }
    }
}
