//! Uniform deviation estimates and packing numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::ConceptClass;
use crate::error::{Error, Result};
use crate::family::ConceptFamily;
use crate::learning::{proportion_std_error, quantiles};
use crate::limits::WorkLimits;
use crate::measures::DiscreteMeasure;
use crate::pointset::PointSet;
use crate::rng::{derive_rng, RNG_ALGORITHM};
use crate::shattering::binomial;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationEstimate {
    pub n: usize,
    pub trials: usize,
    pub per_trial: Vec<f64>,
    pub mean: f64,
    pub quantiles: Vec<(f64, f64)>,
    pub atom_bound: f64,
    pub n_atom_bound: f64,
    pub rng: &'static str,
}

fn deviation_trials<F: ConceptFamily + ?Sized>(
    family: &F,
    measure: &DiscreteMeasure,
    n: usize,
    trials: usize,
    seed: u64,
    stream: &[u64],
) -> Vec<f64> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut coords = stream.to_vec();
            coords.push(trial as u64);
            let mut rng = derive_rng(seed, "ugc", &coords);
            let empirical = measure.empirical_masses(n, &mut rng);
            family.sup_deviation(measure, &empirical)
        })
        .collect()
}

fn check_inputs<F: ConceptFamily + ?Sized>(family: &F, measure: &DiscreteMeasure, n: usize, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    if measure.len() != family.m() {
        return Err(Error::DomainMismatch { expected: family.m(), found: measure.len() });
    }
    Ok(())
}

/// Per-trial `sup_C |μ(C) − μ_n(C)|` over `σ ~ μ^n`, with the supremum taken
/// exactly over the whole family.
pub fn empirical_sup_deviation<F: ConceptFamily + ?Sized>(
    family: &F,
    measure: &DiscreteMeasure,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<DeviationEstimate> {
    check_inputs(family, measure, n, trials)?;
    let per_trial = deviation_trials(family, measure, n, trials, seed, &[]);
    let mut sorted = per_trial.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(DeviationEstimate {
        n,
        trials,
        mean: per_trial.iter().sum::<f64>() / trials as f64,
        quantiles: quantiles(&sorted),
        per_trial,
        atom_bound: measure.atom_bound(),
        n_atom_bound: n as f64 * measure.atom_bound(),
        rng: RNG_ALGORITHM,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UgcPoint {
    pub n: usize,
    pub epsilon: f64,
    /// Worst case over the measure family of the estimated
    /// `μ^n { sup_C |μ(C) − μ_n(C)| >= ε }`.
    pub probability: f64,
    pub std_error: f64,
    pub worst_measure: usize,
    pub per_measure: Vec<f64>,
    pub trials: usize,
    pub atom_bound: f64,
    pub n_atom_bound: f64,
}

/// Worst-case deviation probability per sample size over a finite measure
/// family. Seeds are derived from `(seed, measure index, grid index, trial)`.
pub fn ugc_curve<F: ConceptFamily + ?Sized>(
    family: &F,
    measures: &[DiscreteMeasure],
    n_grid: &[usize],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<UgcPoint>> {
    if measures.is_empty() {
        return Err(Error::InvalidParameter("measure family is empty".into()));
    }
    let atom_bound = measures.iter().map(DiscreteMeasure::atom_bound).fold(0.0, f64::max);
    let mut curve = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let mut per_measure = Vec::with_capacity(measures.len());
        for (mi, measure) in measures.iter().enumerate() {
            check_inputs(family, measure, n, trials)?;
            let devs = deviation_trials(family, measure, n, trials, seed, &[mi as u64, gi as u64]);
            per_measure.push(devs.iter().filter(|&&d| d >= epsilon).count() as f64 / trials as f64);
        }
        let (worst, &probability) = per_measure
            .iter()
            .enumerate()
            .fold((0, &per_measure[0]), |acc, (i, p)| if *p > *acc.1 { (i, p) } else { acc });
        curve.push(UgcPoint {
            n,
            epsilon,
            probability,
            std_error: proportion_std_error(probability, trials),
            worst_measure: worst,
            per_measure,
            trials,
            atom_bound,
            n_atom_bound: n as f64 * atom_bound,
        });
    }
    Ok(curve)
}

/// Pairs at distance `>= separation − SEPARATION_TOLERANCE` count as separated,
/// so exact lattice distances like `k/d` are not lost to rounding.
pub const SEPARATION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackingMode {
    Exact,
    /// First-fit in class order; a lower bound.
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PackingResult {
    pub size: usize,
    /// Concept indices of the packing.
    pub witness: Vec<usize>,
    pub exact: bool,
    pub nodes: u64,
}

fn distances_from<'a>(class: &'a ConceptClass, measure: &DiscreteMeasure, i: usize) -> impl Iterator<Item = f64> + 'a {
    let a = class.concept(i).clone();
    let w = measure.weights().to_vec();
    class
        .concepts()
        .iter()
        .map(move |b| a.symmetric_difference(b).iter().map(|p| w[p]).sum())
}

/// Largest set of concepts pairwise at `μ`-distance at least `separation`.
pub fn packing_number(
    class: &ConceptClass,
    measure: &DiscreteMeasure,
    separation: f64,
    mode: PackingMode,
    limits: &WorkLimits,
) -> Result<PackingResult> {
    class.ensure_nonempty()?;
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::InvalidParameter(format!("separation must be positive, got {separation}")));
    }
    if measure.len() != class.m() {
        return Err(Error::DomainMismatch { expected: class.m(), found: measure.len() });
    }
    let threshold = separation - SEPARATION_TOLERANCE;
    let w = measure.weights();
    let dist = |i: usize, j: usize| -> f64 {
        class.concept(i).symmetric_difference(class.concept(j)).iter().map(|p| w[p]).sum()
    };
    match mode {
        PackingMode::Greedy => {
            let mut chosen: Vec<usize> = Vec::new();
            for i in 0..class.len() {
                if chosen.iter().all(|&j| dist(i, j) >= threshold) {
                    chosen.push(i);
                }
            }
            Ok(PackingResult { size: chosen.len(), witness: chosen, exact: false, nodes: class.len() as u64 })
        }
        PackingMode::Exact => {
            let k = class.len();
            if (k as u128) * (k as u128) > 64 * limits.packing_nodes as u128 {
                return Err(Error::WorkLimitExceeded { what: "packing graph", limit: limits.packing_nodes });
            }
            let adjacency: Vec<PointSet> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let row: Vec<bool> = distances_from(class, measure, i)
                        .enumerate()
                        .map(|(j, d)| j != i && d >= threshold)
                        .collect();
                    PointSet::from_bools(&row)
                })
                .collect();
            // a greedy clique seeds the bound
            let mut seed: Vec<usize> = Vec::new();
            for (v, row) in adjacency.iter().enumerate() {
                if seed.iter().all(|&u| row.contains(u)) {
                    seed.push(v);
                }
            }
            let mut clique = MaxClique { adjacency: &adjacency, best: seed, nodes: 0, limit: limits.packing_nodes };
            clique.expand(&mut Vec::new(), PointSet::full(k))?;
            let mut witness = clique.best;
            witness.sort_unstable();
            Ok(PackingResult { size: witness.len(), witness, exact: true, nodes: clique.nodes })
        }
    }
}

/// Bitset branch and bound with greedy colouring bounds.
struct MaxClique<'a> {
    adjacency: &'a [PointSet],
    best: Vec<usize>,
    nodes: u64,
    limit: u64,
}

impl MaxClique<'_> {
    /// Greedy sequential colouring; returns the candidates in colour order with
    /// their colour numbers (1-based).
    fn colour(&self, candidates: &PointSet) -> Vec<(usize, usize)> {
        let mut uncoloured = candidates.clone();
        let mut out = Vec::with_capacity(candidates.count());
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut open = uncoloured.clone();
            while let Some(v) = open.first() {
                out.push((v, colour));
                uncoloured.remove(v);
                open.remove(v);
                open = open.difference(&self.adjacency[v]);
            }
        }
        out
    }

    fn expand(&mut self, current: &mut Vec<usize>, mut candidates: PointSet) -> Result<()> {
        let ordered = self.colour(&candidates);
        for &(v, colour) in ordered.iter().rev() {
            if current.len() + colour <= self.best.len() {
                return Ok(());
            }
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::WorkLimitExceeded { what: "exact packing", limit: self.limit });
            }
            current.push(v);
            let next = candidates.intersection(&self.adjacency[v]);
            if next.is_empty() {
                if current.len() > self.best.len() {
                    self.best = current.clone();
                }
            } else {
                self.expand(current, next)?;
            }
            current.pop();
            candidates.remove(v);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingBounds {
    pub d: usize,
    pub epsilon: f64,
    /// `⌊2εd⌋`, the last index of the binomial tail sum.
    pub tail_index: usize,
    pub tail_sum: f64,
    /// `2^d / Σ_{k <= ⌊2εd⌋} C(d, k)`.
    pub combinatorial: f64,
    /// `exp(2 (0.5 − 2ε)² d)`.
    pub chernoff_okamoto: f64,
    pub ordering_holds: bool,
}

/// `⌊2εd⌋`, with a small guard so products like `2·0.05·10` land on 1.
pub fn tail_index(d: usize, epsilon: f64) -> usize {
    (2.0 * epsilon * d as f64 + 1e-9).floor() as usize
}

/// Packing lower bounds for the `2^d` pattern class at separation `2ε`.
pub fn packing_lower_bounds(d: usize, epsilon: f64) -> Result<PackingBounds> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 0.25), got {epsilon}")));
    }
    if d > 1000 {
        return Err(Error::InvalidParameter("d above 1000 is not supported".into()));
    }
    let k = tail_index(d, epsilon).min(d);
    let tail_sum: f64 = (0..=k).map(|j| binomial(d as u64, j as u64) as f64).sum();
    // 2^d and the tail sum are both finite for d <= 1000
    let combinatorial = 2f64.powi(d as i32) / tail_sum;
    let chernoff_okamoto = (2.0 * (0.5 - 2.0 * epsilon).powi(2) * d as f64).exp();
    Ok(PackingBounds {
        d,
        epsilon,
        tail_index: k,
        tail_sum,
        combinatorial,
        chernoff_okamoto,
        ordering_holds: combinatorial >= chernoff_okamoto,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::family::OrderedClass;

    #[test]
    fn trivial_classes_do_not_deviate() {
        let mu = DiscreteMeasure::uniform(5).unwrap();
        for c in [PointSet::empty(5), PointSet::full(5)] {
            let class = ConceptClass::new(Domain::new(5).unwrap(), vec![c]);
            let fam = OrderedClass::natural(&class).unwrap();
            let est = empirical_sup_deviation(&fam, &mu, 7, 20, 1).unwrap();
            assert!(est.per_trial.iter().all(|&d| d.abs() < 1e-12));
        }
    }

    #[test]
    fn single_concept_packing() {
        let class = ConceptClass::new(Domain::new(3).unwrap(), vec![PointSet::full(3)]);
        let mu = DiscreteMeasure::uniform(3).unwrap();
        for mode in [PackingMode::Exact, PackingMode::Greedy] {
            assert_eq!(packing_number(&class, &mu, 0.3, mode, &WorkLimits::default()).unwrap().size, 1);
        }
    }

    #[test]
    fn separation_above_one_admits_no_pair() {
        let class = ConceptClass::new(Domain::new(2).unwrap(), vec![PointSet::empty(2), PointSet::full(2)]);
        let mu = DiscreteMeasure::uniform(2).unwrap();
        let limits = WorkLimits::default();
        assert_eq!(packing_number(&class, &mu, 1.0, PackingMode::Exact, &limits).unwrap().size, 2);
        assert_eq!(packing_number(&class, &mu, 1.5, PackingMode::Exact, &limits).unwrap().size, 1);
        assert!(packing_number(&class, &mu, 0.0, PackingMode::Exact, &limits).is_err());
    }

    #[test]
    fn bound_examples() {
        let b = packing_lower_bounds(3, 0.1).unwrap();
        assert_eq!(b.tail_index, 0);
        assert!((b.combinatorial - 8.0).abs() < 1e-9);
        let b = packing_lower_bounds(10, 0.1).unwrap();
        assert_eq!(b.tail_index, 2);
        // 2 (0.5 - 0.2)^2 10 = 1.8
        assert!((b.chernoff_okamoto - 1.8f64.exp()).abs() < 1e-9);
        // C(10,0) + C(10,1) + C(10,2) = 56
        assert!((b.combinatorial - 1024.0 / 56.0).abs() < 1e-9);
        assert!(b.ordering_holds);
        assert!(packing_lower_bounds(3, 0.25).is_err());
        assert!(packing_lower_bounds(0, 0.1).is_err());
    }

    #[test]
    fn small_epsilon_gives_full_cube() {
        for d in 1..=8 {
            let b = packing_lower_bounds(d, 0.01).unwrap();
            assert!((b.combinatorial - 2f64.powi(d as i32)).abs() < 1e-9);
        }
    }
}
