//! Discrete probability measures with a recorded atom bound.
//!
//! No measure on a finite set is non-atomic. A family whose members all have
//! atom bound `<= α` is treated as non-atomic at level `α`, and every report
//! carries `n · atom_bound` so the reader can judge how faithful that is at
//! sample size `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::{Concept, PointSet};
use crate::rng::derive_rng;

/// Simplex tolerance after construction.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Inputs whose total is within this of 1 are renormalized.
pub const NORMALIZE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
    atom_bound: f64,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no weights".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {i} is {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZE_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let weights: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        let atom_bound = weights.iter().copied().fold(0.0, f64::max);
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let measure = Self { weights, atom_bound, cdf };
        debug_assert!((measure.total() - 1.0).abs() <= WEIGHT_TOLERANCE);
        Ok(measure)
    }

    /// Equal mass on `support`, zero elsewhere.
    pub fn uniform_on(support: &PointSet) -> Result<Self> {
        let k = support.count();
        if k == 0 {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let w = 1.0 / k as f64;
        Self::new((0..support.len()).map(|p| if support.contains(p) { w } else { 0.0 }).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::uniform_on(&PointSet::full(m))
    }

    pub fn point_mass(m: usize, p: usize) -> Result<Self> {
        if p >= m {
            return Err(Error::PointOutOfRange { point: p, size: m });
        }
        Self::uniform_on(&PointSet::from_points(m, [p]).expect("in range"))
    }

    /// Pointwise convex combination.
    pub fn mixture(measures: &[DiscreteMeasure], coefficients: &[f64]) -> Result<Self> {
        if measures.is_empty() || measures.len() != coefficients.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} measures with {} coefficients",
                measures.len(),
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidMeasure("coefficients must be nonnegative".into()));
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("coefficients sum to {total}, not 1")));
        }
        let m = measures[0].len();
        if let Some(bad) = measures.iter().find(|mu| mu.len() != m) {
            return Err(Error::DomainMismatch { expected: m, found: bad.len() });
        }
        let weights = (0..m)
            .map(|p| measures.iter().zip(coefficients).map(|(mu, c)| c * mu.weights[p]).sum())
            .collect();
        Self::new(weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest point mass.
    pub fn atom_bound(&self) -> f64 {
        self.atom_bound
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support(&self) -> PointSet {
        PointSet::from_bools(&self.weights.iter().map(|&w| w > 0.0).collect::<Vec<_>>())
    }

    pub fn measure_of(&self, set: &PointSet) -> f64 {
        set.iter().map(|p| self.weights[p]).sum()
    }

    /// `μ(A △ B)`.
    pub fn symdiff_distance(&self, a: &Concept, b: &Concept) -> Result<f64> {
        for set in [a, b] {
            if set.len() != self.len() {
                return Err(Error::DomainMismatch { expected: self.len(), found: set.len() });
            }
        }
        Ok(self.measure_of(&a.symmetric_difference(b)))
    }

    /// Inverse-CDF draw from a uniform variate in `[0, 1)`. Never returns a
    /// zero-weight point.
    pub(crate) fn quantile(&self, u: f64) -> usize {
        let i = self.cdf.partition_point(|&c| c <= u);
        if i < self.len() {
            i
        } else {
            self.weights.iter().rposition(|&w| w > 0.0).expect("positive total mass")
        }
    }

    pub fn sample_with(&self, n: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
        (0..n).map(|_| self.quantile(rng.gen::<f64>())).collect()
    }

    /// Per-point empirical masses of `n` i.i.d. draws (all zero when `n = 0`).
    pub fn empirical_masses(&self, n: usize, rng: &mut impl rand::Rng) -> Vec<f64> {
        let mut counts = vec![0u64; self.len()];
        for _ in 0..n {
            counts[self.quantile(rng.gen::<f64>())] += 1;
        }
        let scale = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        counts.into_iter().map(|c| c as f64 * scale).collect()
    }

    /// `n` i.i.d. draws on the stream `("sample", seed)`.
    pub fn sample_iid(&self, n: usize, seed: u64) -> SampleSeq {
        let mut rng = derive_rng(seed, "sample", &[]);
        SampleSeq { points: self.sample_with(n, &mut rng), seed }
    }
}

/// An ordered sample of point indices with repetition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSeq {
    pub points: Vec<usize>,
    pub seed: u64,
}

/// Serializable description of a measure, used in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Explicit weights.
    Weights(Vec<f64>),
    /// Uniform on the listed points, or on the whole domain when absent.
    Uniform {
        #[serde(default)]
        support: Option<Vec<usize>>,
    },
    /// Uniform on the points `start..end`.
    UniformRange { start: usize, end: usize },
    Mixture { components: Vec<MeasureSpec>, coefficients: Vec<f64> },
}

impl MeasureSpec {
    pub fn build(&self, m: usize) -> Result<DiscreteMeasure> {
        let measure = match self {
            MeasureSpec::Weights(w) => DiscreteMeasure::new(w.clone())?,
            MeasureSpec::Uniform { support: None } => DiscreteMeasure::uniform(m)?,
            MeasureSpec::Uniform { support: Some(points) } => {
                let set = PointSet::from_points(m, points.iter().copied()).ok_or_else(|| {
                    Error::InvalidMeasure(format!("support point outside domain of size {m}"))
                })?;
                DiscreteMeasure::uniform_on(&set)?
            }
            MeasureSpec::UniformRange { start, end } => {
                if start >= end || *end > m {
                    return Err(Error::InvalidMeasure(format!("bad range {start}..{end} for m = {m}")));
                }
                DiscreteMeasure::uniform_on(&PointSet::from_points(m, *start..*end).expect("in range"))?
            }
            MeasureSpec::Mixture { components, coefficients } => {
                let built = components.iter().map(|c| c.build(m)).collect::<Result<Vec<_>>>()?;
                DiscreteMeasure::mixture(&built, coefficients)?
            }
        };
        if measure.len() != m {
            return Err(Error::DomainMismatch { expected: m, found: measure.len() });
        }
        Ok(measure)
    }
}
