//! Consistent learning rules, Monte Carlo PAC error estimation and the
//! standard sample-complexity bound.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::ConceptClass;
use crate::error::{Error, Result};
use crate::family::{ConceptFamily, Hypothesis, OrderedClass};
use crate::limits::WorkLimits;
use crate::measures::{DiscreteMeasure, SampleSeq};
use crate::pointset::{Concept, PointSet};
use crate::rng::{derive_rng, RNG_ALGORITHM};

/// A sample `σ` together with the labels `τ = C ∩ σ` as indicators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub points: SampleSeq,
    pub labels: Vec<bool>,
}

impl LabeledSample {
    pub fn new(points: SampleSeq, labels: Vec<bool>) -> Result<Self> {
        if points.points.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points with {} labels",
                points.points.len(),
                labels.len()
            )));
        }
        Ok(Self { points, labels })
    }

    /// Labels `points` by membership in `target`.
    pub fn from_target(points: SampleSeq, target: &Concept) -> Self {
        let labels = points.points.iter().map(|&p| target.contains(p)).collect();
        Self { points, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Positive and negative point sets. Conflicting labels on a repeated
    /// point make both sets share that point.
    pub fn split(&self, m: usize) -> Result<(PointSet, PointSet)> {
        let mut pos = PointSet::empty(m);
        let mut neg = PointSet::empty(m);
        for (&p, &y) in self.points.points.iter().zip(&self.labels) {
            if p >= m {
                return Err(Error::PointOutOfRange { point: p, size: m });
            }
            if y {
                pos.insert(p);
            } else {
                neg.insert(p);
            }
        }
        Ok((pos, neg))
    }
}

/// `C ∩ σ = τ`.
pub fn is_consistent(concept: &Concept, sample: &LabeledSample) -> bool {
    sample.points.points.iter().zip(&sample.labels).all(|(&p, &y)| concept.contains(p) == y)
}

/// The order-least concept consistent with the sample.
pub fn enumeration_learner(class: &ConceptClass, order: &[usize], sample: &LabeledSample) -> Result<usize> {
    let family = OrderedClass::new(class, order.to_vec())?;
    let (pos, neg) = sample.split(class.m())?;
    family
        .first_consistent(&pos, &neg)
        .and_then(|h| h.index)
        .ok_or(Error::NoConsistentHypothesis)
}

/// White-box adversary: among consistent concepts, one farthest from the
/// target under `measure`, ties to the least index. It sees the target and the
/// measure, so it witnesses failure of consistent learnability rather than
/// being a legal learning rule.
pub fn adversarial_consistent_learner(
    class: &ConceptClass,
    sample: &LabeledSample,
    target: &Concept,
    measure: &DiscreteMeasure,
) -> Result<usize> {
    let family = OrderedClass::natural(class)?;
    let (pos, neg) = sample.split(class.m())?;
    family
        .farthest_consistent(&pos, &neg, target, measure)
        .and_then(|h| h.index)
        .ok_or(Error::NoConsistentHypothesis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Enumeration,
    Adversarial,
}

/// Learner configuration as it appears in experiment configs. `order` is a
/// permutation of class indices for the enumeration learner (file order when
/// absent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InconsistencyPolicy {
    /// Abort with [`Error::NoConsistentHypothesis`].
    #[default]
    Error,
    /// Count the trial as error 1 and flag it.
    CountAsFullError,
}

pub fn learn<F: ConceptFamily + ?Sized>(
    family: &F,
    kind: LearnerKind,
    sample: &LabeledSample,
    target: &Concept,
    measure: &DiscreteMeasure,
) -> Result<Option<Hypothesis>> {
    let (pos, neg) = sample.split(family.m())?;
    Ok(match kind {
        LearnerKind::Enumeration => family.first_consistent(&pos, &neg),
        LearnerKind::Adversarial => family.farthest_consistent(&pos, &neg, target, measure),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LearnerImage {
    pub indices: BTreeSet<usize>,
    /// Order positions of the image members.
    pub positions: BTreeSet<usize>,
    pub target_position: usize,
    pub exhaustive: bool,
    pub sequences: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageMode {
    /// All of `Ω^n`.
    Exhaustive,
    /// `samples` uniform draws from `Ω^n` (flagged as non-exhaustive).
    Sampled { samples: u64, seed: u64 },
}

/// `{ L(σ, target ∩ σ) : σ ∈ Ω^n }` for the enumeration learner.
pub fn learner_image(
    class: &ConceptClass,
    order: &[usize],
    target: usize,
    n: usize,
    mode: ImageMode,
    limits: &WorkLimits,
) -> Result<LearnerImage> {
    let family = OrderedClass::new(class, order.to_vec())?;
    if target >= class.len() {
        return Err(Error::InvalidParameter(format!("target index {target} out of range")));
    }
    let m = class.m();
    let target_set = class.concept(target);
    let learn_on = |points: Vec<usize>| -> Result<usize> {
        let sample = LabeledSample::from_target(SampleSeq { points, seed: 0 }, target_set);
        let (pos, neg) = sample.split(m)?;
        let h = family.first_consistent(&pos, &neg).ok_or(Error::NoConsistentHypothesis)?;
        assert!(is_consistent(&h.concept, &sample), "enumeration learner returned an inconsistent concept");
        Ok(h.index.expect("extensional"))
    };
    let (indices, exhaustive, sequences) = match mode {
        ImageMode::Exhaustive => {
            let total = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if total > limits.image_sequences as u128 {
                return Err(Error::WorkLimitExceeded { what: "learner image enumeration", limit: limits.image_sequences });
            }
            let total = total as u64;
            let found: Vec<usize> = (0..total)
                .into_par_iter()
                .map(|code| {
                    let mut c = code;
                    let points = (0..n)
                        .map(|_| {
                            let p = (c % m as u64) as usize;
                            c /= m as u64;
                            p
                        })
                        .collect();
                    learn_on(points)
                })
                .collect::<Result<_>>()?;
            (found.into_iter().collect::<BTreeSet<_>>(), true, total)
        }
        ImageMode::Sampled { samples, seed } => {
            let found: Vec<usize> = (0..samples)
                .into_par_iter()
                .map(|s| {
                    use rand::Rng as _;
                    let mut rng = derive_rng(seed, "image", &[s]);
                    learn_on((0..n).map(|_| rng.gen_range(0..m)).collect())
                })
                .collect::<Result<_>>()?;
            (found.into_iter().collect(), false, samples)
        }
    };
    let pos = family.positions();
    Ok(LearnerImage {
        positions: indices.iter().map(|&i| pos[i]).collect(),
        indices,
        target_position: pos[target],
        exhaustive,
        sequences,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub policy: InconsistencyPolicy,
    /// Extra seed coordinates, e.g. grid indices, prefixed to the trial index.
    #[serde(default)]
    pub stream: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceedanceEstimate {
    pub epsilon: f64,
    /// Fraction of trials with `μ(L △ C) > ε`.
    pub fraction: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PacEstimate {
    pub n: usize,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub max_error: f64,
    /// `(p, q)`: the empirical `p`-quantile of the error is `q`.
    pub error_quantiles: Vec<(f64, f64)>,
    pub exceedance: Vec<ExceedanceEstimate>,
    pub inconsistent_trials: usize,
    pub learner_invocations: u64,
    pub atom_bound: f64,
    pub n_atom_bound: f64,
    pub rng: &'static str,
}

pub const QUANTILE_LEVELS: [f64; 7] = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];

/// Standard error of a Bernoulli proportion (normal approximation).
pub fn proportion_std_error(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

pub(crate) fn quantiles(sorted: &[f64]) -> Vec<(f64, f64)> {
    QUANTILE_LEVELS
        .iter()
        .map(|&p| {
            let i = ((p * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1);
            (p, sorted[i])
        })
        .collect()
}

/// Monte Carlo estimate of the distribution of `μ(L(σ, C ∩ σ) △ C)` over
/// `σ ~ μ^n`. Every learned concept is checked for consistency with its
/// sample; a violation is a bug and panics.
pub fn pac_error_estimate<F: ConceptFamily + ?Sized>(
    family: &F,
    kind: LearnerKind,
    target: &Concept,
    measure: &DiscreteMeasure,
    config: &PacConfig,
) -> Result<PacEstimate> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let m = family.m();
    for set in [target.len(), measure.len()] {
        if set != m {
            return Err(Error::DomainMismatch { expected: m, found: set });
        }
    }
    let outcomes: Vec<(f64, bool)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut coords = config.stream.clone();
            coords.push(trial as u64);
            let mut rng = derive_rng(config.seed, "pac", &coords);
            let points = measure.sample_with(config.n, &mut rng);
            let sample = LabeledSample::from_target(SampleSeq { points, seed: config.seed }, target);
            match learn(family, kind, &sample, target, measure)? {
                Some(h) => {
                    assert!(is_consistent(&h.concept, &sample), "learner returned an inconsistent concept");
                    Ok((measure.measure_of(&h.concept.symmetric_difference(target)), false))
                }
                None => match config.policy {
                    InconsistencyPolicy::Error => Err(Error::NoConsistentHypothesis),
                    InconsistencyPolicy::CountAsFullError => Ok((1.0, true)),
                },
            }
        })
        .collect::<Result<_>>()?;

    let trials = outcomes.len();
    let errors: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let mean = errors.iter().sum::<f64>() / trials as f64;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let exceedance = config
        .epsilons
        .iter()
        .map(|&eps| {
            let fraction = errors.iter().filter(|&&e| e > eps).count() as f64 / trials as f64;
            ExceedanceEstimate { epsilon: eps, fraction, std_error: proportion_std_error(fraction, trials) }
        })
        .collect();
    Ok(PacEstimate {
        n: config.n,
        trials,
        mean_error: mean,
        std_error: (var / trials as f64).sqrt(),
        max_error: *sorted.last().expect("trials >= 1"),
        error_quantiles: quantiles(&sorted),
        exceedance,
        inconsistent_trials: outcomes.iter().filter(|o| o.1).count(),
        learner_invocations: trials as u64,
        atom_bound: measure.atom_bound(),
        n_atom_bound: config.n as f64 * measure.atom_bound(),
        rng: RNG_ALGORITHM,
    })
}

/// The standard sample-complexity bound
/// `(128/ε²)(d·ln((2e²/ε)·ln(2e/ε)) + ln(8/δ))`, rounded up.
pub fn sample_complexity_bound(epsilon: f64, delta: f64, d: usize) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let e = std::f64::consts::E;
    let inner = (2.0 * e * e / epsilon) * (2.0 * e / epsilon).ln();
    let value = 128.0 / (epsilon * epsilon) * (d as f64 * inner.ln() + (8.0 / delta).ln());
    Ok(value.ceil() as u64)
}
