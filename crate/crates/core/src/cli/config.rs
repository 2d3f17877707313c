//! Experiment configs for `pac-sim` and `ugc-sim`.
//!
//! ```json
//! {
//!   "class": { "generate": { "family": "finite_cofinite", "m": 1000, "t": 5 } },
//!   "learner": { "kind": "enumeration" },
//!   "measures": [ { "uniform": {} } ],
//!   "targets": [ [0, 1, 2] ],
//!   "n_grid": [10, 50],
//!   "epsilons": [0.1],
//!   "delta": 0.1,
//!   "trials": 1000
//! }
//! ```
//!
//! `class` is either `{"file": "path"}` (relative to the config file) or
//! `{"generate": <spec>}`. A generated finite/cofinite class is kept symbolic,
//! so `m` may be large. Targets are concept indices or explicit point lists. A
//! point list outside the class makes the run agnostic; samples with no
//! consistent concept are then handled by `policy`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classgen::GenSpec;
use crate::domain::ConceptClass;
use crate::error::{Error, Result};
use crate::family::{ConceptFamily, FiniteCofinite, OrderedClass};
use crate::format::read_class;
use crate::learning::{InconsistencyPolicy, LearnerSpec};
use crate::limits::WorkLimits;
use crate::measures::MeasureSpec;
use crate::pointset::{Concept, PointSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSource {
    File(PathBuf),
    Generate(GenSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Index(usize),
    Points(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub class: ClassSource,
    #[serde(default)]
    pub learner: Option<LearnerSpec>,
    pub measures: Vec<MeasureSpec>,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    pub trials: usize,
    /// Ignored in favour of `--seed`, which is always required.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub policy: InconsistencyPolicy,
}

impl ExperimentConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        if let ClassSource::File(p) = &mut config.class {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }
}

pub enum LoadedClass {
    Extensional(ConceptClass),
    Symbolic(FiniteCofinite),
}

impl LoadedClass {
    pub fn load(source: &ClassSource, limits: &WorkLimits) -> Result<Self> {
        match source {
            ClassSource::File(p) => Ok(LoadedClass::Extensional(read_class(p)?)),
            ClassSource::Generate(GenSpec::FiniteCofinite { m, t }) => {
                Ok(LoadedClass::Symbolic(FiniteCofinite::new(*m, *t)?))
            }
            ClassSource::Generate(spec) => Ok(LoadedClass::Extensional(spec.generate(limits)?)),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            LoadedClass::Extensional(c) => c.m(),
            LoadedClass::Symbolic(f) => f.m(),
        }
    }

    pub fn family(&self, order: Option<&[usize]>) -> Result<Box<dyn ConceptFamily + '_>> {
        match self {
            LoadedClass::Extensional(c) => {
                c.ensure_valid()?;
                Ok(Box::new(match order {
                    Some(o) => OrderedClass::new(c, o.to_vec())?,
                    None => OrderedClass::natural(c)?,
                }))
            }
            LoadedClass::Symbolic(f) => match order {
                None => Ok(Box::new(*f)),
                Some(_) => Err(Error::InvalidParameter(
                    "a custom order is not supported for the symbolic finite/cofinite class".into(),
                )),
            },
        }
    }

    pub fn contains(&self, c: &Concept) -> bool {
        match self {
            LoadedClass::Extensional(class) => class.concepts().contains(c),
            LoadedClass::Symbolic(f) => f.contains(c),
        }
    }

    pub fn target(&self, spec: &TargetSpec) -> Result<Concept> {
        let m = self.m();
        Ok(match spec {
            TargetSpec::Index(i) => match self {
                LoadedClass::Extensional(c) if *i < c.len() => c.concept(*i).clone(),
                LoadedClass::Extensional(_) => {
                    return Err(Error::InvalidParameter(format!("target index {i} out of range")))
                }
                LoadedClass::Symbolic(_) => {
                    return Err(Error::InvalidParameter(
                        "targets of the symbolic finite/cofinite class must be point lists".into(),
                    ))
                }
            },
            TargetSpec::Points(points) => PointSet::from_points(m, points.iter().copied())
                .ok_or_else(|| Error::InvalidParameter(format!("target point outside domain of size {m}")))?,
        })
    }
}
