//! VC dimension modulo ideals and its finite-scale companions.
//!
//! The crate computes classical VC dimension, VC dimension modulo a principal
//! ideal `↓N`, and a "thick" VC dimension in which shattered points are
//! replaced by disjoint clusters of a minimum size. The ideal-based dimension
//! is computed twice, once by strong shattering of set families on the domain
//! and once as classical VC dimension on the atoms of the quotient Boolean
//! algebra, and the two must agree. A Monte Carlo harness runs consistent
//! learners and uniform deviation estimates under discrete measures with
//! small atoms, the finite stand-ins for non-atomic measures.

pub mod classgen;
pub mod cli;
pub mod domain;
pub mod empirics;
mod error;
pub mod family;
pub mod format;
pub mod learning;
mod limits;
pub mod measures;
mod pointset;
pub mod rng;
pub mod shattering;
pub mod stone;

pub use domain::{validate_class, ClusterFamily, ConceptClass, Domain, PrincipalIdeal, ValidationReport};
pub use error::{Error, Result};
pub use limits::WorkLimits;
pub use pointset::{Concept, PointSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
