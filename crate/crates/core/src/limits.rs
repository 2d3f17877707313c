use serde::{Deserialize, Serialize};

/// Explicit budgets for the exact searches. Exceeding one is reported as
/// [`crate::Error::WorkLimitExceeded`]; no search silently degrades.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkLimits {
    /// Family extensions tried by the shattering search (and candidate
    /// clusters it may enumerate).
    pub search_nodes: u64,
    /// Removal sets examined by exact `vc_after_removal`.
    pub removal_subsets: u64,
    /// Sample sequences enumerated by exhaustive `learner_image`.
    pub image_sequences: u64,
    /// Branch-and-bound nodes for exact packing numbers.
    pub packing_nodes: u64,
    /// Concepts materialized by extensional generators.
    pub class_size: u64,
}

impl Default for WorkLimits {
    fn default() -> Self {
        Self {
            search_nodes: 200_000_000,
            removal_subsets: 2_000_000,
            image_sequences: 20_000_000,
            packing_nodes: 50_000_000,
            class_size: 5_000_000,
        }
    }
}
