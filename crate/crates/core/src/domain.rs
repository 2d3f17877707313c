//! Ground types: domains, concept classes, principal ideals and cluster
//! families.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointset::{Concept, PointSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    size: usize,
    labels: Option<Vec<String>>,
}

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("domain size must be positive".into()));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("domain size must be positive".into()));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("duplicate label {:?}", w[0])));
        }
        Ok(Self { size: labels.len(), labels: Some(labels) })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The sub-domain of the points in `keep`, relabelled `0..keep.count()`.
    /// Labels are carried over; an empty `keep` has no domain.
    fn restricted(&self, keep: &PointSet) -> Option<Self> {
        let size = keep.count();
        if size == 0 {
            return None;
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| keep.iter().map(|p| l[p].clone()).collect());
        Some(Self { size, labels })
    }
}

/// An ordered, finite family of concepts over one domain. The order is the
/// enumeration order used by the enumeration learner, so duplicates are kept
/// unless `dedup` was requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptClass {
    domain: Domain,
    concepts: Vec<Concept>,
    dedup: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    /// Class cardinality (number of stored concepts).
    pub kappa: usize,
    pub distinct: usize,
    pub violations: Vec<String>,
    /// Pairs `(first, later)` of equal concepts.
    pub duplicates: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

impl ConceptClass {
    /// Stores the concepts as given. Use [`ConceptClass::try_new`] or
    /// [`validate_class`] to check them.
    pub fn new(domain: Domain, concepts: Vec<Concept>) -> Self {
        Self { domain, concepts, dedup: false }
    }

    pub fn try_new(domain: Domain, concepts: Vec<Concept>) -> Result<Self> {
        let class = Self::new(domain, concepts);
        class.ensure_valid()?;
        Ok(class)
    }

    /// Removes later duplicates, keeping first occurrences in order.
    pub fn deduplicated(mut self) -> Self {
        let mut seen = std::collections::HashSet::new();
        self.concepts.retain(|c| seen.insert(c.clone()));
        self.dedup = true;
        self
    }

    pub(crate) fn with_dedup_flag(mut self, dedup: bool) -> Self {
        self.dedup = dedup;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.domain.size
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, index: usize) -> &Concept {
        &self.concepts[index]
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn is_dedup(&self) -> bool {
        self.dedup
    }

    pub fn validate(&self) -> ValidationReport {
        validate_class(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.ok {
            Ok(())
        } else {
            Err(Error::InvalidClass(report.violations.join("; ")))
        }
    }

    pub(crate) fn ensure_nonempty(&self) -> Result<()> {
        self.ensure_valid()?;
        if self.concepts.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(())
    }

    /// The trace class `{C ∩ X : C ∈ class}` as a class on the sub-domain `X`,
    /// with points renumbered in increasing order. Duplicate traces are kept so
    /// concept indices stay aligned with the original class.
    pub fn restrict(&self, keep: &PointSet) -> Result<Option<ConceptClass>> {
        if keep.len() != self.m() {
            return Err(Error::DomainMismatch { expected: self.m(), found: keep.len() });
        }
        let Some(domain) = self.domain.restricted(keep) else {
            return Ok(None);
        };
        let kept: Vec<usize> = keep.to_vec();
        let concepts = self
            .concepts
            .iter()
            .map(|c| PointSet::from_bools(&kept.iter().map(|&p| c.contains(p)).collect::<Vec<_>>()))
            .collect();
        Ok(Some(ConceptClass { domain, concepts, dedup: false }))
    }

    /// Number of distinct concepts as sets.
    pub fn distinct_count(&self) -> usize {
        let set: std::collections::HashSet<&Concept> = self.concepts.iter().collect();
        set.len()
    }
}

/// Reports length mismatches, duplicates and the class cardinality.
pub fn validate_class(class: &ConceptClass) -> ValidationReport {
    let m = class.domain.size;
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    if let Some(labels) = &class.domain.labels {
        if labels.len() != m {
            violations.push(format!("{} labels for a domain of size {m}", labels.len()));
        }
    }
    for (i, c) in class.concepts.iter().enumerate() {
        if c.len() != m {
            violations.push(format!("concept {i} has length {} (expected {m})", c.len()));
        }
    }
    let mut first_seen: std::collections::HashMap<&Concept, usize> = Default::default();
    let mut duplicates = Vec::new();
    for (i, c) in class.concepts.iter().enumerate() {
        if let Some(&j) = first_seen.get(c) {
            duplicates.push((j, i));
        } else {
            first_seen.insert(c, i);
        }
    }
    if !duplicates.is_empty() {
        let msg = format!("{} duplicate concept(s)", duplicates.len());
        if class.dedup {
            violations.push(format!("{msg} in a class marked dedup"));
        } else {
            warnings.push(msg);
        }
    }
    ValidationReport {
        ok: violations.is_empty(),
        kappa: class.concepts.len(),
        distinct: first_seen.len(),
        violations,
        duplicates,
        warnings,
    }
}

/// The ideal `↓N = { A : A ⊆ N }` of subsets of a negligible set `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalIdeal {
    negligible: PointSet,
}

impl PrincipalIdeal {
    pub fn new(negligible: PointSet) -> Self {
        Self { negligible }
    }

    /// The zero ideal `{∅}`.
    pub fn trivial(m: usize) -> Self {
        Self { negligible: PointSet::empty(m) }
    }

    pub fn negligible(&self) -> &PointSet {
        &self.negligible
    }

    pub fn contains(&self, set: &PointSet) -> bool {
        set.is_subset(&self.negligible)
    }

    /// Points outside `N`.
    pub fn co_negligible(&self) -> PointSet {
        self.negligible.complement()
    }
}

/// Pairwise-disjoint clusters, each of at least `min_size` points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterFamily {
    clusters: Vec<Vec<usize>>,
    min_size: usize,
    #[serde(skip)]
    sets: Vec<PointSet>,
}

impl ClusterFamily {
    pub fn new(m: usize, clusters: Vec<PointSet>, min_size: usize) -> Result<Self> {
        if min_size == 0 {
            return Err(Error::InvalidFamily("min_size must be positive".into()));
        }
        for (i, c) in clusters.iter().enumerate() {
            if c.len() != m {
                return Err(Error::DomainMismatch { expected: m, found: c.len() });
            }
            if c.count() < min_size {
                return Err(Error::InvalidFamily(format!(
                    "cluster {i} has {} point(s), fewer than {min_size}",
                    c.count()
                )));
            }
        }
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if clusters[i].intersects(&clusters[j]) {
                    return Err(Error::InvalidFamily(format!("clusters {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { clusters: clusters.iter().map(PointSet::to_vec).collect(), min_size, sets: clusters })
    }

    pub fn from_points(m: usize, clusters: &[Vec<usize>], min_size: usize) -> Result<Self> {
        let sets = clusters
            .iter()
            .map(|c| {
                PointSet::from_points(m, c.iter().copied()).ok_or_else(|| {
                    let point = c.iter().copied().find(|&p| p >= m).unwrap_or(m);
                    Error::PointOutOfRange { point, size: m }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, sets, min_size)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn min_size(&self) -> usize {
        self.min_size
    }

    pub fn clusters(&self) -> &[PointSet] {
        &self.sets
    }

    pub fn cluster_points(&self) -> &[Vec<usize>] {
        &self.clusters
    }
}
