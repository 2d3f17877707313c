//! Exact shattering computations.
//!
//! Everything here reduces to one question: given candidate clusters, what is
//! the largest family of pairwise-disjoint candidates such that every index
//! pattern `J` has a carver, i.e. a concept containing the clusters in `J` and
//! missing the others? Classical VC dimension uses singleton clusters, thick VC
//! dimension uses clusters of exactly `min_size` points, and VC dimension
//! modulo `↓N` uses singletons outside `N`.
//!
//! Shrinking a cluster never loses a carver, so a search over the minimal
//! admissible clusters attains the maximum over all admissible clusters. For
//! `n >= 2` strongly shattered clusters are automatically disjoint (a shared
//! point would have to be both inside and outside the carver of `{i}`), so
//! restricting to disjoint families loses nothing either.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{ClusterFamily, ConceptClass, PrincipalIdeal};
use crate::error::{Error, Result};
use crate::limits::WorkLimits;
use crate::pointset::{IndexMask, PointSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Points(Vec<usize>),
    Clusters(ClusterFamily),
}

/// A shattered witness plus, for every pattern `J` (bit `i` of the index is
/// set iff the `i`-th witness element is in `J`), the least concept index
/// realizing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShatterCertificate {
    pub witness: Witness,
    pub carvers: Vec<usize>,
}

impl ShatterCertificate {
    pub fn size(&self) -> usize {
        match &self.witness {
            Witness::Points(p) => p.len(),
            Witness::Clusters(f) => f.len(),
        }
    }

    /// Re-checks the certificate against the class from scratch.
    pub fn verify(&self, class: &ConceptClass) -> Result<bool> {
        match &self.witness {
            Witness::Points(points) => {
                if trace_count(class, points)? != 1usize << points.len() {
                    return Ok(false);
                }
                Ok(self.carvers.len() == 1 << points.len()
                    && self.carvers.iter().enumerate().all(|(pattern, &ci)| {
                        ci < class.len()
                            && points
                                .iter()
                                .enumerate()
                                .all(|(i, &p)| class.concept(ci).contains(p) == (pattern >> i & 1 == 1))
                    }))
            }
            Witness::Clusters(family) => {
                if is_strongly_shattered(class, family)?.is_none() {
                    return Ok(false);
                }
                Ok(self.carvers.len() == 1 << family.len()
                    && self
                        .carvers
                        .iter()
                        .enumerate()
                        .all(|(pattern, &ci)| ci < class.len() && carves(class, family, pattern, ci)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VcResult {
    pub dimension: usize,
    pub certificate: ShatterCertificate,
    pub nodes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn check_points(class: &ConceptClass, points: &[usize]) -> Result<()> {
    if let Some(&p) = points.iter().find(|&&p| p >= class.m()) {
        return Err(Error::PointOutOfRange { point: p, size: class.m() });
    }
    Ok(())
}

/// Number of distinct traces `C ∩ points` over the class.
pub fn trace_count(class: &ConceptClass, points: &[usize]) -> Result<usize> {
    class.ensure_valid()?;
    check_points(class, points)?;
    let traces: HashSet<Vec<bool>> = class
        .concepts()
        .iter()
        .map(|c| points.iter().map(|&p| c.contains(p)).collect())
        .collect();
    Ok(traces.len())
}

fn carves(class: &ConceptClass, family: &ClusterFamily, pattern: usize, concept: usize) -> bool {
    let c = class.concept(concept);
    family.clusters().iter().enumerate().all(|(i, a)| {
        if pattern >> i & 1 == 1 {
            a.is_subset(c)
        } else {
            a.is_disjoint(c)
        }
    })
}

/// Carvers (least concept index per pattern) if `family` is strongly
/// shattered, `None` otherwise.
pub fn is_strongly_shattered(class: &ConceptClass, family: &ClusterFamily) -> Result<Option<Vec<usize>>> {
    class.ensure_valid()?;
    if let Some(c) = family.clusters().first() {
        if c.len() != class.m() {
            return Err(Error::DomainMismatch { expected: class.m(), found: c.len() });
        }
    }
    if family.len() >= usize::BITS as usize - 1 {
        return Err(Error::InvalidFamily(format!("{} clusters is too many", family.len())));
    }
    let mut carvers = Vec::with_capacity(1 << family.len());
    for pattern in 0..1usize << family.len() {
        match (0..class.len()).find(|&ci| carves(class, family, pattern, ci)) {
            Some(ci) => carvers.push(ci),
            None => return Ok(None),
        }
    }
    Ok(Some(carvers))
}

struct Candidate {
    set: PointSet,
    inside: IndexMask,
    outside: IndexMask,
}

#[derive(Clone)]
struct Best {
    chosen: Vec<usize>,
    masks: Vec<IndexMask>,
}

struct Search<'a> {
    candidates: Vec<Candidate>,
    cluster_size: usize,
    cap: usize,
    m: usize,
    nodes: AtomicU64,
    limits: &'a WorkLimits,
}

impl Search<'_> {
    fn tick(&self) -> Result<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.limits.search_nodes {
            return Err(Error::WorkLimitExceeded { what: "shattering search", limit: self.limits.search_nodes });
        }
        Ok(())
    }

    fn extend(&self, masks: &[IndexMask], cand: &Candidate) -> Option<Vec<IndexMask>> {
        let mut next = Vec::with_capacity(masks.len() * 2);
        for mask in masks {
            let out = mask.and(&cand.outside);
            if out.is_zero() {
                return None;
            }
            next.push(out);
        }
        for mask in masks {
            let inn = mask.and(&cand.inside);
            if inn.is_zero() {
                return None;
            }
            next.push(inn);
        }
        Some(next)
    }

    fn dfs(
        &self,
        start: usize,
        used: &PointSet,
        masks: &[IndexMask],
        chosen: &mut Vec<usize>,
        best: &mut Best,
    ) -> Result<()> {
        let depth = chosen.len();
        if depth > best.chosen.len() {
            *best = Best { chosen: chosen.clone(), masks: masks.to_vec() };
        }
        let free = self.m - used.count();
        if depth >= self.cap || depth + free / self.cluster_size <= best.chosen.len() {
            return Ok(());
        }
        for j in start..self.candidates.len() {
            let cand = &self.candidates[j];
            if !cand.set.is_disjoint(used) {
                continue;
            }
            self.tick()?;
            if let Some(next) = self.extend(masks, cand) {
                chosen.push(j);
                let used = used.union(&cand.set);
                self.dfs(j + 1, &used, &next, chosen, best)?;
                chosen.pop();
                if best.chosen.len() >= self.cap {
                    break;
                }
            }
        }
        Ok(())
    }
}

/// Largest strongly shattered family of pairwise-disjoint clusters drawn from
/// `candidates` (taken in the given order; the first maximal family in
/// depth-first order is returned, which is the lexicographically least one
/// when candidates are sorted). Returns chosen candidate indices and carvers.
fn max_strong_family(
    class: &ConceptClass,
    candidates: &[PointSet],
    limits: &WorkLimits,
) -> Result<(Vec<usize>, Vec<usize>, u64)> {
    class.ensure_nonempty()?;
    let k = class.len();
    let mut cands = Vec::new();
    let mut original = Vec::new();
    for (idx, set) in candidates.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let mut inside = IndexMask::empty(k);
        let mut outside = IndexMask::empty(k);
        for (ci, c) in class.concepts().iter().enumerate() {
            if set.is_subset(c) {
                inside.set(ci);
            } else if set.is_disjoint(c) {
                outside.set(ci);
            }
        }
        if !inside.is_zero() && !outside.is_zero() {
            cands.push(Candidate { set: set.clone(), inside, outside });
            original.push(idx);
        }
    }
    let distinct = class.distinct_count();
    let cap = (usize::BITS - 1 - distinct.leading_zeros()) as usize;
    let cluster_size = cands.iter().map(|c| c.set.count()).min().unwrap_or(1).max(1);
    let search = Search { candidates: cands, cluster_size, cap, m: class.m(), nodes: AtomicU64::new(0), limits };

    let root = vec![IndexMask::full(k)];
    let branches: Vec<Best> = (0..search.candidates.len())
        .into_par_iter()
        .map(|j| {
            let mut best = Best { chosen: Vec::new(), masks: root.clone() };
            search.tick()?;
            if let Some(next) = search.extend(&root, &search.candidates[j]) {
                let mut chosen = vec![j];
                search.dfs(j + 1, &search.candidates[j].set, &next, &mut chosen, &mut best)?;
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let mut best = Best { chosen: Vec::new(), masks: root };
    for b in branches {
        if b.chosen.len() > best.chosen.len() {
            best = b;
        }
    }
    let carvers = best.masks.iter().map(|m| m.first().expect("nonzero pattern mask")).collect();
    let chosen = best.chosen.iter().map(|&j| original[j]).collect();
    Ok((chosen, carvers, search.nodes.load(Ordering::Relaxed)))
}

/// Largest strongly shattered disjoint family drawn from `candidates`, with a
/// cluster-family certificate. Candidates are searched in the given order.
pub fn strong_shattering_number(
    class: &ConceptClass,
    candidates: &[PointSet],
    limits: &WorkLimits,
) -> Result<VcResult> {
    let (chosen, carvers, nodes) = max_strong_family(class, candidates, limits)?;
    let sets: Vec<PointSet> = chosen.iter().map(|&j| candidates[j].clone()).collect();
    let min_size = sets.iter().map(PointSet::count).min().unwrap_or(1);
    let family = ClusterFamily::new(class.m(), sets, min_size)?;
    Ok(VcResult {
        dimension: family.len(),
        certificate: ShatterCertificate { witness: Witness::Clusters(family), carvers },
        nodes,
        note: None,
    })
}

/// One representative (the least point) per class of points with identical
/// membership columns. A shattered set holds at most one point per class, and
/// swapping in the least point keeps it shattered and lexicographically
/// smaller, so the search may be limited to representatives.
fn column_representatives(class: &ConceptClass) -> Vec<usize> {
    let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut reps = Vec::new();
    for p in 0..class.m() {
        let column: Vec<bool> = class.concepts().iter().map(|c| c.contains(p)).collect();
        seen.entry(column).or_insert_with(|| {
            reps.push(p);
            p
        });
    }
    reps
}

fn points_result(class: &ConceptClass, points: &[usize], limits: &WorkLimits) -> Result<VcResult> {
    let m = class.m();
    let singletons: Vec<PointSet> =
        points.iter().map(|&p| PointSet::from_points(m, [p]).expect("point in range")).collect();
    let (chosen, carvers, nodes) = max_strong_family(class, &singletons, limits)?;
    let witness: Vec<usize> = chosen.iter().map(|&j| points[j]).collect();
    Ok(VcResult {
        dimension: witness.len(),
        certificate: ShatterCertificate { witness: Witness::Points(witness), carvers },
        nodes,
        note: None,
    })
}

/// Classical VC dimension by exact search, with the lexicographically least
/// shattered set of maximum size as certificate.
pub fn vc_dimension(class: &ConceptClass, limits: &WorkLimits) -> Result<VcResult> {
    class.ensure_nonempty()?;
    let reps = column_representatives(class);
    points_result(class, &reps, limits)
}

/// Largest `n` admitting `n` disjoint clusters of at least `min_size` points
/// strongly shattered by the class. Only clusters of exactly `min_size` points
/// are searched: enlarging a cluster only removes carvers.
pub fn vc_thick(class: &ConceptClass, min_size: usize, limits: &WorkLimits) -> Result<VcResult> {
    class.ensure_nonempty()?;
    if min_size == 0 {
        return Err(Error::InvalidParameter("min_size must be at least 1".into()));
    }
    let m = class.m();
    if min_size > m {
        return Ok(VcResult {
            dimension: 0,
            certificate: ShatterCertificate {
                witness: Witness::Clusters(ClusterFamily::new(m, Vec::new(), min_size)?),
                carvers: vec![0],
            },
            nodes: 0,
            note: Some(format!("min_size {min_size} exceeds domain size {m}; no cluster fits")),
        });
    }
    let total = binomial(m as u64, min_size as u64);
    if total > limits.search_nodes as u128 {
        return Err(Error::WorkLimitExceeded { what: "thick cluster enumeration", limit: limits.search_nodes });
    }
    let candidates: Vec<PointSet> = (0..m)
        .combinations(min_size)
        .map(|c| PointSet::from_points(m, c).expect("in range"))
        .collect();
    let mut result = strong_shattering_number(class, &candidates, limits)?;
    if let Witness::Clusters(f) = &result.certificate.witness {
        if f.min_size() != min_size {
            let family = ClusterFamily::new(m, f.clusters().to_vec(), min_size)?;
            result.certificate.witness = Witness::Clusters(family);
        }
    }
    Ok(result)
}

/// VC dimension modulo the principal ideal `↓N`: the largest strongly
/// shattered family of clusters none of which lies inside `N`. The minimal
/// such clusters are the singletons outside `N`.
pub fn vc_mod_ideal(class: &ConceptClass, ideal: &PrincipalIdeal, limits: &WorkLimits) -> Result<VcResult> {
    class.ensure_nonempty()?;
    let n = ideal.negligible();
    if n.len() != class.m() {
        return Err(Error::DomainMismatch { expected: class.m(), found: n.len() });
    }
    let candidates: Vec<PointSet> = (0..class.m())
        .map(|p| PointSet::from_points(class.m(), [p]).expect("in range"))
        .filter(|s| !ideal.contains(s))
        .collect();
    strong_shattering_number(class, &candidates, limits)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalMode {
    Exact,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RemovalResult {
    pub dimension: usize,
    pub removed: Vec<usize>,
    pub mode: RemovalMode,
    /// Greedy results are upper bounds only.
    pub heuristic: bool,
    pub evaluated: u64,
}

fn vc_without(class: &ConceptClass, removed: &PointSet, limits: &WorkLimits) -> Result<usize> {
    match class.restrict(&removed.complement())? {
        None => Ok(0),
        Some(r) => Ok(vc_dimension(&r, limits)?.dimension),
    }
}

/// Minimum VC dimension over removals of at most `budget` points. Exact mode
/// returns the smallest, then lexicographically least, minimizing set.
pub fn vc_after_removal(
    class: &ConceptClass,
    budget: usize,
    mode: RemovalMode,
    limits: &WorkLimits,
) -> Result<RemovalResult> {
    class.ensure_nonempty()?;
    let m = class.m();
    if budget > m {
        return Err(Error::InvalidParameter(format!("budget {budget} exceeds domain size {m}")));
    }
    match mode {
        RemovalMode::Exact => {
            let total = sauer_shelah_bound(m, budget);
            if total > limits.removal_subsets as u128 {
                return Err(Error::WorkLimitExceeded { what: "exact removal", limit: limits.removal_subsets });
            }
            let mut best = (vc_dimension(class, limits)?.dimension, Vec::new());
            let mut evaluated = 1;
            'sizes: for k in 1..=budget {
                if best.0 == 0 {
                    break;
                }
                let subsets: Vec<Vec<usize>> = (0..m).combinations(k).collect();
                let dims: Vec<usize> = subsets
                    .par_iter()
                    .map(|s| vc_without(class, &PointSet::from_points(m, s.iter().copied()).expect("in range"), limits))
                    .collect::<Result<_>>()?;
                evaluated += subsets.len() as u64;
                for (s, d) in subsets.into_iter().zip(dims) {
                    if d < best.0 {
                        best = (d, s);
                        if best.0 == 0 {
                            break 'sizes;
                        }
                    }
                }
            }
            Ok(RemovalResult { dimension: best.0, removed: best.1, mode, heuristic: false, evaluated })
        }
        RemovalMode::Greedy => {
            let mut removed = PointSet::empty(m);
            let mut current = vc_dimension(class, limits)?.dimension;
            let mut evaluated = 1;
            for _ in 0..budget {
                if current == 0 {
                    break;
                }
                let options: Vec<usize> = (0..m).filter(|&p| !removed.contains(p)).collect();
                let dims: Vec<usize> = options
                    .par_iter()
                    .map(|&p| {
                        let mut trial = removed.clone();
                        trial.insert(p);
                        vc_without(class, &trial, limits)
                    })
                    .collect::<Result<_>>()?;
                evaluated += options.len() as u64;
                let (p, d) = options
                    .iter()
                    .zip(dims)
                    .min_by_key(|&(&p, d)| (d, p))
                    .map(|(&p, d)| (p, d))
                    .expect("budget <= m leaves a point");
                removed.insert(p);
                current = d;
            }
            Ok(RemovalResult { dimension: current, removed: removed.to_vec(), mode, heuristic: true, evaluated })
        }
    }
}

/// The canonical witness `A_i = ⋂_{J∋i} C_J ∩ ⋂_{J∌i} C_J^c` built from
/// carvers indexed by pattern bitmask. The result is pairwise disjoint and
/// contains any family the carvers strongly shatter, index by index.
pub fn canonical_witness(class: &ConceptClass, carvers: &[usize]) -> Result<ClusterFamily> {
    class.ensure_valid()?;
    if !carvers.len().is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "carvers must cover 2^n patterns, got {}",
            carvers.len()
        )));
    }
    if let Some(&ci) = carvers.iter().find(|&&ci| ci >= class.len()) {
        return Err(Error::InvalidParameter(format!("carver index {ci} out of range")));
    }
    let n = carvers.len().trailing_zeros() as usize;
    let m = class.m();
    let mut sets = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = PointSet::full(m);
        for (pattern, &ci) in carvers.iter().enumerate() {
            let c = class.concept(ci);
            if pattern >> i & 1 == 1 {
                a.intersect_with(c);
            } else {
                a.intersect_with(&c.complement());
            }
        }
        if a.is_empty() {
            return Err(Error::EmptyWitness { index: i });
        }
        sets.push(a);
    }
    ClusterFamily::new(m, sets, 1)
}

/// `Σ_{k ≤ d} C(m, k)`, the Sauer–Shelah bound on distinct traces.
pub fn sauer_shelah_bound(m: usize, d: usize) -> u128 {
    (0..=d.min(m)).fold(0u128, |acc, k| acc.saturating_add(binomial(m as u64, k as u64)))
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1 since acc = C(n, i).
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return u128::MAX,
        }
    }
    acc
}
