//! Finite Boolean algebras through their atoms.
//!
//! The subalgebra of `2^Ω` generated by finitely many sets is determined by its
//! atoms, the classes of points that agree on membership in every generator.
//! Every ultrafilter on a finite Boolean algebra is principal at an atom, so
//! the Stone space of the algebra is the set of atoms. Quotienting by a
//! principal ideal `↓N` (with `N` among the generators) keeps exactly the
//! atoms not contained in `N`; those are the Stone points of the quotient.
//!
//! The infinite picture, where `Ω` sits inside its Stone–Čech compactification
//! and the extra points are free ultrafilters, has no finite counterpart. At
//! finite scale only the resulting equalities can be checked, e.g. that with
//! `N = ∅` VC dimension on the atoms of the full power algebra equals VC
//! dimension on `Ω`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{ClusterFamily, ConceptClass, Domain, PrincipalIdeal};
use crate::error::{Error, Result};
use crate::limits::WorkLimits;
use crate::pointset::{Concept, PointSet};
use crate::shattering::{canonical_witness, vc_dimension, Witness};

/// Atoms of a finite subalgebra of `2^Ω`, sorted by least element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomPartition {
    m: usize,
    blocks: Vec<PointSet>,
}

impl AtomPartition {
    pub fn blocks(&self) -> &[PointSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Index of the block holding point `p`.
    pub fn block_of(&self, p: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(p))
    }

    /// True if `set` is a union of blocks.
    pub fn is_measurable(&self, set: &PointSet) -> bool {
        self.blocks.iter().all(|b| b.is_subset(set) || b.is_disjoint(set))
    }
}

/// Partition of `0..m` into sign-vector classes of the generators.
pub fn generated_partition(m: usize, generators: &[Concept]) -> Result<AtomPartition> {
    if let Some(g) = generators.iter().find(|g| g.len() != m) {
        return Err(Error::DomainMismatch { expected: m, found: g.len() });
    }
    let columns: Vec<PointSet> = (0..m)
        .into_par_iter()
        .map(|p| PointSet::from_bools(&generators.iter().map(|g| g.contains(p)).collect::<Vec<_>>()))
        .collect();
    // HashMap equality does the full column comparison on hash collisions.
    let mut index: HashMap<&PointSet, usize> = HashMap::new();
    let mut blocks: Vec<PointSet> = Vec::new();
    for (p, column) in columns.iter().enumerate() {
        let b = *index.entry(column).or_insert_with(|| {
            blocks.push(PointSet::empty(m));
            blocks.len() - 1
        });
        blocks[b].insert(p);
    }
    Ok(AtomPartition { m, blocks })
}

/// Atoms surviving in the quotient by `↓N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSpace {
    partition: AtomPartition,
    surviving: Vec<usize>,
}

impl QuotientSpace {
    /// Requires `N` to be a union of blocks, which holds whenever `N` was
    /// among the generators.
    pub fn new(partition: AtomPartition, ideal: &PrincipalIdeal) -> Result<Self> {
        let n = ideal.negligible();
        if n.len() != partition.m {
            return Err(Error::DomainMismatch { expected: partition.m, found: n.len() });
        }
        if !partition.is_measurable(n) {
            return Err(Error::InvalidParameter("negligible set is not a union of atoms".into()));
        }
        let surviving = (0..partition.len()).filter(|&b| !ideal.contains(&partition.blocks[b])).collect();
        Ok(Self { partition, surviving })
    }

    pub fn partition(&self) -> &AtomPartition {
        &self.partition
    }

    /// Block indices of the surviving atoms, in block order.
    pub fn surviving(&self) -> &[usize] {
        &self.surviving
    }

    pub fn surviving_atoms(&self) -> impl Iterator<Item = &PointSet> {
        self.surviving.iter().map(|&b| &self.partition.blocks[b])
    }

    /// The class induced on the Stone points: concept `C` contains atom `a`
    /// iff `a ⊆ C`. Concept order is preserved. `None` when nothing survives.
    pub fn induced_class(&self, class: &ConceptClass) -> Result<Option<ConceptClass>> {
        if self.surviving.is_empty() {
            return Ok(None);
        }
        let concepts = class
            .concepts()
            .iter()
            .map(|c| {
                let bits: Vec<bool> = self.surviving_atoms().map(|a| a.is_subset(c)).collect();
                PointSet::from_bools(&bits)
            })
            .collect();
        Ok(Some(ConceptClass::new(Domain::new(self.surviving.len())?, concepts)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StoneResult {
    pub dimension: usize,
    pub atoms: usize,
    pub surviving_atoms: usize,
    /// The shattered Stone points, each given as its atom's points.
    pub shattered: Vec<Vec<usize>>,
    pub carvers: Vec<usize>,
}

/// Builds the quotient by `↓N` of the algebra generated by the class and `N`.
pub fn stone_quotient(class: &ConceptClass, ideal: &PrincipalIdeal) -> Result<QuotientSpace> {
    class.ensure_valid()?;
    let mut generators = class.concepts().to_vec();
    generators.push(ideal.negligible().clone());
    let partition = generated_partition(class.m(), &generators)?;
    QuotientSpace::new(partition, ideal)
}

/// Classical VC dimension of the class induced on the Stone space of the
/// quotient algebra.
pub fn vc_on_stone(class: &ConceptClass, ideal: &PrincipalIdeal, limits: &WorkLimits) -> Result<StoneResult> {
    class.ensure_nonempty()?;
    let quotient = stone_quotient(class, ideal)?;
    let atoms = quotient.partition.len();
    let surviving = quotient.surviving.len();
    let Some(induced) = quotient.induced_class(class)? else {
        return Ok(StoneResult { dimension: 0, atoms, surviving_atoms: 0, shattered: Vec::new(), carvers: vec![0] });
    };
    let vc = vc_dimension(&induced, limits)?;
    let Witness::Points(points) = vc.certificate.witness else {
        unreachable!("classical search returns points")
    };
    let shattered = points
        .iter()
        .map(|&q| quotient.partition.blocks[quotient.surviving[q]].to_vec())
        .collect();
    Ok(StoneResult {
        dimension: vc.dimension,
        atoms,
        surviving_atoms: surviving,
        shattered,
        carvers: vc.certificate.carvers,
    })
}

/// Lifts carvers of shattered Stone points back to a strongly shattered
/// family on `Ω` via the canonical witness. Each lifted cluster contains its
/// atom, so none lies in `↓N`.
pub fn lift_witness(class: &ConceptClass, ideal: &PrincipalIdeal, carvers: &[usize]) -> Result<ClusterFamily> {
    let family = canonical_witness(class, carvers)?;
    if let Some(i) = family.clusters().iter().position(|a| ideal.contains(a)) {
        return Err(Error::InvalidFamily(format!("lifted cluster {i} lies inside the negligible set")));
    }
    Ok(family)
}
