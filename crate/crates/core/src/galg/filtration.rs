use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{encode_coeffs, AlgebraElement, AlgebraError, GroupAlgebra};
use crate::ff::Scalar;
use crate::linalg::EchelonBasis;

/// Depth of an element in the filtration: the largest k with x ∈ I^k, or
/// `Zero` for x = 0. `Zero` compares above every finite level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    At(usize),
    Zero,
}

impl Level {
    pub fn finite(self) -> Option<usize> {
        match self {
            Level::At(k) => Some(k),
            Level::Zero => None,
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Level::At(k) => write!(f, "{k}"),
            Level::Zero => f.write_str("zero"),
        }
    }
}

/// RREF bases of I⁰ = KG ⊇ I ⊇ I² ⊇ ... ⊇ I^L = 0.
#[derive(Clone, Debug)]
pub struct Filtration {
    algebra: Arc<GroupAlgebra>,
    levels: Vec<EchelonBasis>,
}

/// Computes the powers of the augmentation ideal by repeated left
/// multiplication of each level basis by every `g − 1`.
pub fn compute_filtration(kg: &Arc<GroupAlgebra>) -> Result<Filtration, AlgebraError> {
    let group = kg.group();
    let field = kg.field();
    let order = group.order();
    if order > 1 && group.prime() != field.characteristic() {
        return Err(AlgebraError::Unsupported { field: field.characteristic(), order });
    }
    let augs: Vec<Vec<Scalar>> = (1..order).map(|g| kg.embed_aug(g).into_coeffs()).collect();
    let mut levels = vec![EchelonBasis::identity(order)];
    let mut current = EchelonBasis::span(field, order, augs.iter().map(Vec::as_slice));
    loop {
        let done = current.is_empty();
        levels.push(current);
        if done {
            break;
        }
        let prev = levels.last().unwrap();
        let mut next = EchelonBasis::new(order);
        for a in &augs {
            for row in prev.rows() {
                next.insert(field, kg.mul_raw(a, row));
            }
        }
        if next.rank() >= prev.rank() {
            return Err(AlgebraError::Unsupported { field: field.characteristic(), order });
        }
        current = next;
    }
    Ok(Filtration { algebra: Arc::clone(kg), levels })
}

impl Filtration {
    pub fn algebra(&self) -> &Arc<GroupAlgebra> {
        &self.algebra
    }

    /// Number of nonzero levels; `I^L = 0`.
    pub fn length(&self) -> usize {
        self.levels.len() - 1
    }

    /// Basis of I^k (empty for k ≥ L).
    pub fn level(&self, k: usize) -> &EchelonBasis {
        &self.levels[k.min(self.levels.len() - 1)]
    }

    pub fn levels(&self) -> &[EchelonBasis] {
        &self.levels
    }

    /// `dim I^k` for k = 0..=L.
    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(EchelonBasis::rank).collect()
    }

    /// `dim I^k / I^{k+1}` for k = 0..L.
    pub fn quotient_dims(&self) -> Vec<usize> {
        self.dims().windows(2).map(|w| w[0] - w[1]).collect()
    }

    pub fn level_of(&self, v: &[Scalar]) -> Level {
        if v.iter().all(|s| s.is_zero()) {
            return Level::Zero;
        }
        let field = self.algebra.field();
        let k = (1..self.levels.len()).find(|&k| !self.levels[k].contains(field, v)).unwrap();
        Level::At(k - 1)
    }

    pub fn filtration_level(&self, x: &AlgebraElement) -> Level {
        self.level_of(x.coeffs())
    }

    pub fn contains(&self, k: usize, v: &[Scalar]) -> bool {
        self.level(k).contains(self.algebra.field(), v)
    }

    /// x ≡ y (mod I^k).
    pub fn congruent_mod(&self, x: &AlgebraElement, y: &AlgebraElement, k: usize) -> bool {
        let diff = self.algebra.sub_raw(x.coeffs(), y.coeffs());
        self.contains(k, &diff)
    }

    /// Canonical representative of `v` modulo I^k.
    pub fn reduce_mod(&self, k: usize, v: &mut [Scalar]) {
        self.level(k).reduce(self.algebra.field(), v);
    }

    /// Columns indexing I^k / I^{k+1}: pivots of I^k that are not pivots of I^{k+1}.
    pub fn quotient_columns(&self, k: usize) -> Vec<usize> {
        let lower = self.level(k + 1).pivots();
        self.level(k).pivots().iter().copied().filter(|c| !lower.contains(c)).collect()
    }

    /// Canonical basis of I^k / I^{k+1}: the rows of I^k whose pivots are
    /// quotient columns. They already vanish on every pivot of I^{k+1}.
    pub fn quotient_basis(&self, k: usize) -> Vec<Vec<Scalar>> {
        let cols = self.quotient_columns(k);
        let lvl = self.level(k);
        lvl.rows()
            .iter()
            .zip(lvl.pivots())
            .filter(|(_, p)| cols.contains(p))
            .map(|(r, _)| r.clone())
            .collect()
    }

    /// Coordinates of the class of `v ∈ I^k` in I^k / I^{k+1}.
    pub fn quotient_coordinates(&self, k: usize, v: &[Scalar]) -> Vec<Scalar> {
        let mut w = v.to_vec();
        self.reduce_mod(k + 1, &mut w);
        self.quotient_columns(k).into_iter().map(|c| w[c]).collect()
    }

    /// All g with g − 1 ∈ I^n.
    pub fn dimension_subgroup(&self, n: usize) -> DimensionSubgroupReport {
        let kg = &self.algebra;
        let members = (0..kg.dim()).filter(|&g| self.contains(n, kg.embed_aug(g).coeffs())).collect();
        DimensionSubgroupReport { n, members }
    }

    pub fn report(&self) -> FiltrationReport {
        let field = self.algebra.field();
        FiltrationReport {
            dims: self.dims(),
            quotient_dims: self.quotient_dims(),
            levels: self.levels.iter().map(|l| l.rows().iter().map(|r| encode_coeffs(field, r)).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSubgroupReport {
    pub n: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiltrationReport {
    pub dims: Vec<usize>,
    pub quotient_dims: Vec<usize>,
    pub levels: Vec<Vec<Vec<Vec<u32>>>>,
}
