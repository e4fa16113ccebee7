//! Reduced row-echelon bases over a finite field.
//!
//! Pivots are the leftmost nonzero entry of each row and every pivot column
//! is cleared in all other rows, so the row list is the unique RREF of the
//! spanned subspace regardless of insertion order.

use crate::ff::{Field, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EchelonBasis {
    width: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(width: usize) -> Self {
        EchelonBasis { width, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn identity(width: usize) -> Self {
        let rows = (0..width)
            .map(|i| {
                let mut r = vec![Scalar::ZERO; width];
                r[i] = Scalar::ONE;
                r
            })
            .collect();
        EchelonBasis { width, rows, pivots: (0..width).collect() }
    }

    pub fn span<'a>(field: &Field, width: usize, vectors: impl IntoIterator<Item = &'a [Scalar]>) -> Self {
        let mut basis = EchelonBasis::new(width);
        for v in vectors {
            basis.insert(field, v.to_vec());
        }
        basis
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Clears every pivot column of `v`. The result is zero iff `v` lies in the span.
    pub fn reduce(&self, field: &Field, v: &mut [Scalar]) {
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v[pc];
            if c.is_zero() {
                continue;
            }
            let f = field.neg(c);
            for (x, &r) in v.iter_mut().zip(row).skip(pc) {
                if !r.is_zero() {
                    *x = field.add(*x, field.mul(f, r));
                }
            }
        }
    }

    pub fn contains(&self, field: &Field, v: &[Scalar]) -> bool {
        let mut w = v.to_vec();
        self.reduce(field, &mut w);
        w.iter().all(|s| s.is_zero())
    }

    /// Adds `v` to the span; returns false when it was already there.
    pub fn insert(&mut self, field: &Field, mut v: Vec<Scalar>) -> bool {
        debug_assert_eq!(v.len(), self.width);
        self.reduce(field, &mut v);
        let Some(pc) = v.iter().position(|s| !s.is_zero()) else {
            return false;
        };
        let inv = field.inv(v[pc]).expect("pivot is nonzero");
        for x in v.iter_mut().skip(pc) {
            *x = field.mul(*x, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[pc];
            if c.is_zero() {
                continue;
            }
            let f = field.neg(c);
            for (x, &r) in row.iter_mut().zip(&v).skip(pc) {
                *x = field.add(*x, field.mul(f, r));
            }
        }
        let at = self.pivots.partition_point(|&p| p < pc);
        self.pivots.insert(at, pc);
        self.rows.insert(at, v);
        true
    }

    /// Coordinates of `v` against the rows, or `None` if `v` is outside the span.
    pub fn coordinates(&self, field: &Field, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let coords: Vec<Scalar> = self.pivots.iter().map(|&pc| v[pc]).collect();
        let mut w = v.to_vec();
        self.reduce(field, &mut w);
        w.iter().all(|s| s.is_zero()).then_some(coords)
    }
}

/// A nontrivial relation `Σ c_i v_i = 0`, if the vectors are dependent.
pub fn find_dependence(field: &Field, vectors: &[Vec<Scalar>]) -> Option<Vec<Scalar>> {
    let n = vectors.len();
    let width = vectors.first().map_or(0, Vec::len);
    // Each working row carries [vector | combination] so the relation falls out.
    let augmented: Vec<Vec<Scalar>> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row = v.clone();
            row.extend((0..n).map(|j| if i == j { Scalar::ONE } else { Scalar::ZERO }));
            row
        })
        .collect();
    let mut basis = EchelonBasis::new(width + n);
    for row in augmented {
        let mut r = row.clone();
        basis.reduce(field, &mut r);
        if r[..width].iter().all(|s| s.is_zero()) {
            return Some(r[width..].to_vec());
        }
        basis.insert(field, row);
    }
    None
}
