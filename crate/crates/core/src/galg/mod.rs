//! The group algebra KG over a finite field, its augmentation ideal I and
//! the powers I ⊇ I² ⊇ ... ⊇ 0.

mod expr;
mod filtration;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{Field, FieldSpec, Scalar};
use crate::grp::{Group, GroupSpec};

pub use expr::{parse_element, ExprError};
pub use filtration::{compute_filtration, DimensionSubgroupReport, Filtration, FiltrationReport, Level};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operands belong to different group algebras")]
    Mismatch,
    #[error("coefficient vector has length {got}, group has order {order}")]
    Length { got: usize, order: usize },
    #[error("scalar outside the field")]
    ForeignScalar,
    #[error("field characteristic {field} does not divide |G| = {order}; the augmentation ideal is not nilpotent")]
    Unsupported { field: u32, order: usize },
    #[error("group was not built from a catalog literal")]
    Unnamed,
}

/// The algebra K[G]: a group and a field.
#[derive(Debug)]
pub struct GroupAlgebra {
    group: Arc<Group>,
    field: Arc<Field>,
}

impl PartialEq for GroupAlgebra {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.group, &other.group) || self.group == other.group)
            && (Arc::ptr_eq(&self.field, &other.field) || self.field == other.field)
    }
}

impl GroupAlgebra {
    pub fn new(group: Arc<Group>, field: Arc<Field>) -> Arc<GroupAlgebra> {
        Arc::new(GroupAlgebra { group, field })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.group.order()
    }

    /// Raw product of coefficient vectors through the Cayley table.
    pub fn mul_raw(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::ZERO; x.len()];
        self.mul_acc(x, y, &mut out);
        out
    }

    /// `out += x · y`.
    pub fn mul_acc(&self, x: &[Scalar], y: &[Scalar], out: &mut [Scalar]) {
        let f = &*self.field;
        let nz: Vec<(usize, Scalar)> = y.iter().enumerate().filter(|(_, s)| !s.is_zero()).map(|(i, &s)| (i, s)).collect();
        for (h, &xh) in x.iter().enumerate() {
            if xh.is_zero() {
                continue;
            }
            let row = self.group.row(h);
            for &(k, yk) in &nz {
                let g = row[k] as usize;
                out[g] = f.add(out[g], f.mul(xh, yk));
            }
        }
    }

    pub fn add_raw(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        x.iter().zip(y).map(|(&a, &b)| self.field.add(a, b)).collect()
    }

    pub fn sub_raw(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        x.iter().zip(y).map(|(&a, &b)| self.field.sub(a, b)).collect()
    }

    pub fn from_coeffs(self: &Arc<Self>, coeffs: Vec<Scalar>) -> Result<AlgebraElement, AlgebraError> {
        if coeffs.len() != self.dim() {
            return Err(AlgebraError::Length { got: coeffs.len(), order: self.dim() });
        }
        if coeffs.iter().any(|&s| !self.field.contains(s)) {
            return Err(AlgebraError::ForeignScalar);
        }
        Ok(AlgebraElement { algebra: Arc::clone(self), coeffs })
    }

    pub(crate) fn wrap(self: &Arc<Self>, coeffs: Vec<Scalar>) -> AlgebraElement {
        debug_assert_eq!(coeffs.len(), self.dim());
        AlgebraElement { algebra: Arc::clone(self), coeffs }
    }

    pub fn zero(self: &Arc<Self>) -> AlgebraElement {
        self.wrap(vec![Scalar::ZERO; self.dim()])
    }

    pub fn scalar(self: &Arc<Self>, s: Scalar) -> AlgebraElement {
        let mut c = vec![Scalar::ZERO; self.dim()];
        c[self.group.identity()] = s;
        self.wrap(c)
    }

    pub fn one(self: &Arc<Self>) -> AlgebraElement {
        self.scalar(Scalar::ONE)
    }

    /// The group element `g` as an algebra element.
    pub fn basis(self: &Arc<Self>, g: usize) -> AlgebraElement {
        let mut c = vec![Scalar::ZERO; self.dim()];
        c[g] = Scalar::ONE;
        self.wrap(c)
    }

    /// `g − 1`.
    pub fn embed_aug(self: &Arc<Self>, g: usize) -> AlgebraElement {
        let mut c = vec![Scalar::ZERO; self.dim()];
        c[g] = self.field.add(c[g], Scalar::ONE);
        let e = self.group.identity();
        c[e] = self.field.sub(c[e], Scalar::ONE);
        self.wrap(c)
    }

    /// `a − 1` and `b − 1` for the designated generators.
    pub fn generator_aug(self: &Arc<Self>, i: usize) -> Option<AlgebraElement> {
        self.group.generators().get(i).map(|&g| self.embed_aug(g))
    }

    fn check(&self, other: &GroupAlgebra) -> Result<(), AlgebraError> {
        if std::ptr::eq(self, other) || self == other {
            Ok(())
        } else {
            Err(AlgebraError::Mismatch)
        }
    }
}

/// An element of KG as a dense coefficient vector indexed by group element.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    algebra: Arc<GroupAlgebra>,
    coeffs: Vec<Scalar>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && *self.algebra == *other.algebra
    }
}

impl Eq for AlgebraElement {}

impl AlgebraElement {
    pub fn algebra(&self) -> &Arc<GroupAlgebra> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Scalar> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|s| s.is_zero())
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> Scalar {
        let f = &self.algebra.field;
        self.coeffs.iter().fold(Scalar::ZERO, |acc, &s| f.add(acc, s))
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&g| !self.coeffs[g].is_zero()).collect()
    }

    pub fn try_add(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.algebra.check(&other.algebra)?;
        Ok(self.algebra.wrap(self.algebra.add_raw(&self.coeffs, &other.coeffs)))
    }

    pub fn try_sub(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.algebra.check(&other.algebra)?;
        Ok(self.algebra.wrap(self.algebra.sub_raw(&self.coeffs, &other.coeffs)))
    }

    pub fn try_mul(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        self.algebra.check(&other.algebra)?;
        Ok(self.algebra.wrap(self.algebra.mul_raw(&self.coeffs, &other.coeffs)))
    }

    pub fn scale(&self, s: Scalar) -> Result<AlgebraElement, AlgebraError> {
        let f = &self.algebra.field;
        if !f.contains(s) {
            return Err(AlgebraError::ForeignScalar);
        }
        Ok(self.algebra.wrap(self.coeffs.iter().map(|&c| f.mul(c, s)).collect()))
    }

    pub fn pow(&self, k: u32) -> AlgebraElement {
        (0..k).fold(self.algebra.one(), |acc, _| &acc * self)
    }

    /// Compact display like `1 + a + x*a*b`, using group labels.
    pub fn display(&self) -> String {
        let f = &self.algebra.field;
        let g = &self.algebra.group;
        let terms: Vec<String> = self
            .support()
            .into_iter()
            .map(|i| {
                let c = self.coeffs[i];
                let label = g.label(i);
                match (c == Scalar::ONE, label == "1") {
                    (true, _) => label.to_string(),
                    (false, true) => f.display(c),
                    (false, false) => format!("{}*{}", wrap_scalar(&f.display(c)), label),
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

fn wrap_scalar(s: &str) -> String {
    if s.contains('+') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;

            fn $method(self, rhs: &AlgebraElement) -> AlgebraElement {
                self.$checked(rhs).expect("operands from different group algebras")
            }
        }

        impl $tr<AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;

            fn $method(self, rhs: AlgebraElement) -> AlgebraElement {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        let f = &self.algebra.field;
        self.algebra.wrap(self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }
}

/// Serialized element `{group, field, coeffs}` with degree-descending scalar lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementReport {
    pub group: GroupSpec,
    pub field: FieldSpec,
    pub coeffs: Vec<Vec<u32>>,
}

impl ElementReport {
    pub fn from_element(x: &AlgebraElement) -> Result<Self, AlgebraError> {
        let kg = x.algebra();
        Ok(ElementReport {
            group: kg.group.spec().cloned().ok_or(AlgebraError::Unnamed)?,
            field: kg.field.spec().clone(),
            coeffs: encode_coeffs(&kg.field, x.coeffs()),
        })
    }
}

pub fn encode_coeffs(field: &Field, coeffs: &[Scalar]) -> Vec<Vec<u32>> {
    coeffs.iter().map(|&s| field.coeffs(s)).collect()
}

pub fn decode_coeffs(kg: &Arc<GroupAlgebra>, coeffs: &[Vec<u32>]) -> Result<AlgebraElement, AlgebraError> {
    let scalars = coeffs
        .iter()
        .map(|c| kg.field.from_coeffs(c).map_err(|_| AlgebraError::ForeignScalar))
        .collect::<Result<Vec<_>, _>>()?;
    kg.from_coeffs(scalars)
}
