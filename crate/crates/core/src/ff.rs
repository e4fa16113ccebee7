//! Exact arithmetic in finite fields GF(p^k).
//!
//! A field element is stored as the integer `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`
//! where `c_i` is the coefficient of `x^i` in its residue modulo the defining
//! polynomial. Integer order on this encoding is lexicographic order on the
//! degree-descending coefficient list, which is the enumeration order used
//! everywhere else in the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted unless a caller asks for more.
pub const DEFAULT_FIELD_BOUND: u64 = 1 << 16;

/// Tables for addition and multiplication are precomputed up to this order.
const TABLE_LIMIT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{k} exceeds the bound {bound}")]
    TooLarge { p: u64, k: u32, bound: u64 },
    #[error("modulus must be monic of degree {expected} (got {got} coefficients)")]
    BadModulus { expected: u32, got: usize },
    #[error("modulus {0:?} is reducible over Z_p")]
    Reducible(Vec<u32>),
    #[error("coefficient {value} is not reduced modulo {p}")]
    Unreduced { value: u32, p: u32 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("scalar {0} does not belong to this field")]
    Foreign(u32),
    #[error("wrong operand count for {op}: expected {expected}")]
    Arity { op: &'static str, expected: usize },
    #[error("malformed field literal {0:?}")]
    Literal(String),
}

/// Description of GF(p^k): characteristic, degree, and the defining
/// polynomial (degree-descending, monic) when `k > 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    characteristic: u32,
    degree: u32,
    modulus: Option<Vec<u32>>,
}

impl FieldSpec {
    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Defining polynomial as degree-descending coefficients `[1, c_{k-1}, ..., c_0]`.
    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    pub fn order(&self) -> u32 {
        self.characteristic.pow(self.degree)
    }
}

/// Builds GF(p^k) with the smallest monic irreducible modulus in
/// lexicographic coefficient order.
pub fn make_field(p: u64, k: u32) -> Result<FieldSpec, FieldError> {
    make_field_bounded(p, k, DEFAULT_FIELD_BOUND)
}

pub fn make_field_bounded(p: u64, k: u32, bound: u64) -> Result<FieldSpec, FieldError> {
    let p = check_order(p, k, bound)?;
    if k == 1 {
        return Ok(FieldSpec { characteristic: p, degree: 1, modulus: None });
    }
    let count = p.pow(k);
    for tail in 0..count {
        let mut modulus = vec![1u32];
        modulus.extend(digits_desc(tail, p, k));
        if is_irreducible(&modulus, p) {
            return Ok(FieldSpec { characteristic: p, degree: k, modulus: Some(modulus) });
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Builds GF(p^k) from a caller-supplied modulus (degree-descending).
pub fn make_field_with_modulus(p: u64, k: u32, modulus: &[u32]) -> Result<FieldSpec, FieldError> {
    let p = check_order(p, k, DEFAULT_FIELD_BOUND)?;
    if modulus.len() != k as usize + 1 || modulus[0] != 1 {
        return Err(FieldError::BadModulus { expected: k, got: modulus.len() });
    }
    if let Some(&value) = modulus.iter().find(|&&c| c >= p) {
        return Err(FieldError::Unreduced { value, p });
    }
    if k == 1 {
        return Ok(FieldSpec { characteristic: p, degree: 1, modulus: None });
    }
    if !is_irreducible(modulus, p) {
        return Err(FieldError::Reducible(modulus.to_vec()));
    }
    Ok(FieldSpec { characteristic: p, degree: k, modulus: Some(modulus.to_vec()) })
}

fn check_order(p: u64, k: u32, bound: u64) -> Result<u32, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if k == 0 {
        return Err(FieldError::ZeroDegree);
    }
    let too_large = FieldError::TooLarge { p, k, bound };
    match p.checked_pow(k) {
        Some(q) if q <= bound && q <= u32::MAX as u64 => Ok(p as u32),
        _ => Err(too_large),
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Base-p digits of `value`, most significant first, padded to `len`.
fn digits_desc(mut value: u32, p: u32, len: u32) -> Vec<u32> {
    let mut out = vec![0; len as usize];
    for slot in out.iter_mut().rev() {
        *slot = value % p;
        value /= p;
    }
    out
}

// Polynomials below are ascending coefficient vectors over Z_p, trimmed.

fn trim(poly: &mut Vec<u32>) {
    while poly.last() == Some(&0) {
        poly.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(base: u32, mut exp: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Remainder of `num` by `den` (both ascending, `den` nonzero).
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut rem = num.to_vec();
    trim(&mut rem);
    let mut den = den.to_vec();
    trim(&mut den);
    let dl = den.len();
    let lead_inv = inv_mod_p(*den.last().unwrap(), p);
    while rem.len() >= dl {
        let shift = rem.len() - dl;
        let factor = (*rem.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &c) in den.iter().enumerate() {
            let sub = (factor as u64 * c as u64 % p as u64) as u32;
            rem[shift + i] = (rem[shift + i] + p - sub) % p;
        }
        trim(&mut rem);
    }
    rem
}

/// Trial division by every monic polynomial of degree 1..=k/2.
fn is_irreducible(modulus_desc: &[u32], p: u32) -> bool {
    let k = modulus_desc.len() as u32 - 1;
    let poly: Vec<u32> = modulus_desc.iter().rev().copied().collect();
    for d in 1..=k / 2 {
        for tail in 0..p.pow(d) {
            let mut divisor: Vec<u32> = digits_desc(tail, p, d).into_iter().rev().collect();
            divisor.push(1);
            if poly_rem(&poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// A field element. The wrapped value is the base-p encoding described in
/// the module docs; it is always reduced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(pub(crate) u32);

impl Scalar {
    pub const ZERO: Scalar = Scalar(0);
    pub const ONE: Scalar = Scalar(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Operations accepted by [`scalar_arithmetic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Neg,
    Mul,
    Inv,
    Pow(u64),
}

/// A realized finite field with arithmetic tables.
#[derive(Clone, Debug)]
pub struct Field {
    spec: FieldSpec,
    order: u32,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
    neg: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(p: u64, k: u32) -> Result<Field, FieldError> {
        Ok(Field::from_spec(make_field(p, k)?))
    }

    pub fn prime(p: u64) -> Result<Field, FieldError> {
        Field::new(p, 1)
    }

    pub fn from_spec(spec: FieldSpec) -> Field {
        let p = spec.characteristic;
        let k = spec.degree;
        let q = spec.order();
        let modulus_asc: Vec<u32> = match &spec.modulus {
            Some(m) => m.iter().rev().copied().collect(),
            None => vec![0, 1],
        };
        let slow_mul = |a: u32, b: u32| -> u32 {
            if k == 1 {
                return ((a as u64 * b as u64) % p as u64) as u32;
            }
            let da: Vec<u32> = digits_desc(a, p, k).into_iter().rev().collect();
            let db: Vec<u32> = digits_desc(b, p, k).into_iter().rev().collect();
            let mut prod = vec![0u32; 2 * k as usize];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
                }
            }
            let rem = poly_rem(&prod, &modulus_asc, p);
            rem.iter().rev().fold(0u32, |acc, &c| acc * p + c)
        };

        let mut neg = vec![0u32; q as usize];
        for (v, slot) in neg.iter_mut().enumerate() {
            let digits = digits_desc(v as u32, p, k);
            *slot = digits.iter().fold(0u32, |acc, &c| acc * p + (p - c) % p);
        }

        // Primitive element: first g whose order is exactly q - 1.
        let group_order = q - 1;
        let prime_factors: Vec<u32> = (2..=group_order)
            .filter(|&d| group_order.is_multiple_of(d) && is_prime(d as u64))
            .collect();
        let slow_pow = |base: u32, mut e: u32| -> u32 {
            let mut acc = 1u32;
            let mut b = base;
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(acc, b);
                }
                b = slow_mul(b, b);
                e >>= 1;
            }
            acc
        };
        let generator = (1..q)
            .find(|&g| prime_factors.iter().all(|&f| slow_pow(g, group_order / f) != 1))
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; group_order as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = cur;
            log[cur as usize] = i as u32;
            cur = slow_mul(cur, generator);
        }

        let mut field = Field { spec, order: q, add_table: None, mul_table: None, neg, exp, log };
        if q <= TABLE_LIMIT {
            let mut add = vec![0u32; (q * q) as usize];
            let mut mul = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    add[(a * q + b) as usize] = field.add_digits(a, b);
                    mul[(a * q + b) as usize] = field.mul_logs(a, b);
                }
            }
            field.add_table = Some(add);
            field.mul_table = Some(mul);
        }
        field
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.spec.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn contains(&self, s: Scalar) -> bool {
        s.0 < self.order
    }

    /// The element with integer encoding `index`.
    pub fn scalar(&self, index: u32) -> Option<Scalar> {
        (index < self.order).then_some(Scalar(index))
    }

    /// All elements in enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = Scalar> {
        (0..self.order).map(Scalar)
    }

    fn add_digits(&self, mut a: u32, mut b: u32) -> u32 {
        let p = self.spec.characteristic;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.spec.degree {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    fn mul_logs(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.exp.len() as u32;
        self.exp[((self.log[a as usize] + self.log[b as usize]) % n) as usize]
    }

    #[inline]
    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        if self.spec.characteristic == 2 {
            return Scalar(a.0 ^ b.0);
        }
        match &self.add_table {
            Some(t) => Scalar(t[(a.0 * self.order + b.0) as usize]),
            None => Scalar(self.add_digits(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Scalar) -> Scalar {
        Scalar(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        match &self.mul_table {
            Some(t) => Scalar(t[(a.0 * self.order + b.0) as usize]),
            None => Scalar(self.mul_logs(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: Scalar) -> Result<Scalar, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let n = self.exp.len() as u32;
        Ok(Scalar(self.exp[((n - self.log[a.0 as usize]) % n) as usize]))
    }

    pub fn pow(&self, a: Scalar, e: u64) -> Scalar {
        if e == 0 {
            return Scalar::ONE;
        }
        if a.is_zero() {
            return Scalar::ZERO;
        }
        let n = self.exp.len() as u64;
        let l = self.log[a.0 as usize] as u64;
        Scalar(self.exp[((l * (e % n)) % n) as usize])
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> Scalar {
        Scalar(v.rem_euclid(self.spec.characteristic as i64) as u32)
    }

    /// The class of `x` modulo the defining polynomial; `None` for prime fields.
    pub fn generator_x(&self) -> Option<Scalar> {
        (self.spec.degree > 1).then_some(Scalar(self.spec.characteristic))
    }

    /// Degree-descending coefficient list of length k.
    pub fn coeffs(&self, s: Scalar) -> Vec<u32> {
        digits_desc(s.0, self.spec.characteristic, self.spec.degree)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Scalar, FieldError> {
        let p = self.spec.characteristic;
        if coeffs.len() > self.spec.degree as usize {
            return Err(FieldError::Foreign(coeffs.len() as u32));
        }
        let mut v = 0u32;
        for &c in coeffs {
            if c >= p {
                return Err(FieldError::Unreduced { value: c, p });
            }
            v = v * p + c;
        }
        Ok(Scalar(v))
    }

    /// First ω (in enumeration order) with ω³ = 1 and ω ≠ 1.
    pub fn primitive_cube_root(&self) -> Option<Scalar> {
        self.elements().find(|&s| s != Scalar::ONE && !s.is_zero() && self.pow(s, 3) == Scalar::ONE)
    }

    /// Nonzero elements whose multiplicative order divides `n`.
    pub fn roots_of_unity(&self, n: u64) -> Vec<Scalar> {
        self.elements().filter(|&s| !s.is_zero() && self.pow(s, n) == Scalar::ONE).collect()
    }

    /// Human-readable form: integers for prime fields, polynomials in x otherwise.
    pub fn display(&self, s: Scalar) -> String {
        if self.spec.degree == 1 {
            return s.0.to_string();
        }
        let coeffs = self.coeffs(s);
        let k = coeffs.len();
        let terms: Vec<String> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                let deg = k - 1 - i;
                let mono = match deg {
                    0 => String::new(),
                    1 => "x".to_string(),
                    d => format!("x^{d}"),
                };
                match (c, deg) {
                    (_, 0) => c.to_string(),
                    (1, _) => mono,
                    _ => format!("{c}{mono}"),
                }
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    }
}

/// Checked front end over the field operations.
pub fn scalar_arithmetic(field: &Field, op: ScalarOp, operands: &[Scalar]) -> Result<Scalar, FieldError> {
    if let Some(s) = operands.iter().find(|s| !field.contains(**s)) {
        return Err(FieldError::Foreign(s.0));
    }
    let want = |n: usize, name: &'static str| {
        if operands.len() == n {
            Ok(())
        } else {
            Err(FieldError::Arity { op: name, expected: n })
        }
    };
    match op {
        ScalarOp::Add => {
            want(2, "add")?;
            Ok(field.add(operands[0], operands[1]))
        }
        ScalarOp::Mul => {
            want(2, "mul")?;
            Ok(field.mul(operands[0], operands[1]))
        }
        ScalarOp::Neg => {
            want(1, "neg")?;
            Ok(field.neg(operands[0]))
        }
        ScalarOp::Inv => {
            want(1, "inv")?;
            field.inv(operands[0])
        }
        ScalarOp::Pow(e) => {
            want(1, "pow")?;
            Ok(field.pow(operands[0], e))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let default = make_field(self.characteristic as u64, self.degree).ok();
        match &self.modulus {
            Some(modulus) if default.as_ref() != Some(self) => {
                let m: Vec<String> = modulus.iter().map(u32::to_string).collect();
                write!(f, "gf({}^{};modulus={})", self.characteristic, self.degree, m.join(","))
            }
            _ => write!(f, "gf({})", self.order()),
        }
    }
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    /// Accepts `gf(q)`, `gf(p^k)` and `gf(p^k;modulus=c_k,...,c_0)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::Literal(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .to_ascii_lowercase()
            .strip_prefix("gf(")
            .and_then(|r| r.strip_suffix(')'))
            .map(str::to_string)
            .ok_or_else(bad)?;
        let (size, options) = match inner.split_once(';') {
            Some((a, b)) => (a.to_string(), Some(b.to_string())),
            None => (inner, None),
        };
        let (p, k) = match size.split_once('^') {
            Some((p, k)) => (p.parse().map_err(|_| bad())?, k.parse().map_err(|_| bad())?),
            None => {
                let q: u64 = size.parse().map_err(|_| bad())?;
                prime_power(q).ok_or(FieldError::NotPrime(q))?
            }
        };
        match options {
            None => make_field(p, k),
            Some(opt) => {
                let list = opt.strip_prefix("modulus=").ok_or_else(bad)?;
                let coeffs = list
                    .split(',')
                    .map(|c| c.parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                make_field_with_modulus(p, k, &coeffs)
            }
        }
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
