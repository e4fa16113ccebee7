//! Small finite p-groups as validated Cayley tables.
//!
//! Metacyclic groups `<a, b | a^{p^n} = 1, b^{p^m} = a^{p^t}, b a b^-1 = a^r>`
//! are built from their normal-form multiplication law. Everything else that
//! comes from a presentation goes through [`Presentation::close`], which
//! enumerates normal forms under a terminating rewriting system and reads the
//! multiplication table off the reduced concatenations.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::is_prime;

pub const DEFAULT_ORDER_BOUND: usize = 64;

/// Associativity is scanned on all triples up to this order.
const ASSOCIATIVITY_SCAN_LIMIT: usize = 64;

const REWRITE_STEP_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("group order {order} exceeds the bound {bound}")]
    TooLarge { order: usize, bound: usize },
    #[error("word closure exceeded {bound} elements")]
    ClosureOverflow { bound: usize },
    #[error("rewriting did not terminate within {0} steps")]
    RewriteLimit(usize),
    #[error("invalid group table: {0}")]
    Invalid(String),
    #[error("malformed group literal {0:?}")]
    Literal(String),
}

/// Symbolic description of a group in the catalog.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupSpec {
    Metacyclic { p: u32, n: u32, m: u32, t: u32, r: u64 },
    Dihedral { n: u32 },
    Semidihedral { n: u32 },
    GeneralizedQuaternion { n: u32 },
    Quaternion8,
    /// `b² = a^{2^{n-1}}`, `b a b⁻¹ = a^{-1+2^{n-1}}`.
    SemidihedralTwisted { n: u32 },
    Abelian { orders: Vec<u32> },
    Example16,
    DirectProduct { left: Box<GroupSpec>, right: Box<GroupSpec> },
}

impl GroupSpec {
    /// Metacyclic parameters `(p, n, m, t, r)` for the specs that have them.
    pub fn metacyclic_params(&self) -> Option<(u32, u32, u32, u32, u64)> {
        let two = |e: u32| 1u64 << e;
        match *self {
            GroupSpec::Metacyclic { p, n, m, t, r } => Some((p, n, m, t, r)),
            GroupSpec::Dihedral { n } => Some((2, n, 1, n, two(n) - 1)),
            GroupSpec::Semidihedral { n } => Some((2, n, 1, n, two(n - 1) - 1)),
            GroupSpec::GeneralizedQuaternion { n } => Some((2, n, 1, n - 1, two(n) - 1)),
            GroupSpec::Quaternion8 => Some((2, 2, 1, 1, 3)),
            GroupSpec::SemidihedralTwisted { n } => Some((2, n, 1, n - 1, two(n - 1) - 1)),
            _ => None,
        }
    }

    fn check_shortcut(&self) -> Result<(), GroupError> {
        let (name, n, min) = match *self {
            GroupSpec::Dihedral { n } => ("dihedral", n, 2),
            GroupSpec::Semidihedral { n } => ("semidihedral", n, 3),
            GroupSpec::GeneralizedQuaternion { n } => ("genquaternion", n, 2),
            GroupSpec::SemidihedralTwisted { n } => ("sdtwisted", n, 3),
            _ => return Ok(()),
        };
        if n < min {
            return Err(GroupError::Constraint(format!("{name} requires n >= {min}, got n = {n}")));
        }
        Ok(())
    }
}

fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1 % modulus;
    let mut b = base % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % modulus;
        }
        b = b * b % modulus;
        exp >>= 1;
    }
    acc
}

/// Checks the two congruences a metacyclic presentation must satisfy.
pub fn check_metacyclic(p: u32, n: u32, m: u32, t: u32, r: u64) -> Result<(), GroupError> {
    if !is_prime(p as u64) {
        return Err(GroupError::Constraint(format!("p = {p} is not prime")));
    }
    if n == 0 || m == 0 {
        return Err(GroupError::Constraint("n and m must be positive".into()));
    }
    let big = |e: u32| (p as u64).checked_pow(e).filter(|v| *v <= 1 << 40);
    let (pn, pm) = match (big(n), big(m)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(GroupError::Constraint("parameters too large".into())),
    };
    let rr = r % pn;
    if pow_mod(rr, pm, pn) != 1 % pn {
        return Err(GroupError::Constraint(format!(
            "r^(p^m) = {r}^{pm} ≢ 1 (mod p^n = {pn})"
        )));
    }
    let pt = pow_mod(p as u64, t as u64, pn);
    if !(pt * ((rr + pn - 1) % pn)).is_multiple_of(pn) {
        return Err(GroupError::Constraint(format!(
            "p^t·(r-1) = {p}^{t}·({r}-1) ≢ 0 (mod p^n = {pn})"
        )));
    }
    Ok(())
}

/// A finite group given by its multiplication table. Element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    spec: Option<GroupSpec>,
    prime: u32,
    order: usize,
    table: Vec<u32>,
    inverse: Vec<usize>,
    generators: Vec<usize>,
    labels: Vec<String>,
}

impl Group {
    /// Validates a raw table. `table[g * order + h]` is the index of `g·h`.
    pub fn from_table(
        spec: Option<GroupSpec>,
        table: Vec<u32>,
        generators: Vec<usize>,
        labels: Vec<String>,
    ) -> Result<Group, GroupError> {
        let order = labels.len();
        let invalid = |msg: String| Err(GroupError::Invalid(msg));
        if order == 0 || table.len() != order * order {
            return invalid(format!("table has {} entries for {order} elements", table.len()));
        }
        if table.iter().any(|&x| x as usize >= order) {
            return invalid("table entry out of range".into());
        }
        // identity must be element 0
        for g in 0..order {
            if table[g] as usize != g || table[g * order] as usize != g {
                return invalid("element 0 is not the identity".into());
            }
        }
        // Latin square
        let mut seen = vec![0usize; order];
        for (stamp, g) in (1..).zip(0..order) {
            for h in 0..order {
                let x = table[g * order + h] as usize;
                if seen[x] == stamp {
                    return invalid(format!("row {g} repeats element {x}"));
                }
                seen[x] = stamp;
            }
        }
        seen.iter_mut().for_each(|s| *s = 0);
        for (stamp, h) in (1..).zip(0..order) {
            for g in 0..order {
                let x = table[g * order + h] as usize;
                if seen[x] == stamp {
                    return invalid(format!("column {h} repeats element {x}"));
                }
                seen[x] = stamp;
            }
        }
        if order <= ASSOCIATIVITY_SCAN_LIMIT {
            for a in 0..order {
                for b in 0..order {
                    let ab = table[a * order + b] as usize;
                    for c in 0..order {
                        let bc = table[b * order + c] as usize;
                        if table[ab * order + c] != table[a * order + bc] {
                            return invalid(format!("associativity fails on ({a}, {b}, {c})"));
                        }
                    }
                }
            }
        }
        let mut inverse = vec![0usize; order];
        for g in 0..order {
            let h = (0..order).find(|&h| table[g * order + h] == 0).unwrap();
            if table[h * order + g] != 0 {
                return invalid(format!("left and right inverse of {g} differ"));
            }
            inverse[g] = h;
        }
        let prime = match prime_power_base(order) {
            Some(p) => p,
            None if order == 1 => 1,
            None => return invalid(format!("order {order} is not a prime power")),
        };
        let group = Group { spec, prime, order, table, inverse, generators, labels };
        if group.subgroup(&group.generators).len() != order {
            return invalid("designated generators do not generate the group".into());
        }
        Ok(group)
    }

    pub fn spec(&self) -> Option<&GroupSpec> {
        self.spec.as_ref()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The prime p with |G| a power of p.
    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g * self.order + h] as usize
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn pow(&self, g: usize, k: u64) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, g))
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn row(&self, g: usize) -> &[u32] {
        &self.table[g * self.order..(g + 1) * self.order]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn gen_a(&self) -> Option<usize> {
        self.generators.first().copied()
    }

    pub fn gen_b(&self) -> Option<usize> {
        self.generators.get(1).copied()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, g: usize, h: usize) -> usize {
        let gh = self.mul(g, h);
        let gi_hi = self.mul(self.inv(g), self.inv(h));
        self.mul(gh, gi_hi)
    }

    /// `g h g⁻¹`.
    pub fn conjugate(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|g| (0..g).all(|h| self.mul(g, h) == self.mul(h, g)))
    }

    /// Sorted element list of the subgroup generated by `gens`.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut member = vec![false; self.order];
        member[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !member[y] {
                    member[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order).filter(|&g| member[g]).collect()
    }

    pub fn derived_subgroup(&self) -> Vec<usize> {
        let comms: Vec<usize> = (0..self.order)
            .flat_map(|g| (0..self.order).map(move |h| (g, h)))
            .map(|(g, h)| self.commutator(g, h))
            .collect();
        self.subgroup(&comms)
    }

    /// Whether `G/N` is cyclic for a normal subgroup `N` given as a sorted list.
    pub fn quotient_is_cyclic(&self, normal: &[usize]) -> bool {
        let index = self.order / normal.len();
        let mut member = vec![false; self.order];
        normal.iter().for_each(|&g| member[g] = true);
        (0..self.order).any(|g| {
            let mut x = g;
            let mut k = 1;
            while !member[x] {
                x = self.mul(x, g);
                k += 1;
            }
            k == index
        })
    }

    pub fn is_normal(&self, sub: &[usize]) -> bool {
        let mut member = vec![false; self.order];
        sub.iter().for_each(|&g| member[g] = true);
        (0..self.order).all(|g| sub.iter().all(|&h| member[self.conjugate(g, h)]))
    }

    /// Jennings series `D_1 = G`, `D_n = [D_{n-1}, G] · D_{⌈n/p⌉}^p`, computed
    /// purely from the group table. The returned list stops at the first
    /// trivial term (which is included).
    pub fn jennings_series(&self) -> Vec<Vec<usize>> {
        let p = self.prime as usize;
        let mut series: Vec<Vec<usize>> = vec![(0..self.order).collect()];
        if self.order == 1 {
            return series;
        }
        loop {
            let n = series.len() + 1;
            let prev = &series[n - 2];
            let root = &series[n.div_ceil(p) - 1];
            let mut gens: Vec<usize> = prev
                .iter()
                .flat_map(|&x| (0..self.order).map(move |g| (x, g)))
                .map(|(x, g)| self.commutator(x, g))
                .collect();
            gens.extend(root.iter().map(|&x| self.pow(x, p as u64)));
            gens.sort_unstable();
            gens.dedup();
            let next = self.subgroup(&gens);
            let done = next.len() == 1;
            series.push(next);
            if done {
                return series;
            }
        }
    }

    /// Quotient dimensions of the augmentation filtration predicted from the
    /// Jennings series: coefficients of `∏_i (1 + x^i + ... + x^{i(p-1)})^{d_i}`
    /// with `p^{d_i} = [D_i : D_{i+1}]`.
    pub fn jennings_quotient_dims(&self) -> Vec<usize> {
        let p = self.prime as usize;
        let series = self.jennings_series();
        let mut poly = vec![1usize];
        for (i, pair) in series.windows(2).enumerate() {
            let weight = i + 1;
            let mut ratio = pair[0].len() / pair[1].len();
            while ratio > 1 {
                ratio /= p;
                let mut next = vec![0usize; poly.len() + weight * (p - 1)];
                for (deg, &c) in poly.iter().enumerate() {
                    for j in 0..p {
                        next[deg + j * weight] += c;
                    }
                }
                poly = next;
            }
        }
        while poly.len() > 1 && poly.last() == Some(&0) {
            poly.pop();
        }
        poly
    }
}

fn prime_power_base(n: usize) -> Option<u32> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|d| n.is_multiple_of(*d))?;
    let mut rest = n;
    while rest.is_multiple_of(p) {
        rest /= p;
    }
    (rest == 1).then_some(p as u32)
}

/// Word over generator indices.
pub type Word = Vec<u8>;

/// A rewriting system on words in named generators. Rules are applied at
/// the leftmost match, first rule first, until no left-hand side occurs.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub names: Vec<char>,
    pub rules: Vec<(Word, Word)>,
}

impl Presentation {
    pub fn reduce(&self, word: &[u8]) -> Result<Word, GroupError> {
        let mut w = word.to_vec();
        for _ in 0..REWRITE_STEP_LIMIT {
            let hit = (0..w.len()).find_map(|pos| {
                self.rules.iter().find(|(lhs, _)| w[pos..].starts_with(lhs)).map(|r| (pos, r))
            });
            match hit {
                None => return Ok(w),
                Some((pos, (lhs, rhs))) => {
                    w.splice(pos..pos + lhs.len(), rhs.iter().copied());
                }
            }
        }
        Err(GroupError::RewriteLimit(REWRITE_STEP_LIMIT))
    }

    /// Label of a normal-form word, e.g. `a^2*b^3`; the empty word is `1`.
    pub fn label(&self, word: &[u8]) -> String {
        if word.is_empty() {
            return "1".into();
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < word.len() {
            let j = (i..word.len()).find(|&j| word[j] != word[i]).unwrap_or(word.len());
            let name = self.names[word[i] as usize];
            parts.push(if j - i == 1 { name.to_string() } else { format!("{name}^{}", j - i) });
            i = j;
        }
        parts.join("*")
    }

    /// Enumerates normal forms reachable from the generators and builds the
    /// multiplication table. Normal forms are ordered by generator counts
    /// (last generator most significant), so `a^i b^j` lands at `i + |a|·j`.
    pub fn close(&self, spec: Option<GroupSpec>, bound: usize) -> Result<Group, GroupError> {
        let gens = self.names.len() as u8;
        let mut seen: HashMap<Word, ()> = HashMap::from([(Vec::new(), ())]);
        let mut queue = VecDeque::from([Vec::new()]);
        while let Some(w) = queue.pop_front() {
            for g in 0..gens {
                let mut next = w.clone();
                next.push(g);
                let nf = self.reduce(&next)?;
                if !seen.contains_key(&nf) {
                    if seen.len() >= bound {
                        return Err(GroupError::ClosureOverflow { bound });
                    }
                    seen.insert(nf.clone(), ());
                    queue.push_back(nf);
                }
            }
        }
        let mut words: Vec<Word> = seen.into_keys().collect();
        let key = |w: &Word| {
            let mut counts = vec![0usize; gens as usize];
            w.iter().for_each(|&g| counts[g as usize] += 1);
            counts.reverse();
            (counts, w.clone())
        };
        words.sort_by_key(key);
        let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let order = words.len();
        let mut table = vec![0u32; order * order];
        for (i, u) in words.iter().enumerate() {
            for (j, v) in words.iter().enumerate() {
                let mut uv = u.clone();
                uv.extend_from_slice(v);
                let nf = self.reduce(&uv)?;
                let k = *index.get(&nf).ok_or_else(|| {
                    GroupError::Invalid(format!("product {} is not a known normal form", self.label(&nf)))
                })?;
                table[i * order + j] = k as u32;
            }
        }
        let generators = (0..gens)
            .map(|g| {
                let nf = self.reduce(&[g])?;
                Ok(index[&nf])
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        let labels = words.iter().map(|w| self.label(w)).collect();
        Group::from_table(spec, table, generators, labels)
    }
}

/// Rewriting system for the metacyclic presentation:
/// `a^{p^n} → 1`, `b^{p^m} → a^{p^t}`, `b a → a^r b`.
pub fn metacyclic_presentation(p: u32, n: u32, m: u32, t: u32, r: u64) -> Presentation {
    let pn = (p as u64).pow(n);
    let pm = (p as u64).pow(m);
    let pt = pow_mod(p as u64, t as u64, pn);
    let a = |k: u64| vec![0u8; k as usize];
    let mut rb = a(r % pn);
    rb.push(1);
    Presentation {
        names: vec!['a', 'b'],
        rules: vec![(a(pn), vec![]), (vec![1; pm as usize], a(pt)), (vec![1, 0], rb)],
    }
}

/// Rewriting system for the order-16 group
/// `<a, b | a⁴ = b⁴ = 1, b a b⁻¹ = b² a³, a b a⁻¹ = a² b³, [a², b] = [b², a] = 1>`.
/// With `b²` central the conjugation relation becomes `b a = a³ b³`; the
/// extra rule `b² a → a b²` makes leftmost rewriting terminate.
pub fn example16_presentation() -> Presentation {
    Presentation {
        names: vec!['a', 'b'],
        rules: vec![
            (vec![0; 4], vec![]),
            (vec![1; 4], vec![]),
            (vec![1, 1, 0], vec![0, 1, 1]),
            (vec![1, 0], vec![0, 0, 0, 1, 1, 1]),
        ],
    }
}

fn metacyclic_group(spec: GroupSpec, params: (u32, u32, u32, u32, u64)) -> Result<Group, GroupError> {
    let (p, n, m, t, r) = params;
    let pn = (p as u64).pow(n);
    let pm = (p as u64).pow(m);
    let pt = pow_mod(p as u64, t as u64, pn);
    let r = r % pn;
    let order = (pn * pm) as usize;
    let r_pow: Vec<u64> = (0..pm).map(|j| pow_mod(r, j, pn)).collect();
    let idx = |i: u64, j: u64| (i + pn * j) as u32;
    let mut table = vec![0u32; order * order];
    for j in 0..pm {
        for i in 0..pn {
            for l in 0..pm {
                for k in 0..pn {
                    // a^i b^j · a^k b^l = a^{i + k r^j} b^{j + l}, with b^{p^m} = a^{p^t}
                    let mut e = i + k * r_pow[j as usize];
                    let mut f = j + l;
                    if f >= pm {
                        f -= pm;
                        e += pt;
                    }
                    table[idx(i, j) as usize * order + idx(k, l) as usize] = idx(e % pn, f);
                }
            }
        }
    }
    let pres = Presentation { names: vec!['a', 'b'], rules: vec![] };
    let labels = (0..pm)
        .flat_map(|j| (0..pn).map(move |i| (i, j)))
        .map(|(i, j)| {
            let mut w = vec![0u8; i as usize];
            w.extend(std::iter::repeat_n(1u8, j as usize));
            pres.label(&w)
        })
        .collect();
    let group = Group::from_table(Some(spec), table, vec![1, pn as usize], labels)?;
    let a_order = group.element_order(1) as u64;
    if a_order != pn || order as u64 != a_order * pm {
        return Err(GroupError::Invalid(format!(
            "|<a>| = {a_order} and [G:<a>] = {pm} do not multiply to {order}"
        )));
    }
    Ok(group)
}

fn abelian_group(spec: GroupSpec, orders: &[u32]) -> Result<Group, GroupError> {
    if orders.is_empty() {
        return Err(GroupError::Constraint("abelian spec needs at least one cyclic factor".into()));
    }
    let primes: Vec<Option<u32>> = orders.iter().map(|&q| prime_power_base(q as usize)).collect();
    if primes.iter().any(Option::is_none) || primes.windows(2).any(|w| w[0] != w[1]) {
        return Err(GroupError::Constraint(format!(
            "abelian orders {orders:?} must be powers of a single prime"
        )));
    }
    let order: usize = orders.iter().map(|&q| q as usize).product();
    let digits = |mut x: usize| -> Vec<usize> {
        orders
            .iter()
            .map(|&q| {
                let d = x % q as usize;
                x /= q as usize;
                d
            })
            .collect()
    };
    let encode = |ds: &[usize]| -> usize {
        ds.iter().zip(orders).rev().fold(0, |acc, (&d, &q)| acc * q as usize + d)
    };
    let mut table = vec![0u32; order * order];
    for g in 0..order {
        let dg = digits(g);
        for h in 0..order {
            let sum: Vec<usize> =
                digits(h).iter().zip(&dg).zip(orders).map(|((&x, &y), &q)| (x + y) % q as usize).collect();
            table[g * order + h] = encode(&sum) as u32;
        }
    }
    let names: Vec<char> = (0..orders.len()).map(generator_name).collect();
    let labels = (0..order)
        .map(|g| {
            let parts: Vec<String> = digits(g)
                .iter()
                .zip(&names)
                .filter(|(&d, _)| d > 0)
                .map(|(&d, c)| if d == 1 { c.to_string() } else { format!("{c}^{d}") })
                .collect();
            if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join("*")
            }
        })
        .collect();
    let mut generators = Vec::new();
    let mut place = 1;
    for &q in orders {
        generators.push(place);
        place *= q as usize;
    }
    Group::from_table(Some(spec), table, generators, labels)
}

/// Letter used for the i-th designated generator in labels and expressions.
pub fn generator_name(i: usize) -> char {
    (b'a' + i as u8) as char
}

/// `G × H` with `(g, h)` at index `g + |G|·h`.
pub fn direct_product(spec: Option<GroupSpec>, left: &Group, right: &Group) -> Result<Group, GroupError> {
    let (nl, nr) = (left.order, right.order);
    let order = nl * nr;
    let mut table = vec![0u32; order * order];
    for x in 0..order {
        for y in 0..order {
            let g = left.mul(x % nl, y % nl);
            let h = right.mul(x / nl, y / nl);
            table[x * order + y] = (g + nl * h) as u32;
        }
    }
    let labels = (0..order).map(|x| format!("({},{})", left.label(x % nl), right.label(x / nl))).collect();
    let mut generators: Vec<usize> = left.generators.clone();
    generators.extend(right.generators.iter().map(|&h| h * nl));
    Group::from_table(spec, table, generators, labels)
}

pub fn build_group(spec: &GroupSpec) -> Result<Group, GroupError> {
    build_group_bounded(spec, DEFAULT_ORDER_BOUND)
}

pub fn build_group_bounded(spec: &GroupSpec, bound: usize) -> Result<Group, GroupError> {
    spec.check_shortcut()?;
    let too_large = |order: usize| GroupError::TooLarge { order, bound };
    match spec {
        GroupSpec::Abelian { orders } => {
            let order = orders.iter().try_fold(1usize, |acc, &q| acc.checked_mul(q as usize));
            match order {
                Some(o) if o <= bound => abelian_group(spec.clone(), orders),
                Some(o) => Err(too_large(o)),
                None => Err(too_large(usize::MAX)),
            }
        }
        GroupSpec::Example16 => {
            if bound < 16 {
                return Err(too_large(16));
            }
            let group = example16_presentation().close(Some(spec.clone()), bound)?;
            check_example16_relations(&group)?;
            Ok(group)
        }
        GroupSpec::DirectProduct { left, right } => {
            let l = build_group_bounded(left, bound)?;
            let r = build_group_bounded(right, bound)?;
            if l.prime != r.prime {
                return Err(GroupError::Constraint(format!(
                    "direct factors are {}-group and {}-group",
                    l.prime, r.prime
                )));
            }
            if l.order * r.order > bound {
                return Err(too_large(l.order * r.order));
            }
            direct_product(Some(spec.clone()), &l, &r)
        }
        _ => {
            let params = spec.metacyclic_params().expect("remaining specs are metacyclic");
            let (p, n, m, t, r) = params;
            check_metacyclic(p, n, m, t, r)?;
            let order = (p as u128).pow(n + m);
            if order > bound as u128 {
                return Err(too_large(order.min(usize::MAX as u128) as usize));
            }
            metacyclic_group(spec.clone(), params)
        }
    }
}

fn check_example16_relations(g: &Group) -> Result<(), GroupError> {
    let (a, b) = (g.gen_a().unwrap(), g.gen_b().unwrap());
    let rel = |name: &str, lhs: usize, rhs: usize| {
        if lhs == rhs {
            Ok(())
        } else {
            Err(GroupError::Invalid(format!("relation {name} fails")))
        }
    };
    let (a2, a3, b2, b3) = (g.pow(a, 2), g.pow(a, 3), g.pow(b, 2), g.pow(b, 3));
    rel("a^4 = 1", g.pow(a, 4), 0)?;
    rel("b^4 = 1", g.pow(b, 4), 0)?;
    rel("b a b^-1 = b^2 a^3", g.conjugate(b, a), g.mul(b2, a3))?;
    rel("a b a^-1 = a^2 b^3", g.conjugate(a, b), g.mul(a2, b3))?;
    rel("[a^2, b] = 1", g.commutator(a2, b), 0)?;
    rel("[b^2, a] = 1", g.commutator(b2, a), 0)?;
    if g.order() != 16 {
        return Err(GroupError::Invalid(format!("closure produced order {}", g.order())));
    }
    Ok(())
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Metacyclic { p, n, m, t, r } => write!(f, "metacyclic({p},{n},{m},{t},{r})"),
            GroupSpec::Dihedral { n } => write!(f, "dihedral(n={n})"),
            GroupSpec::Semidihedral { n } => write!(f, "semidihedral(n={n})"),
            GroupSpec::GeneralizedQuaternion { n } => write!(f, "genquaternion(n={n})"),
            GroupSpec::Quaternion8 => write!(f, "quaternion8"),
            GroupSpec::SemidihedralTwisted { n } => write!(f, "sdtwisted(n={n})"),
            GroupSpec::Abelian { orders } => {
                let o: Vec<String> = orders.iter().map(u32::to_string).collect();
                write!(f, "abelian({})", o.join(","))
            }
            GroupSpec::Example16 => write!(f, "example16"),
            GroupSpec::DirectProduct { left, right } => write!(f, "product({left},{right})"),
        }
    }
}

/// Splits on commas that are not nested inside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl FromStr for GroupSpec {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::Literal(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let (name, args) = match compact.split_once('(') {
            Some((name, rest)) => (name.to_string(), Some(rest.strip_suffix(')').ok_or_else(bad)?.to_string())),
            None => (compact.clone(), None),
        };
        let ints = |args: &Option<String>| -> Result<Vec<u64>, GroupError> {
            let a = args.as_ref().ok_or_else(bad)?;
            let mut named: BTreeMap<usize, u64> = BTreeMap::new();
            for (i, part) in split_top_level(a).into_iter().enumerate() {
                let v = part.rsplit('=').next().unwrap_or(part);
                named.insert(i, v.parse().map_err(|_| bad())?);
            }
            Ok(named.into_values().collect())
        };
        let single_n = |args: &Option<String>| -> Result<u32, GroupError> {
            match ints(args)?.as_slice() {
                [n] => u32::try_from(*n).map_err(|_| bad()),
                _ => Err(bad()),
            }
        };
        match name.as_str() {
            "quaternion8" | "q8" if args.is_none() => Ok(GroupSpec::Quaternion8),
            "example16" if args.is_none() => Ok(GroupSpec::Example16),
            "dihedral" => Ok(GroupSpec::Dihedral { n: single_n(&args)? }),
            "semidihedral" => Ok(GroupSpec::Semidihedral { n: single_n(&args)? }),
            "genquaternion" => Ok(GroupSpec::GeneralizedQuaternion { n: single_n(&args)? }),
            "sdtwisted" => Ok(GroupSpec::SemidihedralTwisted { n: single_n(&args)? }),
            "cyclic" => Ok(GroupSpec::Abelian { orders: vec![single_n(&args)?] }),
            "abelian" => {
                let orders = ints(&args)?
                    .into_iter()
                    .map(|q| u32::try_from(q).map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(GroupSpec::Abelian { orders })
            }
            "metacyclic" => match ints(&args)?.as_slice() {
                &[p, n, m, t, r] => {
                    let c = |v: u64| u32::try_from(v).map_err(|_| bad());
                    Ok(GroupSpec::Metacyclic { p: c(p)?, n: c(n)?, m: c(m)?, t: c(t)?, r })
                }
                _ => Err(bad()),
            },
            "product" => {
                let a = args.ok_or_else(bad)?;
                match split_top_level(&a).as_slice() {
                    [l, r] => Ok(GroupSpec::DirectProduct {
                        left: Box::new(l.parse()?),
                        right: Box::new(r.parse()?),
                    }),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serialized form `{order, labels, table, gen_a, gen_b}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupReport {
    pub spec: Option<GroupSpec>,
    pub order: usize,
    pub labels: Vec<String>,
    pub table: Vec<Vec<u32>>,
    pub gen_a: Option<usize>,
    pub gen_b: Option<usize>,
    pub generators: Vec<usize>,
}

impl From<&Group> for GroupReport {
    fn from(g: &Group) -> Self {
        GroupReport {
            spec: g.spec.clone(),
            order: g.order,
            labels: g.labels.clone(),
            table: g.table.chunks(g.order).map(<[u32]>::to_vec).collect(),
            gen_a: g.gen_a(),
            gen_b: g.gen_b(),
            generators: g.generators.clone(),
        }
    }
}

impl TryFrom<GroupReport> for Group {
    type Error = GroupError;

    fn try_from(r: GroupReport) -> Result<Self, Self::Error> {
        Group::from_table(r.spec, r.table.concat(), r.generators, r.labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> Group {
        build_group(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn dihedral_8() {
        let d8 = g("dihedral(n=2)");
        assert_eq!(d8.order(), 8);
        let (a, b) = (d8.gen_a().unwrap(), d8.gen_b().unwrap());
        assert_eq!(d8.element_order(a), 4);
        assert_eq!(d8.element_order(b), 2);
        assert_eq!(d8.conjugate(b, a), d8.pow(a, 3));
        // [b,a] = b a b⁻¹ a⁻¹ = a⁻¹ a⁻¹ = a²
        assert_eq!(d8.commutator(b, a), d8.pow(a, 2));
        assert_eq!(d8.element_order(0), 1);
    }

    #[test]
    fn cyclic_two() {
        let c2 = g("abelian(2)");
        assert_eq!(c2.table(), &[0, 1, 1, 0]);
        assert_eq!(c2.labels(), &["1", "a"]);
        assert_eq!(c2.gen_b(), None);
    }

    #[test]
    fn quaternion_commutator_is_central_involution() {
        let q8 = g("quaternion8");
        let (a, b) = (q8.gen_a().unwrap(), q8.gen_b().unwrap());
        let a2 = q8.pow(a, 2);
        assert_eq!(q8.commutator(b, a), a2);
        let involutions: Vec<usize> = (1..8).filter(|&x| q8.element_order(x) == 2).collect();
        assert_eq!(involutions, vec![a2]);
        assert_eq!(q8.element_order(b), 4);
    }

    #[test]
    fn generalized_quaternion_b_has_order_four() {
        let q16 = g("genquaternion(n=3)");
        let b = q16.gen_b().unwrap();
        assert_eq!(q16.element_order(b), 4);
        assert_ne!(q16.pow(b, 2), 0);
        assert_eq!(q16.pow(b, 2), q16.pow(q16.gen_a().unwrap(), 4));
    }

    // Independent table: conjugation by b sends a to a³b² and squares to the
    // identity, so b^j a^k = a^{3^j k} b^{j + 2k[j odd]}.
    fn example16_group(spec: GroupSpec) -> Result<Group, GroupError> {
        let idx = |i: u32, j: u32| i % 4 + 4 * (j % 4);
        let mut table = vec![0u32; 256];
        for j in 0..4 {
            for i in 0..4 {
                for l in 0..4 {
                    for k in 0..4 {
                        let odd = j % 2;
                        let e = i + k * if odd == 1 { 3 } else { 1 };
                        let f = j + l + 2 * k * odd;
                        table[idx(i, j) as usize * 16 + idx(k, l) as usize] = idx(e, f);
                    }
                }
            }
        }
        let pres = Presentation { names: vec!['a', 'b'], rules: vec![] };
        let labels = (0..16u32)
            .map(|x| {
                let mut w = vec![0u8; (x % 4) as usize];
                w.extend(std::iter::repeat_n(1u8, (x / 4) as usize));
                pres.label(&w)
            })
            .collect();
        Group::from_table(Some(spec), table, vec![1, 4], labels)
    }

    #[test]
    fn example16_closure_matches_conjugation_formula() {
        let closed = g("example16");
        let formula = example16_group(GroupSpec::Example16).unwrap();
        assert_eq!(closed.table(), formula.table());
        assert_eq!(closed.labels(), formula.labels());
    }

    #[test]
    fn example16_relations_and_centrality() {
        let e = g("example16");
        assert_eq!(e.order(), 16);
        let (a, b) = (e.gen_a().unwrap(), e.gen_b().unwrap());
        assert_eq!(e.pow(a, 4), 0);
        assert_eq!(e.pow(b, 4), 0);
        for x in [e.pow(a, 2), e.pow(b, 2)] {
            assert!((0..16).all(|y| e.mul(x, y) == e.mul(y, x)));
        }
        assert_eq!(e.labels()[5], "a*b");
        assert!(check_example16_relations(&e).is_ok());
    }

    #[test]
    fn abelian_commutators_trivial() {
        let grp = g("abelian(4,2)");
        assert!(grp.is_abelian());
        for x in 0..8 {
            for y in 0..8 {
                assert_eq!(grp.commutator(x, y), 0);
            }
        }
        assert_eq!(grp.generators(), &[1, 4]);
    }

    #[test]
    fn congruence_violations_are_reported() {
        let err = build_group(&GroupSpec::Metacyclic { p: 2, n: 4, m: 1, t: 4, r: 3 }).unwrap_err();
        assert!(err.to_string().contains("≢ 1"), "{err}");
        let err = build_group(&GroupSpec::Metacyclic { p: 2, n: 3, m: 1, t: 1, r: 7 }).unwrap_err();
        assert!(err.to_string().contains("≢ 0"), "{err}");
        assert!(matches!(build_group(&GroupSpec::Abelian { orders: vec![2, 3] }), Err(GroupError::Constraint(_))));
        assert!(matches!(build_group(&"dihedral(n=6)".parse().unwrap()), Err(GroupError::TooLarge { .. })));
        assert!(matches!(build_group(&"semidihedral(n=2)".parse().unwrap()), Err(GroupError::Constraint(_))));
    }

    #[test]
    fn invalid_tables_rejected() {
        let labels = vec!["1".to_string(), "x".into(), "y".into()];
        // not a Latin square
        let bad = vec![0, 1, 2, 1, 1, 0, 2, 0, 1];
        assert!(Group::from_table(None, bad, vec![1], labels.clone()).is_err());
        let c3 = vec![0, 1, 2, 1, 2, 0, 2, 0, 1];
        assert!(Group::from_table(None, c3.clone(), vec![1], labels.clone()).is_ok());
        assert!(Group::from_table(None, c3, vec![], labels).is_err());
    }

    fn catalog() -> Vec<&'static str> {
        vec![
            "dihedral(n=2)",
            "dihedral(n=3)",
            "dihedral(n=4)",
            "semidihedral(n=3)",
            "semidihedral(n=4)",
            "genquaternion(n=3)",
            "genquaternion(n=4)",
            "quaternion8",
            "sdtwisted(n=3)",
            "sdtwisted(n=4)",
            "metacyclic(2,2,2,2,3)",
            "metacyclic(2,3,2,2,3)",
            "metacyclic(3,2,1,2,4)",
            "metacyclic(2,3,1,3,5)",
        ]
    }

    #[test]
    fn metacyclic_builder_matches_word_closure() {
        for lit in catalog() {
            let spec: GroupSpec = lit.parse().unwrap();
            let direct = build_group(&spec).unwrap();
            if direct.order() > 32 {
                continue;
            }
            let (p, n, m, t, r) = spec.metacyclic_params().unwrap();
            let closed = metacyclic_presentation(p, n, m, t, r).close(None, 64).unwrap();
            assert_eq!(direct.labels(), closed.labels(), "{lit}");
            assert_eq!(direct.table(), closed.table(), "{lit}");
        }
    }

    #[test]
    fn nonabelian_quotient_by_derived_subgroup_is_not_cyclic() {
        for lit in catalog().into_iter().chain(["example16"]) {
            let grp = g(lit);
            assert!(!grp.is_abelian(), "{lit}");
            let derived = grp.derived_subgroup();
            assert!(grp.is_normal(&derived));
            assert!(!grp.quotient_is_cyclic(&derived), "{lit}");
        }
    }

    #[test]
    fn twisted_semidihedral_is_semidihedral_in_disguise() {
        for n in [3, 4] {
            let grp = g(&format!("sdtwisted(n={n})"));
            let (a, b) = (grp.gen_a().unwrap(), grp.gen_b().unwrap());
            let ab = grp.mul(a, b);
            assert_eq!(grp.pow(ab, 2), 0);
            let target = grp.pow(a, (1u64 << (n - 1)) + (1 << n) - 1);
            assert_eq!(grp.conjugate(ab, a), target);
        }
    }

    #[test]
    fn jennings_series_of_quaternion() {
        let q8 = g("quaternion8");
        let sizes: Vec<usize> = q8.jennings_series().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![8, 2, 1]);
        assert_eq!(q8.jennings_quotient_dims(), vec![1, 2, 2, 2, 1]);
        assert_eq!(g("abelian(2)").jennings_quotient_dims(), vec![1, 1]);
        assert_eq!(g("abelian(9)").jennings_quotient_dims(), vec![1; 9]);
    }

    #[test]
    fn literal_round_trip() {
        for lit in catalog().into_iter().chain(["example16", "abelian(4,2)", "product(dihedral(n=2),abelian(2))"]) {
            let spec: GroupSpec = lit.parse().unwrap();
            assert_eq!(spec.to_string(), lit);
        }
        assert_eq!("dihedral(3)".parse::<GroupSpec>().unwrap(), GroupSpec::Dihedral { n: 3 });
        assert!("dihedral".parse::<GroupSpec>().is_err());
        assert!("product(abelian(2))".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn direct_product_layout() {
        let grp = g("product(abelian(2),abelian(4))");
        assert_eq!(grp.order(), 8);
        assert_eq!(grp.generators(), &[1, 2]);
        assert!(grp.is_abelian());
        assert!(build_group(&"product(abelian(2),abelian(3))".parse().unwrap()).is_err());
    }

    #[test]
    fn report_round_trip() {
        let grp = g("example16");
        let report = GroupReport::from(&grp);
        let json = serde_json::to_string(&report).unwrap();
        let back: GroupReport = serde_json::from_str(&json).unwrap();
        assert_eq!(Group::try_from(back).unwrap(), grp);
    }
}
