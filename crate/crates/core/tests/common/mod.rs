#![allow(dead_code)]

use std::sync::Arc;

use fmbasis::{build_group, AlgebraElement, Field, Filtration, GroupAlgebra, Scalar};
use rand::Rng;

pub const NONABELIAN: [&str; 15] = [
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
    "metacyclic(2,2,2,1,3)",
    "metacyclic(2,3,2,2,3)",
    "metacyclic(3,2,1,2,4)",
    "example16",
];

pub fn algebra(spec: &str, p: u64, k: u32) -> Arc<GroupAlgebra> {
    let group = build_group(&spec.parse().unwrap()).unwrap();
    GroupAlgebra::new(Arc::new(group), Arc::new(Field::new(p, k).unwrap()))
}

pub fn random_scalar<R: Rng>(kg: &GroupAlgebra, rng: &mut R) -> Scalar {
    kg.field().scalar(rng.gen_range(0..kg.field().order())).unwrap()
}

/// Uniform element of I^k.
pub fn random_in_level<R: Rng>(kg: &Arc<GroupAlgebra>, filt: &Filtration, k: usize, rng: &mut R) -> AlgebraElement {
    let mut x = kg.zero();
    for row in filt.level(k).rows() {
        let row = kg.from_coeffs(row.clone()).unwrap();
        x = &x + &row.scale(random_scalar(kg, rng)).unwrap();
    }
    x
}

/// `a − 1` and `b − 1`.
pub fn aug_generators(kg: &Arc<GroupAlgebra>) -> (AlgebraElement, AlgebraElement) {
    let g = kg.group();
    (kg.embed_aug(g.gen_a().unwrap()), kg.embed_aug(g.gen_b().unwrap()))
}

/// Independent check over GF(2): members as bitmasks over group elements,
/// products through the raw group table, ranks by xor elimination, and the
/// powers of I rebuilt from scratch. Returns the ranks of `B ∩ I^k`.
pub fn gf2_oracle(group: &fmbasis::Group, members: &[u64]) -> Result<Vec<usize>, String> {
    let n = group.order();
    let mul = |x: u64, y: u64| -> u64 {
        let mut z = 0u64;
        for g in (0..n).filter(|g| x >> g & 1 == 1) {
            for h in (0..n).filter(|h| y >> h & 1 == 1) {
                z ^= 1 << group.mul(g, h);
            }
        }
        z
    };
    let reduce = |basis: &[u64], mut v: u64| {
        for &b in basis {
            v = v.min(v ^ b);
        }
        v
    };
    let span = |vs: &[u64]| -> Vec<u64> {
        let mut basis: Vec<u64> = Vec::new();
        for &v in vs {
            let r = reduce(&basis, v);
            if r != 0 {
                basis.push(r);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        basis
    };
    if members.len() != n || span(members).len() != n {
        return Err("not a basis".into());
    }
    for &x in members {
        for &y in members {
            let p = mul(x, y);
            if p != 0 && !members.contains(&p) {
                return Err(format!("{x:#x}*{y:#x} = {p:#x} is not a member"));
            }
        }
    }
    let aug: Vec<u64> = (1..n).map(|g| 1 | 1 << g).collect();
    let mut level = span(&aug);
    let mut ranks = Vec::new();
    while !level.is_empty() {
        let inside: Vec<u64> = members.iter().copied().filter(|&b| reduce(&level, b) == 0).collect();
        if span(&inside).len() != level.len() {
            return Err(format!("B ∩ I^{} spans {} of {}", ranks.len() + 1, span(&inside).len(), level.len()));
        }
        ranks.push(level.len());
        let products: Vec<u64> = level.iter().flat_map(|&x| aug.iter().map(move |&y| (x, y))).map(|(x, y)| mul(x, y)).collect();
        level = span(&products);
    }
    Ok(ranks)
}

pub fn gf2_masks(report: &fmbasis::fmb::CandidateReport) -> Vec<u64> {
    report
        .members
        .iter()
        .map(|m| m.coeffs.iter().enumerate().filter(|(_, c)| c.first() == Some(&1)).fold(0u64, |acc, (g, _)| acc | 1 << g))
        .collect()
}
