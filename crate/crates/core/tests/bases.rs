mod common;

use std::sync::Arc;

use common::algebra;
use fmbasis::fmb::{construct_example16, construct_quaternion8, product_basis, Witness};
use fmbasis::{compute_filtration, construct, verify, BasisCandidate, ConstructParams, Construction, Group, GroupAlgebra, Scalar};

const ABELIAN_2: [&str; 18] = [
    "abelian(2)",
    "abelian(4)",
    "abelian(2,2)",
    "abelian(8)",
    "abelian(4,2)",
    "abelian(2,2,2)",
    "abelian(16)",
    "abelian(8,2)",
    "abelian(4,4)",
    "abelian(4,2,2)",
    "abelian(2,2,2,2)",
    "abelian(32)",
    "abelian(16,2)",
    "abelian(8,4)",
    "abelian(8,2,2)",
    "abelian(4,4,2)",
    "abelian(4,2,2,2)",
    "abelian(2,2,2,2,2)",
];

const ABELIAN_3: [&str; 6] = ["abelian(3)", "abelian(9)", "abelian(3,3)", "abelian(27)", "abelian(9,3)", "abelian(3,3,3)"];

#[test]
fn abelian_power_products_verify() {
    for (specs, p) in [(&ABELIAN_2[..], 2), (&ABELIAN_3[..], 3)] {
        for spec in specs {
            let kg = algebra(spec, p, 1);
            let b = construct(&kg, Construction::Abelian, &ConstructParams::default()).unwrap();
            assert_eq!(b.len(), kg.dim());
            let r = verify(&b, None).unwrap();
            assert!(r.passed(), "{spec}: {:?}", r.witness);
        }
    }
}

#[test]
fn abelian_labels() {
    let kg = algebra("abelian(2)", 2, 1);
    let b = construct(&kg, Construction::Auto, &ConstructParams::default()).unwrap();
    assert_eq!(b.labels(), ["1", "(a-1)"]);
    let kg = algebra("abelian(4,2)", 2, 1);
    let b = construct(&kg, Construction::Abelian, &ConstructParams::default()).unwrap();
    assert_eq!(b.len(), 8);
    assert!(b.labels().contains(&"(a-1)^3*(b-1)".to_string()));
}

#[test]
fn dihedral_bases_verify() {
    for n in 2..=4 {
        let kg = algebra(&format!("dihedral(n={n})"), 2, 1);
        let b = construct(&kg, Construction::Dihedral, &ConstructParams::default()).unwrap();
        assert_eq!(b.len(), 2 + 2 * (1 << (n - 1)) + 2 * ((1 << (n - 1)) - 1));
        assert_eq!(b.len(), 1 << (n + 1));
        assert!(verify(&b, None).unwrap().passed(), "n={n}");
    }
}

#[test]
fn dihedral_needs_characteristic_two_and_right_group() {
    let kg = algebra("semidihedral(n=3)", 2, 1);
    assert!(construct(&kg, Construction::Dihedral, &ConstructParams::default()).is_err());
    assert!(construct(&kg, Construction::Auto, &ConstructParams::default()).is_err());
    assert!("nonsense".parse::<Construction>().is_err());
}

/// Every product of catalog bases of total order at most 64 is again a basis.
#[test]
fn product_bases_verify() {
    let gf2 = ["abelian(2)", "abelian(4)", "abelian(2,2)", "abelian(8)", "dihedral(n=2)", "dihedral(n=3)", "example16", "abelian(4,2)"];
    let order = |s: &str| algebra(s, 2, 1).dim();
    for l in gf2 {
        for r in gf2 {
            if order(l) * order(r) > 64 {
                continue;
            }
            let spec = format!("product({l},{r})");
            let kg = algebra(&spec, 2, 1);
            let b = construct(&kg, Construction::Product, &ConstructParams::default()).unwrap();
            assert_eq!(b.len(), kg.dim());
            let report = verify(&b, None).unwrap();
            assert!(report.passed(), "{spec}: {:?}", report.witness);
        }
    }
    let kg = algebra("product(quaternion8,abelian(2))", 2, 2);
    let b = construct(&kg, Construction::Auto, &ConstructParams::default()).unwrap();
    assert!(verify(&b, None).unwrap().passed());
}

#[test]
fn product_with_trivial_and_cyclic_factor() {
    let kg = algebra("product(abelian(2),abelian(2))", 2, 1);
    let prod = construct(&kg, Construction::Product, &ConstructParams::default()).unwrap();
    let direct = construct(&algebra("abelian(2,2)", 2, 1), Construction::Abelian, &ConstructParams::default()).unwrap();
    let mut x: Vec<_> = prod.elements().iter().map(|e| e.coeffs().to_vec()).collect();
    let mut y: Vec<_> = direct.elements().iter().map(|e| e.coeffs().to_vec()).collect();
    x.sort();
    y.sort();
    assert_eq!(x, y);

    let d8 = algebra("dihedral(n=2)", 2, 1);
    let left = construct(&d8, Construction::Dihedral, &ConstructParams::default()).unwrap();
    let trivial = Group::from_table(None, vec![0], vec![], vec!["1".into()]).unwrap();
    let tkg = GroupAlgebra::new(Arc::new(trivial), d8.field().clone());
    let one = BasisCandidate::new(vec![tkg.one()], vec!["1".into()], vec![]).unwrap();
    let b = product_basis(&left, &one, &d8).unwrap();
    assert_eq!(b.labels(), left.labels().iter().map(|l| if l == "1" { "1".to_string() } else { format!("{l}⊗1") }).collect::<Vec<_>>());
    for (x, y) in b.elements().iter().zip(left.elements()) {
        assert_eq!(x.coeffs(), y.coeffs());
    }
    let gf4 = algebra("abelian(2)", 2, 2);
    let other = construct(&gf4, Construction::Abelian, &ConstructParams::default()).unwrap();
    assert!(product_basis(&left, &other, &d8).is_err());
}

#[test]
fn quaternion_bases_verify_with_cube_roots() {
    for k in [2, 4] {
        let kg = algebra("quaternion8", 2, k);
        let field = kg.field().clone();
        let roots: Vec<Scalar> = field.elements().filter(|&w| w != Scalar::ONE && field.pow(w, 3) == Scalar::ONE).collect();
        assert_eq!(roots.len(), 2);
        for w in roots {
            let b = construct_quaternion8(&kg, Some(w)).unwrap();
            assert!(verify(&b, None).unwrap().passed(), "GF(2^{k}) omega={}", field.display(w));
        }
    }
    for k in [1, 3] {
        let kg = algebra("quaternion8", 2, k);
        assert!(construct(&kg, Construction::Quaternion8, &ConstructParams::default()).is_err(), "GF(2^{k})");
    }
}

#[test]
fn example16_over_gf2() {
    let kg = algebra("example16", 2, 1);
    for (m1, m2) in [(Scalar::ZERO, Scalar::ONE), (Scalar::ONE, Scalar::ZERO)] {
        let b = construct_example16(&kg, m1, m2).unwrap();
        assert_eq!(b.len(), 16);
        assert!(verify(&b, None).unwrap().passed());
    }
    let f = compute_filtration(&kg).unwrap();
    assert_eq!(f.quotient_dims()[2], 3);
}

/// Over GF(4) the word set closes exactly when μ₁ + μ₂ = 1. Otherwise
/// v = λ·v₁ with v₁ from the λ = 1 family, and u² is a word containing v₁
/// that is not a member.
#[test]
fn example16_over_gf4_depends_on_mu_sum() {
    let kg = algebra("example16", 2, 2);
    let field = kg.field().clone();
    let mut passing = Vec::new();
    for m1 in field.elements() {
        for m2 in field.elements() {
            if m1 == m2 {
                continue;
            }
            let b = construct_example16(&kg, m1, m2).unwrap();
            let r = verify(&b, None).unwrap();
            let unit = field.add(m1, m2) == Scalar::ONE;
            assert_eq!(r.passed(), unit, "mu=({},{})", field.display(m1), field.display(m2));
            if unit {
                passing.push((m1, m2));
            } else {
                assert!(matches!(r.witness, Some(Witness::Product { .. })));
                let lambda = field.add(m1, m2);
                let inv = field.inv(lambda).unwrap();
                let (n1, n2) = (field.mul(m1, inv), field.mul(m2, inv));
                assert_eq!(field.add(n1, n2), Scalar::ONE);
                let rescaled = construct_example16(&kg, n1, n2).unwrap();
                assert_eq!(b.get("v").unwrap(), &rescaled.get("v").unwrap().scale(lambda).unwrap());
                assert!(verify(&rescaled, None).unwrap().passed());
            }
        }
    }
    assert_eq!(passing.len(), 4);
}

#[test]
fn example16_spot_check_gf8() {
    let kg = algebra("example16", 2, 3);
    let field = kg.field().clone();
    let x = field.generator_x().unwrap();
    let b = construct_example16(&kg, x, field.add(x, Scalar::ONE)).unwrap();
    assert!(verify(&b, None).unwrap().passed());
    let c = construct_example16(&kg, x, Scalar::ZERO).unwrap();
    assert!(!verify(&c, None).unwrap().passed());
}

#[test]
fn generalized_quaternion_candidate_fails_with_congruence_witness() {
    let kg = algebra("genquaternion(n=3)", 2, 1);
    let u = fmbasis::parse_element(&kg, "(1+a)+(1+b)").unwrap();
    let v = fmbasis::parse_element(&kg, "1+b").unwrap();
    let b = fmbasis::fmb::word_closure_candidate(&kg, &[("u".into(), u), ("v".into(), v)], 64).unwrap();
    let r = verify(&b, None).unwrap();
    assert!(!r.passed());
    let audit = r.check("property_ii").unwrap();
    assert!(audit.witnesses.iter().any(|w| matches!(w,
        Witness::Congruence { left, right, congruent_mod, .. }
            if (left == "u^2" && right == "u*v*u" || left == "u*v*u" && right == "u^2") && *congruent_mod >= 4)));
}
