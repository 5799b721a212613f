//! Property tests for the categorification criteria on the ring fixtures.

mod common;

use std::sync::OnceLock;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use qconv::fusion::{CriterionContext, Verdict};
use qconv::linalg::{kron, min_eigenvalue};
use qconv::{rng, FusionRing};

const ALL: [&str; 8] = ["z2", "z3", "z4", "z2xz2", "s3", "fibonacci", "ising", "obstructed_rank3"];

fn rings() -> &'static [(&'static str, FusionRing, CriterionContext)] {
    static R: OnceLock<Vec<(&'static str, FusionRing, CriterionContext)>> = OnceLock::new();
    R.get_or_init(|| {
        ALL.iter()
            .map(|&n| {
                let r = common::ring(n);
                let ctx = r.criterion_context().unwrap();
                (n, r, ctx)
            })
            .collect()
    })
}

fn quad(m: &qconv::CMatrix64, v: &[C]) -> C {
    m.quadratic_form(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn t_is_hermitian_and_pairs_to_the_schur_value(seed in any::<u64>()) {
        for (name, r, ctx) in rings() {
            let n = r.rank();
            let mut s = rng::stream(seed, 0);
            let v: Vec<C> = rng::unit_vector(&mut s, n);
            let w: Vec<C> = rng::unit_vector(&mut s, n);
            let u: Vec<C> = rng::unit_vector(&mut s, n);
            let t = ctx.t_checked(&v).unwrap();
            prop_assert!(t.hermitian_deviation() <= 1e-9, "{}", name);
            let wu: Vec<C> = w.iter().flat_map(|a| u.iter().map(move |b| a * b)).collect();
            let pairing = quad(&t, &wu);
            let schur = ctx.schur_checked(&v, &w, &u).unwrap();
            prop_assert!((pairing.re - schur).abs() <= 1e-9 && pairing.im.abs() <= 1e-9,
                "{}: ⟨T(v)(w⊗u), w⊗u⟩ = {} vs Schur {}", name, pairing, schur);
        }
    }

    #[test]
    fn schur_at_the_fp_vector_is_nonnegative(seed in any::<u64>()) {
        for (name, r, ctx) in rings().iter().filter(|(n, ..)| *n != "obstructed_rank3") {
            let d = r.fp_dimensions().unwrap().dims;
            let fp: Vec<C> = d.iter().map(|&x| C::new(x, 0.0)).collect();
            let mut s = rng::stream(seed, 1);
            let w: Vec<C> = rng::unit_vector(&mut s, r.rank());
            let v = ctx.schur_checked(&fp, &w, &w).unwrap();
            prop_assert!(v >= -1e-9, "{}: {}", name, v);
        }
    }

    #[test]
    fn delta_one_of_a_square_is_t(seed in any::<u64>()) {
        // reciprocity turns v*M_k v into the coefficient of x_k in g g* for g = Σ v̄_i x_i
        for (name, r, ctx) in rings() {
            let mut s = rng::stream(seed, 2);
            let v: Vec<C> = rng::unit_vector(&mut s, r.rank());
            let a: Vec<C> = v.iter().map(|z| z.conj()).collect();
            let d1 = r.delta1_of_square(&a).unwrap();
            let t = ctx.t_checked(&v).unwrap();
            prop_assert!((&d1 - &t).max_abs() <= 1e-9, "{}", name);
        }
    }
}

#[test]
fn searches_are_deterministic() {
    for (name, r, _) in rings() {
        assert_eq!(r.search_comult_violation(8, 3).unwrap(), r.search_comult_violation(8, 3).unwrap(), "{name}");
        assert_eq!(r.search_schur_violation(8, 3).unwrap(), r.search_schur_violation(8, 3).unwrap(), "{name}");
    }
}

#[test]
fn obstruction_witness_is_a_negative_square() {
    let (_, r, ctx) = rings().iter().find(|(n, ..)| *n == "obstructed_rank3").unwrap();
    let rep = r.search_comult_violation(64, 0).unwrap();
    assert_eq!(rep.verdict, Verdict::Violation);
    assert!(rep.value < -0.8 && (rep.value - rep.rechecked_value).abs() <= 1e-10);
    let v: Vec<C> = rep.witness[0].iter().map(|&[re, im]| C::new(re, im)).collect();
    let a: Vec<C> = v.iter().map(|z| z.conj()).collect();
    let lam = min_eigenvalue(&r.delta1_of_square(&a).unwrap()).unwrap();
    assert!((lam - rep.value).abs() <= 1e-9, "Δ₁ gives {lam}, search {}", rep.value);
    assert!((min_eigenvalue(&ctx.t_checked(&v).unwrap()).unwrap() - rep.value).abs() <= 1e-9);
}

#[test]
fn categorifiable_rings_have_psd_delta_one_on_random_squares() {
    for (name, r, _) in rings().iter().filter(|(n, ..)| *n != "obstructed_rank3") {
        for i in 0..50 {
            let mut s = rng::stream(17, i);
            let a: Vec<C> = rng::unit_vector(&mut s, r.rank());
            let lam = min_eigenvalue(&r.delta1_of_square(&a).unwrap()).unwrap();
            assert!(lam >= -1e-9, "{name}: {lam}");
        }
    }
}

#[test]
fn kron_squares_of_fusion_matrices_are_nonnegative() {
    for (name, r, ctx) in rings() {
        for (k, m) in r.fusion_matrices().iter().enumerate() {
            let kk = kron(m, m);
            assert!(kk.as_slice().iter().all(|z| z.re >= 0.0 && z.im == 0.0), "{name}");
            assert!((ctx.norms()[k] - r.fp_dimensions().unwrap().dims[k]).abs() <= 1e-9);
        }
    }
}
