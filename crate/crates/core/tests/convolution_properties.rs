//! Property tests for convolution structures: duality with the
//! comultiplication, Haar implies positivity, rescaling, antipodes, and the
//! θ-swap closed form.

mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use qconv::algebra::Element;
use qconv::convolution::{
    build_theta_swap, build_unitary_convolution, check_good_convolution, sample_general, sample_psd,
    theta_swap_closed_form, ANTIPODE_EXPONENTS,
};
use qconv::{rng, ConvolutionStructure, FnAlgebra};

fn algebras() -> &'static [(String, FnAlgebra)] {
    static A: OnceLock<Vec<(String, FnAlgebra)>> = OnceLock::new();
    A.get_or_init(common::fn_fixtures)
}

/// FN fixtures plus convolutions without an antipode.
fn structures() -> &'static [(String, ConvolutionStructure)] {
    static S: OnceLock<Vec<(String, ConvolutionStructure)>> = OnceLock::new();
    S.get_or_init(|| {
        let mut out: Vec<_> = algebras().iter().map(|(n, a)| (n.clone(), a.structure().clone())).collect();
        out.push(("theta-swap 1/2".into(), build_theta_swap(0.5, 2).unwrap()));
        out.push(("theta-swap 0.3, n=3".into(), build_theta_swap(0.3, 3).unwrap()));
        // eigenvectors of a random Hermitian matrix: a random unitary on C²⊗C²
        let g = Element::random_gaussian(&std::sync::Arc::new(qconv::algebra::AlgebraSpec::matrix(4)), 7, 0);
        let q = qconv::linalg::eig_hermitian(&g.hermitian_part().block(0).clone()).unwrap().vectors;
        out.push(("random unitary".into(), build_unitary_convolution(&q, 2).unwrap()));
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn convolution_is_adjoint_to_comultiplication(seed in any::<u64>()) {
        for (name, s) in structures() {
            let sp = s.spec();
            let x = Element::random_gaussian(sp, seed, 0);
            let y = Element::random_gaussian(sp, seed, 1);
            let z = Element::random_gaussian(sp, seed, 2);
            let lhs = s.convolve(&x, &y).unwrap().inner(&z).unwrap();
            let rhs = s.tensor(&x, &y).unwrap().inner(&s.comultiply(&z).unwrap()).unwrap();
            let scale = x.p_norm(2.0).unwrap() * y.p_norm(2.0).unwrap() * z.p_norm(2.0).unwrap() * s.k().max(1.0);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * scale.max(1.0), "{}: {} vs {}", name, lhs, rhs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn haar_and_young_imply_positivity(seed in any::<u64>()) {
        for (name, s) in structures() {
            let rep = check_good_convolution(s, 16, seed, 1e-9);
            let holds = |a: &str| rep.check(a).map(|c| c.passed).unwrap_or(false);
            if !(holds("haar") && holds("primary_young")) {
                continue;
            }
            let sp = s.spec();
            for i in 0..4 {
                let x = sample_psd(sp, seed, 2 * i);
                let y = sample_psd(sp, seed, 2 * i + 1);
                let v = s.convolve(&x, &y).unwrap();
                let min = v.hermitian_part().min_eigenvalue().unwrap();
                prop_assert!(v.hermitian_deviation() <= 1e-9 && min >= -1e-9, "{}: min eigenvalue {}", name, min);
            }
        }
    }

    #[test]
    fn antipode_preserves_norms_and_squares_to_an_automorphism(seed in any::<u64>()) {
        for (name, a) in algebras() {
            let rho = a.antipode();
            let sp = a.spec();
            let x = sample_general(sp, seed, 0);
            let y = sample_general(sp, seed, 1);
            let rx = rho.apply(&x).unwrap();
            for p in ANTIPODE_EXPONENTS {
                let (n, m) = (x.p_norm(p).unwrap(), rx.p_norm(p).unwrap());
                prop_assert!((n - m).abs() <= 1e-9 * n.max(1.0), "{}: p={} {} vs {}", name, p, n, m);
            }
            let rr = |e: &Element<f64>| rho.apply(&rho.apply(e).unwrap()).unwrap();
            let lhs = rr(&x.mul(&y).unwrap());
            let rhs = rr(&x).mul(&rr(&y)).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10, "{}: ρ² is not multiplicative", name);
            let lin = rr(&x.add(&y).unwrap()).sub(&rr(&x).add(&rr(&y)).unwrap()).unwrap();
            prop_assert!(lin.max_abs() <= 1e-10);
            prop_assert!(rr(&x.adjoint()).sub(&rr(&x).adjoint()).unwrap().max_abs() <= 1e-10);
        }
    }

    #[test]
    fn theta_swap_matches_closed_form(theta in 0.0f64..=1.0, n in 2usize..=3, seed in any::<u64>()) {
        let s = build_theta_swap(theta, n).unwrap();
        let sp = s.spec();
        let x = Element::random_density(sp, seed, 0, 1.0);
        let y = Element::random_density(sp, seed, 1, 1.0);
        let got = s.convolve(&x, &y).unwrap();
        let want = theta_swap_closed_form(theta, x.block(0), y.block(0));
        prop_assert!((got.block(0) - &want).max_abs() <= 1e-10);
    }
}

#[test]
fn rescaling_moves_the_constant() {
    for (name, a) in algebras() {
        for (l1, l2) in [(2.0, 1.0), (1.0, 2.0), (3.0, 3.0)] {
            let s = a.structure().rescaled(l1, l2).unwrap();
            let rep = check_good_convolution(&s, 64, 3, 1e-9);
            let want = l1 * a.k() / l2;
            assert!((s.k() - want).abs() <= 1e-12, "{name}: k = {}", s.k());
            assert!((rep.k_estimated - want).abs() <= 1e-9 * want, "{name}: estimated {}", rep.k_estimated);
            assert!(rep.passed, "{name} rescaled by ({l1}, {l2}) fails {:?}", rep.checks.iter().find(|c| !c.passed));
        }
    }
}

#[test]
fn rescaled_fn_algebra_verifies() {
    let (_, a) = &algebras()[0];
    let r = a.rescaled(2.0, 1.0).unwrap();
    assert!(r.verification().passed);
    assert_eq!(r.k(), 2.0);
}

#[test]
fn group_convolution_is_translation_on_point_masses() {
    let g = common::group("s3");
    let a = qconv::convolution::build_group_algebra(&g).unwrap();
    let sp = a.spec();
    for x in 0..g.order() {
        for y in 0..g.order() {
            let v = a
                .convolve(&qconv::convolution::point_mass(sp, x), &qconv::convolution::point_mass(sp, y))
                .unwrap();
            let want = qconv::convolution::point_mass(sp, g.mul(x, y));
            assert!(v.sub(&want).unwrap().max_abs() <= 1e-14);
        }
    }
}

#[test]
fn random_inputs_are_reproducible() {
    let sp = algebras()[1].1.spec().clone();
    let mut r1 = rng::stream(9, 4);
    let mut r2 = rng::stream(9, 4);
    assert_eq!(rng::uniform(&mut r1), rng::uniform(&mut r2));
    assert_eq!(sample_psd(&sp, 9, 4), sample_psd(&sp, 9, 4));
}
