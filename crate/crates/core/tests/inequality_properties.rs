//! Inequality engines: suites on the FN fixtures, witness re-evaluation, a
//! plain-vector oracle on group algebras, and smooth-entropy invariants.

mod common;

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use qconv::algebra::{AlgebraSpec, Block, Element, DEFAULT_RANK_TOL};
use qconv::convolution::{build_theta_swap, Elem};
use qconv::inequality::{
    continuity_bound, phase_young_check, qeci_check, qeci_sweep, qeci_triple_check, reverse_young2_check,
    reverse_young2_sweep, smooth_conv_entropy, smooth_entropy, smooth_qeci_check, sumset_check, sumset_sweep,
    young_ratio, young_sweep, AssociationOrder, InequalityError, InequalityReport, SweepConfig,
    REVERSE_YOUNG_TRIPLES,
};
use qconv::{rng, FnAlgebra, GroupTable};

fn algebras() -> &'static [(String, FnAlgebra)] {
    static A: OnceLock<Vec<(String, FnAlgebra)>> = OnceLock::new();
    A.get_or_init(|| {
        let mut out: Vec<(String, FnAlgebra)> = common::small_group_algebras()
            .into_iter()
            .map(|(n, _, a)| (format!("group {n}"), a))
            .collect();
        for r in ["fibonacci", "ising"] {
            out.push((r.into(), qconv::convolution::build_fusion_bialgebra(&common::ring(r)).unwrap()));
        }
        out
    })
}

fn cfg(samples: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        samples,
        seed,
        ..SweepConfig::default()
    }
}

fn assert_witness_reproduces(rep: &InequalityReport, a: &FnAlgebra) {
    let w = rep.worst.as_ref().expect("a sweep records its worst instance");
    let (l, r, s) = w.reevaluate(a).unwrap();
    assert!((l - w.lhs).abs() <= 1e-12 * w.lhs.abs().max(1.0), "{}: lhs {l} vs {}", rep.inequality, w.lhs);
    assert!((r - w.rhs).abs() <= 1e-12 * w.rhs.abs().max(1.0), "{}: rhs {r} vs {}", rep.inequality, w.rhs);
    assert!((s - w.slack).abs() <= 1e-12 * w.slack.abs().max(1.0));
}

#[test]
fn suites_pass_on_fn_fixtures() {
    for (name, a) in algebras() {
        let c = cfg(500, 1);
        let reps = [
            young_sweep(a, &c).unwrap(),
            reverse_young2_sweep(a, &REVERSE_YOUNG_TRIPLES, &c).unwrap(),
            sumset_sweep(a, DEFAULT_RANK_TOL, &c).unwrap(),
            qeci_sweep(a, &c).unwrap(),
        ];
        for rep in &reps {
            assert!(rep.passed(), "{name}: {} min slack {}", rep.inequality, rep.min_slack());
            assert_witness_reproduces(rep, a);
            let back: InequalityReport = serde_json::from_str(&serde_json::to_string(rep).unwrap()).unwrap();
            assert_eq!(&back, rep);
        }
    }
}

#[test]
fn theta_swap_violates_young_somewhere() {
    let s = build_theta_swap(0.5, 2).unwrap();
    let rep = young_sweep(&s, &cfg(100, 0)).unwrap();
    assert!(!rep.passed());
    assert!(rep.cases.iter().any(|c| !c.passed));
    let err = smooth_qeci_check(
        &s,
        &Element::random_density(s.spec(), 0, 0, 1.0),
        &Element::random_density(s.spec(), 0, 1, 1.0),
        1.0,
        1.0,
        0.0,
        0.0,
        1,
        0,
        1e-9,
    );
    assert!(matches!(err, Err(InequalityError::OutOfScope(_))));
}

/// Point values of a commutative element.
fn values(x: &Elem) -> Vec<f64> {
    x.blocks().iter().map(|b| b[(0, 0)].re).collect()
}

fn plain_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn plain_conv(g: &GroupTable, x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for a in 0..x.len() {
        for b in 0..y.len() {
            out[g.mul(a, b)] += x[a] * y[b];
        }
    }
    out
}

fn plain_entropy(v: &[f64]) -> f64 {
    -v.iter().map(|&t| if t > 0.0 { t * t.ln() } else { 0.0 }).sum::<f64>()
}

fn groups() -> &'static [(&'static str, GroupTable, FnAlgebra)] {
    static G: OnceLock<Vec<(&'static str, GroupTable, FnAlgebra)>> = OnceLock::new();
    G.get_or_init(common::small_group_algebras)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inequality_values_match_plain_vectors(seed in any::<u64>(), which in 0usize..14) {
        let (name, g, a) = &groups()[which];
        let sp = a.spec();
        let x = Element::random_density(sp, seed, 0, 1.0);
        let y = Element::random_density(sp, seed, 1, 1.0);
        let (xv, yv) = (values(&x), values(&y));
        let conv = plain_conv(g, &xv, &yv);
        for &(p, q, r) in &qconv::inequality::admissible_pairs(&SweepConfig::default().grid) {
            let want = plain_norm(&conv, r) / (plain_norm(&xv, p) * plain_norm(&yv, q));
            let got = young_ratio(a, &x, &y, p, q).unwrap();
            prop_assert!((got - want).abs() <= 1e-10, "{}: ({}, {}) {} vs {}", name, p, q, got, want);
        }
        let rep = qeci_check(a, &x, &y, 1e-9).unwrap();
        let w = rep.worst.unwrap();
        prop_assert!((w.lhs - plain_entropy(&conv)).abs() <= 1e-10);
        prop_assert!((w.rhs - plain_entropy(&xv).max(plain_entropy(&yv))).abs() <= 1e-10);
        // sum-set: supports are counts of nonzero points
        let xs: Vec<f64> = xv.iter().enumerate().map(|(i, &t)| if i % 3 == 0 { 0.0 } else { t }).collect();
        let xe = Element::from_point_values(sp, &xs).unwrap();
        let rep = sumset_check(a, &xe, &y, DEFAULT_RANK_TOL, 1e-9).unwrap();
        let w = rep.worst.unwrap();
        let count = |v: &[f64]| v.iter().filter(|&&t| t > 0.0).count() as f64;
        prop_assert_eq!(w.lhs, count(&plain_conv(g, &xs, &yv)));
        prop_assert_eq!(w.rhs, count(&xs).max(count(&yv)));
        for (r, s, t) in REVERSE_YOUNG_TRIPLES {
            let lhs = plain_norm(&plain_conv(g, &xv.iter().map(|v| v.powf(r)).collect::<Vec<_>>(),
                &yv.iter().map(|v| v.powf(r)).collect::<Vec<_>>()), r);
            let rhs = plain_norm(&xv, t).powf(r) * plain_norm(&yv, s).powf(r);
            let w = reverse_young2_check(a, &x, &y, r, s, t, 1e-9).unwrap().worst.unwrap();
            prop_assert!((w.lhs - lhs).abs() <= 1e-10 * lhs.max(1.0) && (w.rhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        }
    }

    #[test]
    fn triple_qeci_and_phase_young_hold(seed in any::<u64>(), which in 0usize..16) {
        let (name, a) = &algebras()[which];
        let sp = a.spec();
        let k = a.k();
        let xs: Vec<Elem> = (0..3).map(|i| Element::random_density(sp, seed, i, 1.0 / k)).collect();
        let rep = qeci_triple_check(a, [&xs[0], &xs[1], &xs[2]], &[AssociationOrder::Left, AssociationOrder::Right], 1e-9).unwrap();
        prop_assert!(rep.passed(), "{}: {}", name, rep.min_slack());
        let ys: Vec<Elem> = (3..5).map(|i| Element::random_gaussian(sp, seed, i)).collect();
        let rep = phase_young_check(a, &xs[..2], &ys, 2.0, 2.0, 5, 1e-9).unwrap();
        prop_assert!(rep.passed(), "{}: phase Young {}", name, rep.min_slack());
    }

    #[test]
    fn sweep_witnesses_reproduce(seed in any::<u64>(), which in 0usize..16) {
        let (_, a) = &algebras()[which];
        let rep = young_sweep(a, &SweepConfig { refine_starts: 1, refine_steps: 5, ..cfg(20, seed) }).unwrap();
        assert_witness_reproduces(&rep, a);
        prop_assert_eq!(&rep, &young_sweep(a, &SweepConfig { refine_starts: 1, refine_steps: 5, ..cfg(20, seed) }).unwrap());
    }
}

fn m2_plus_c() -> Arc<AlgebraSpec<f64>> {
    Arc::new(AlgebraSpec::new(vec![Block { n: 2, delta: 1.0 }, Block { n: 1, delta: 2.0 }]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entropy_continuity_bound_holds(seed in any::<u64>(), h in 0.2f64..3.0, pi in 0usize..5, mix in 1e-6f64..1.0) {
        let sp = m2_plus_c();
        let p = [1.0, 1.5, 2.0, 3.0, f64::INFINITY][pi];
        let x = Element::random_density(&sp, seed, 0, h * rng::uniform(&mut rng::stream(seed, 9)).max(1e-3));
        let z = Element::random_density(&sp, seed, 1, h);
        let y = x.scale_real(1.0 - mix).add(&z.scale_real(mix)).unwrap();
        let eps = x.sub(&y).unwrap().p_norm(p).unwrap();
        prop_assume!(eps <= 1.0);
        let b = continuity_bound(sp.fp_dim(), sp.min_projection_trace(), h, p, eps).unwrap();
        prop_assert!((x.entropy().unwrap() - y.entropy().unwrap()).abs() <= b + 1e-12);
    }

    #[test]
    fn continuity_bound_increases_on_small_eps(d in 1.0f64..20.0, lam in 0.1f64..1.0, h in 0.1f64..10.0, pi in 0usize..5, e1 in 1e-9f64..0.36, e2 in 1e-9f64..0.36) {
        let p = [1.0, 1.5, 2.0, 3.0, f64::INFINITY][pi];
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let b = |e| continuity_bound(d, lam, h, p, e).unwrap();
        prop_assert!(b(lo) <= b(hi));
        prop_assert_eq!(b(0.0), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smooth_entropy_is_monotone_and_feasible(seed in any::<u64>(), pi in 0usize..5) {
        let sp = m2_plus_c();
        let p = [1.0, 1.5, 2.0, 3.0, f64::INFINITY][pi];
        let x = Element::random_density(&sp, seed, 0, 1.0);
        let h = x.entropy().unwrap();
        let at0 = smooth_entropy(&x, p, 0.0, 8, seed).unwrap();
        prop_assert_eq!(at0.value, h);
        let mut prev = h;
        for eps in [0.01, 0.05, 0.1, 0.3, 0.6, 1.0] {
            let s = smooth_entropy(&x, p, eps, 8, seed).unwrap();
            prop_assert!(s.value >= prev - 1e-6, "p={} ε={}: {} after {}", p, eps, s.value, prev);
            prop_assert!(s.value >= h);
            prop_assert!(s.witness.is_psd());
            prop_assert!(s.witness.sub(&x).unwrap().p_norm(p).unwrap() <= eps * (1.0 + 1e-9));
            prop_assert!((s.witness.entropy().unwrap() - s.value).abs() <= 1e-12 * s.value.abs().max(1.0));
            prev = s.value;
        }
        // the trace-preserving maximizer is (τ(x)/d)·I, with entropy τ(x)·log(d/τ(x))
        let u_h = (sp.fp_dim()).ln();
        prop_assert!(smooth_entropy(&x, p, 1.0, 8, seed).unwrap().value <= u_h + 1.0 / std::f64::consts::E * sp.fp_dim());
    }

    #[test]
    fn smooth_conv_entropy_is_an_upper_bound_from_feasible_pairs(seed in any::<u64>(), which in 0usize..16) {
        let (_, a) = &algebras()[which];
        let sp = a.spec();
        let x = Element::random_density(sp, seed, 0, 1.0);
        let y = Element::random_density(sp, seed, 1, 1.0);
        let base = a.convolve(&x, &y).unwrap().entropy().unwrap();
        let zero = smooth_conv_entropy(a, &x, &y, 1.0, 2.0, 0.0, 0.0, 4, seed).unwrap();
        prop_assert_eq!(zero.value, base);
        let one = smooth_conv_entropy(a, &x, &y, 1.0, 2.0, 0.05, 0.05, 1, seed).unwrap();
        prop_assert_eq!(one.value, base);
        let s = smooth_conv_entropy(a, &x, &y, 1.0, 2.0, 0.05, 0.05, 6, seed).unwrap();
        prop_assert!(s.value <= base);
        prop_assert!(s.z.is_psd() && s.w.is_psd());
        prop_assert!(s.z.sub(&x).unwrap().p_norm(1.0).unwrap() <= 0.05 * (1.0 + 1e-9));
        prop_assert!(s.w.sub(&y).unwrap().p_norm(2.0).unwrap() <= 0.05 * (1.0 + 1e-9));
        let v = a.convolve(&s.z, &s.w).unwrap().hermitian_part().entropy().unwrap();
        prop_assert!((v - s.value).abs() <= 1e-9 * v.abs().max(1.0));
    }

    #[test]
    fn smooth_qeci_at_zero_radius_is_qeci(seed in any::<u64>(), which in 0usize..16) {
        let (_, a) = &algebras()[which];
        let sp = a.spec();
        let x = Element::random_density(sp, seed, 0, 1.0 / a.k());
        let y = Element::random_density(sp, seed, 1, 1.0 / a.k());
        let smooth = smooth_qeci_check(a, &x, &y, 1.0, 1.0, 0.0, 0.0, 4, seed, 1e-9).unwrap();
        let plain = qeci_check(a, &x, &y, 1e-9).unwrap();
        prop_assert_eq!(smooth.passed(), plain.passed());
        let w = plain.worst.unwrap();
        prop_assert!((smooth.worst.unwrap().lhs - w.lhs).abs() <= 1e-12);
    }
}

#[test]
fn smooth_qeci_rejects_large_radii() {
    let (_, a) = &algebras()[2];
    let x = Element::random_density(a.spec(), 0, 0, 1.0);
    let err = smooth_qeci_check(a, &x, &x, 1.0, 1.0, 0.25, 0.25, 4, 0, 1e-9).unwrap_err();
    match err {
        InequalityError::Precondition(m) => assert!(m.contains("ε+η ≤ 1/((d+1)(1+k(d+1)))"), "{m}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn smooth_entropy_on_two_points_reaches_the_mixed_density() {
    // x = (1, 0): the segment toward (1/2, 1/2) at p = 1, ε = 1/2 ends at (3/4, 1/4)
    let sp = Arc::new(AlgebraSpec::points(2));
    let x = Element::from_point_values(&sp, &[1.0, 0.0]).unwrap();
    let s = smooth_entropy(&x, 1.0, 0.5, 8, 0).unwrap();
    let mixed = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
    assert!(s.value >= mixed - 1e-9 && s.value > 0.0, "{} vs {mixed}", s.value);
    // and whenever uniform is reachable the value is at least H(uniform)
    let u = smooth_entropy(&x, 1.0, 1.0, 8, 0).unwrap();
    assert!(u.value >= 2f64.ln() - 1e-9);
}
