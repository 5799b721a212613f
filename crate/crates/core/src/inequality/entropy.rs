use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bounds::{continuity_bound, conv_continuity_bound};
use super::{
    aggregate, evaluate_all, require_normalized, require_psd, Case, ConvolutionAlgebra, InequalityError,
    InequalityReport, Result, SweepConfig, SEMANTICS_VERIFY,
};
use crate::algebra::Element;
use crate::convolution::{sample_psd, ConvolutionStructure, Elem, Spec};
use crate::rng;

/// `(r, s, t)` triples exercised by the reverse Young sweep.
pub const REVERSE_YOUNG_TRIPLES: [(f64, f64, f64); 3] = [(0.5, 2.0 / 3.0, 2.0 / 3.0), (0.75, 6.0 / 7.0, 6.0 / 7.0), (1.0, 1.0, 1.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociationOrder {
    /// `(x₁∗x₂)∗x₃`
    Left,
    /// `x₁∗(x₂∗x₃)`
    Right,
}

pub(crate) fn reverse_young2_sides(
    s: &ConvolutionStructure,
    x: &Elem,
    y: &Elem,
    r: f64,
    sx: f64,
    t: f64,
) -> Result<(f64, f64)> {
    let lambda = s.spec().min_projection_trace();
    let lhs = s.convolve(&x.power(r)?, &y.power(r)?)?.p_norm(r)?;
    let rhs = lambda.powf(1.0 / r - r) * s.k() * x.p_norm(t)?.powf(r) * y.p_norm(sx)?.powf(r);
    Ok((lhs, rhs))
}

fn check_reverse_exponents(r: f64, s: f64, t: f64) -> Result<()> {
    let ok = [r, s, t].iter().all(|e| *e > 0.0 && *e <= 1.0);
    if !ok || (1.0 + 1.0 / r - 1.0 / s - 1.0 / t).abs() > 1e-12 * (1.0 + 1.0 / r) {
        return Err(InequalityError::Precondition(format!(
            "0 < r, s, t ≤ 1 with 1 + 1/r = 1/s + 1/t is required (r = {r}, s = {s}, t = {t})"
        )));
    }
    Ok(())
}

/// `‖x^r∗y^r‖_r ≥ λ^{1/r−r}·k·‖x‖_t^r·‖y‖_s^r` for PSD `x, y`.
pub fn reverse_young2_check(
    a: &dyn ConvolutionAlgebra,
    x: &Elem,
    y: &Elem,
    r: f64,
    s: f64,
    t: f64,
    tol: f64,
) -> Result<InequalityReport> {
    check_reverse_exponents(r, s, t)?;
    require_psd(x, "x")?;
    require_psd(y, "y")?;
    let cases = vec![Case::ReverseYoung2 { r, s, t }];
    let recs = evaluate_all(a, &cases, vec![(0, vec![x.clone(), y.clone()])])?;
    Ok(aggregate("reverse_young", SEMANTICS_VERIFY, &cases, &recs, tol, 0))
}

/// Reverse Young over `triples` with `cfg.samples` PSD pairs each.
pub fn reverse_young2_sweep(
    a: &dyn ConvolutionAlgebra,
    triples: &[(f64, f64, f64)],
    cfg: &SweepConfig,
) -> Result<InequalityReport> {
    for &(r, s, t) in triples {
        check_reverse_exponents(r, s, t)?;
    }
    let cases: Vec<Case> = triples.iter().map(|&(r, s, t)| Case::ReverseYoung2 { r, s, t }).collect();
    let mut jobs = Vec::new();
    for ci in 0..cases.len() {
        for i in 0..cfg.samples as u64 {
            jobs.push((ci, psd_pair(a.spec(), cfg.seed, i)));
        }
    }
    let recs = evaluate_all(a, &cases, jobs)?;
    Ok(aggregate("reverse_young", SEMANTICS_VERIFY, &cases, &recs, cfg.tol, cfg.seed))
}

fn psd_pair(spec: &std::sync::Arc<Spec>, seed: u64, i: u64) -> Vec<Elem> {
    vec![
        sample_psd(spec, rng::child_seed(seed, 11), i),
        sample_psd(spec, rng::child_seed(seed, 12), i),
    ]
}

pub(crate) fn sumset_sides(s: &ConvolutionStructure, x: &Elem, y: &Elem, rank_tol: f64) -> Result<(f64, f64)> {
    let (rx, ry) = (x.range_projection(rank_tol)?, y.range_projection(rank_tol)?);
    let lhs = s.convolve(&rx, &ry)?.hermitian_part().support_with(rank_tol)?;
    let rhs = rx.trace().re.max(ry.trace().re);
    Ok((lhs, rhs))
}

/// `S(R(x)∗R(y)) ≥ max{S(x), S(y)}` at the given relative rank tolerance.
pub fn sumset_check(a: &dyn ConvolutionAlgebra, x: &Elem, y: &Elem, rank_tol: f64, tol: f64) -> Result<InequalityReport> {
    require_psd(x, "x")?;
    require_psd(y, "y")?;
    let cases = vec![Case::Sumset { rank_tol }];
    let recs = evaluate_all(a, &cases, vec![(0, vec![x.clone(), y.clone()])])?;
    Ok(aggregate("sumset", SEMANTICS_VERIFY, &cases, &recs, tol, 0))
}

/// Random PSD element supported on a random subset of minimal projections,
/// conjugated blockwise by a random unitary-ish factor so supports are not
/// always diagonal.
fn low_rank_psd(spec: &std::sync::Arc<Spec>, seed: u64, i: u64) -> Elem {
    let mut r = rng::stream(seed, i);
    let mins = Element::minimal_projections(spec);
    let mut acc = Element::zero(spec);
    for m in &mins {
        if rng::uniform(&mut r) < 0.5 {
            acc = acc.add(&m.scale_real(0.1 + rng::uniform(&mut r))).expect("same spec");
        }
    }
    if acc.max_abs() == 0.0 {
        acc = mins[i as usize % mins.len()].clone();
    }
    let g = Element::random_gaussian(spec, rng::child_seed(seed, 99), i);
    let g = g.add(&Element::identity(spec).scale(Complex64::new(2.0, 0.0))).expect("same spec");
    g.mul(&acc).and_then(|v| v.mul(&g.adjoint())).expect("same spec").hermitian_part()
}

/// Sum-set estimate over full-rank, rank-one and subset-supported PSD pairs.
pub fn sumset_sweep(a: &dyn ConvolutionAlgebra, rank_tol: f64, cfg: &SweepConfig) -> Result<InequalityReport> {
    let cases = vec![Case::Sumset { rank_tol }];
    let sp = a.spec();
    let jobs = (0..cfg.samples as u64)
        .map(|i| {
            let v = match i % 3 {
                0 => psd_pair(sp, cfg.seed, i),
                1 => psd_pair(sp, cfg.seed, 3 * i + 2),
                _ => vec![
                    low_rank_psd(sp, rng::child_seed(cfg.seed, 21), i),
                    low_rank_psd(sp, rng::child_seed(cfg.seed, 22), i),
                ],
            };
            (0, v)
        })
        .collect();
    let recs = evaluate_all(a, &cases, jobs)?;
    Ok(aggregate("sumset", SEMANTICS_VERIFY, &cases, &recs, cfg.tol, cfg.seed))
}

pub(crate) fn qeci_sides(s: &ConvolutionStructure, x: &Elem, y: &Elem) -> Result<(f64, f64)> {
    let lhs = s.convolve(x, y)?.hermitian_part().entropy()?;
    Ok((lhs, x.entropy()?.max(y.entropy()?)))
}

pub(crate) fn qeci_weighted_sides(s: &ConvolutionStructure, x: &Elem, y: &Elem, theta: f64) -> Result<(f64, f64)> {
    let lhs = s.convolve(x, y)?.hermitian_part().entropy()?;
    Ok((lhs, theta * x.entropy()? + (1.0 - theta) * y.entropy()?))
}

pub(crate) fn qeci_triple_sides(s: &ConvolutionStructure, xs: &[Elem], order: AssociationOrder) -> Result<(f64, f64)> {
    let v = match order {
        AssociationOrder::Left => s.convolve(&s.convolve(&xs[0], &xs[1])?, &xs[2])?,
        AssociationOrder::Right => s.convolve(&xs[0], &s.convolve(&xs[1], &xs[2])?)?,
    };
    let mut rhs = f64::NEG_INFINITY;
    for x in xs {
        rhs = rhs.max(x.entropy()?);
    }
    Ok((v.hermitian_part().entropy()?, rhs))
}

/// `H(x∗y) ≥ max{H(x), H(y)}` for PSD `x, y` with `‖x‖₁ = ‖y‖₁ = 1/k`; the
/// endpoints `θ ∈ {0, 1}` imply every intermediate `θ`.
pub fn qeci_check(a: &dyn ConvolutionAlgebra, x: &Elem, y: &Elem, tol: f64) -> Result<InequalityReport> {
    let k = a.structure().k();
    require_normalized(x, k, "x")?;
    require_normalized(y, k, "y")?;
    let cases = vec![Case::Qeci];
    let recs = evaluate_all(a, &cases, vec![(0, vec![x.clone(), y.clone()])])?;
    Ok(aggregate("qeci", SEMANTICS_VERIFY, &cases, &recs, tol, 0))
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(InequalityError::InvalidConfig(format!("θ = {theta} must lie in [0, 1]")))
    }
}

/// `H(x∗y) ≥ θH(x) + (1−θ)H(y)` at a single `θ`, for PSD `x, y` with
/// `‖x‖₁ = ‖y‖₁ = 1/k`. This is the form claimed for convolutions without an
/// antipode, such as the θ-swap at its own `θ`.
pub fn qeci_weighted_check(a: &dyn ConvolutionAlgebra, x: &Elem, y: &Elem, theta: f64, tol: f64) -> Result<InequalityReport> {
    check_theta(theta)?;
    let k = a.structure().k();
    require_normalized(x, k, "x")?;
    require_normalized(y, k, "y")?;
    let cases = vec![Case::QeciWeighted { theta }];
    let recs = evaluate_all(a, &cases, vec![(0, vec![x.clone(), y.clone()])])?;
    Ok(aggregate("qeci", SEMANTICS_VERIFY, &cases, &recs, tol, 0))
}

/// Triple convolution entropy against the largest single entropy, for the
/// requested association orders.
pub fn qeci_triple_check(
    a: &dyn ConvolutionAlgebra,
    xs: [&Elem; 3],
    orders: &[AssociationOrder],
    tol: f64,
) -> Result<InequalityReport> {
    let k = a.structure().k();
    for (i, x) in xs.iter().enumerate() {
        require_normalized(x, k, &format!("x{}", i + 1))?;
    }
    let cases: Vec<Case> = orders.iter().map(|&order| Case::QeciTriple { order }).collect();
    let inputs: Vec<Elem> = xs.iter().map(|x| (*x).clone()).collect();
    let jobs = (0..cases.len()).map(|c| (c, inputs.clone())).collect();
    let recs = evaluate_all(a, &cases, jobs)?;
    Ok(aggregate("qeci_triple", SEMANTICS_VERIFY, &cases, &recs, tol, 0))
}

/// qECI over `cfg.samples` random PSD pairs normalized to trace `1/k`.
pub fn qeci_sweep(a: &dyn ConvolutionAlgebra, cfg: &SweepConfig) -> Result<InequalityReport> {
    qeci_sweep_cases(a, vec![Case::Qeci], cfg)
}

/// Weighted qECI at one `θ` over `cfg.samples` random PSD pairs normalized to trace `1/k`.
pub fn qeci_weighted_sweep(a: &dyn ConvolutionAlgebra, theta: f64, cfg: &SweepConfig) -> Result<InequalityReport> {
    check_theta(theta)?;
    qeci_sweep_cases(a, vec![Case::QeciWeighted { theta }], cfg)
}

fn qeci_sweep_cases(a: &dyn ConvolutionAlgebra, cases: Vec<Case>, cfg: &SweepConfig) -> Result<InequalityReport> {
    let k = a.structure().k();
    let jobs = (0..cfg.samples as u64)
        .map(|i| {
            let v = psd_pair(a.spec(), cfg.seed, i)
                .into_iter()
                .map(|x| x.normalize_trace(1.0 / k).expect("unit-trace sample"))
                .collect();
            (0, v)
        })
        .collect();
    let recs = evaluate_all(a, &cases, jobs)?;
    Ok(aggregate("qeci", SEMANTICS_VERIFY, &cases, &recs, cfg.tol, cfg.seed))
}

pub(crate) fn continuity_sides(spec: &Spec, x: &Elem, y: &Elem, p: f64, h: f64) -> Result<(f64, f64)> {
    for (v, n) in [(x, "x"), (y, "y")] {
        if v.trace().re > h * (1.0 + 1e-12) {
            return Err(InequalityError::Precondition(format!("‖{n}‖₁ ≤ h = {h} is required")));
        }
    }
    let eps = x.sub(y)?.p_norm(p)?;
    let rhs = continuity_bound(spec.fp_dim(), spec.min_projection_trace(), h, p, eps)?;
    Ok(((x.entropy()? - y.entropy()?).abs(), rhs))
}

pub(crate) fn conv_continuity_sides(s: &ConvolutionStructure, v: &[Elem], p: f64, q: f64, h: f64) -> Result<(f64, f64)> {
    for (i, e) in v.iter().enumerate() {
        if e.trace().re > h * (1.0 + 1e-12) {
            return Err(InequalityError::Precondition(format!("input {i} has trace above h = {h}")));
        }
    }
    let sp = s.spec();
    let eps = v[0].sub(&v[2])?.p_norm(p)?;
    let eta = v[1].sub(&v[3])?.p_norm(q)?;
    let rhs = conv_continuity_bound(sp.fp_dim(), sp.min_projection_trace(), h, s.k(), p, q, eps, eta)?;
    let a = s.convolve(&v[0], &v[1])?.hermitian_part().entropy()?;
    let b = s.convolve(&v[2], &v[3])?.hermitian_part().entropy()?;
    Ok(((a - b).abs(), rhs))
}

/// A PSD element near `x`: `(1−s)x + s z` with `‖x − y‖_p = target` when
/// reachable, where `z` is a random PSD element of trace at most `h`.
fn nearby(x: &Elem, z: &Elem, p: f64, target: f64) -> Elem {
    let dist = x.sub(z).expect("same spec").p_norm(p).expect("valid exponent");
    let s = if dist > 0.0 { (target / dist).min(1.0) } else { 0.0 };
    x.scale_real(1.0 - s).add(&z.scale_real(s)).expect("same spec")
}

/// Log-uniform distance in `[1e-6, max]`.
fn distance(r: &mut rng::Stream, max: f64) -> f64 {
    max * 10f64.powf(-6.0 * rng::uniform(r))
}

/// Entropy continuity over `cfg.samples` PSD pairs with traces at most `h`
/// and `‖x − y‖_p ≤ 1`, for each `p` in `cfg.grid`.
pub fn continuity_sweep(a: &dyn ConvolutionAlgebra, h: f64, cfg: &SweepConfig) -> Result<InequalityReport> {
    let sp = a.spec();
    let cases: Vec<Case> = cfg.grid.iter().map(|&p| Case::Continuity { p, h }).collect();
    let mut jobs = Vec::new();
    for (ci, &p) in cfg.grid.iter().enumerate() {
        for i in 0..cfg.samples as u64 {
            let mut r = rng::stream(rng::child_seed(cfg.seed, 31 + ci as u64), i);
            let x = sample_psd(sp, rng::child_seed(cfg.seed, 41), i).scale_real(h * rng::uniform(&mut r));
            let z = sample_psd(sp, rng::child_seed(cfg.seed, 42), i).scale_real(h * rng::uniform(&mut r));
            let y = nearby(&x, &z, p, distance(&mut r, 1.0));
            jobs.push((ci, vec![x, y]));
        }
    }
    let recs = evaluate_all(a, &cases, jobs)?;
    Ok(aggregate("continuity", SEMANTICS_VERIFY, &cases, &recs, cfg.tol, cfg.seed))
}

/// Convolution-entropy continuity over random quadruples within the
/// admissible radius `ε + η ≤ 1/(kh(d+1))`, for every `(p, q)` in `cfg.grid`².
pub fn conv_continuity_sweep(a: &dyn ConvolutionAlgebra, h: f64, cfg: &SweepConfig) -> Result<InequalityReport> {
    let sp = a.spec();
    let k = a.structure().k();
    let limit = 1.0 / (k * h * (sp.fp_dim() + 1.0));
    let mut cases = Vec::new();
    for &p in &cfg.grid {
        for &q in &cfg.grid {
            cases.push(Case::ConvContinuity { p, q, h });
        }
    }
    let mut jobs = Vec::new();
    for (ci, c) in cases.iter().enumerate() {
        let Case::ConvContinuity { p, q, .. } = *c else { unreachable!() };
        for i in 0..cfg.samples as u64 {
            let mut r = rng::stream(rng::child_seed(cfg.seed, 51 + ci as u64), i);
            let mut draw = |tag: u64| sample_psd(sp, rng::child_seed(cfg.seed, tag), i).scale_real(h * rng::uniform(&mut r));
            let (x, y, zx, zy) = (draw(61), draw(62), draw(63), draw(64));
            let split = rng::uniform(&mut r);
            let total = distance(&mut r, limit);
            let z = nearby(&x, &zx, p, total * split);
            let w = nearby(&y, &zy, q, total * (1.0 - split));
            jobs.push((ci, vec![x, y, z, w]));
        }
    }
    let recs = evaluate_all(a, &cases, jobs)?;
    Ok(aggregate("conv_continuity", SEMANTICS_VERIFY, &cases, &recs, cfg.tol, cfg.seed))
}
