use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    aggregate, evaluate_all, exponent, fmt_exp, Case, ConvolutionAlgebra, InequalityError, InequalityReport, Record,
    Result, SEMANTICS_VERIFY,
};
use crate::algebra::Element;
use crate::convolution::{sample_general, sample_psd, ConvolutionStructure, Elem};
use crate::rng;

/// Exponent grid and sampling parameters for a Young sweep. Only `(p, q)` are
/// configured; `r` is always derived from `1 + 1/r = 1/p + 1/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    #[serde(with = "exponent::vec")]
    pub grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Hill-climbing restarts from the worst samples of each grid point.
    pub refine_starts: usize,
    pub refine_steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY],
            samples: 500,
            seed: 0,
            tol: 1e-9,
            refine_starts: 3,
            refine_steps: 40,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(InequalityError::InvalidConfig("empty exponent grid".into()));
        }
        if let Some(p) = self.grid.iter().find(|p| !(**p >= 1.0)) {
            return Err(InequalityError::InvalidConfig(format!("exponent {p} is below 1")));
        }
        if !(self.tol >= 0.0) {
            return Err(InequalityError::InvalidConfig("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// `r` from `1 + 1/r = 1/p + 1/q`, or `None` when `1/p + 1/q < 1`.
pub(crate) fn derived_r(p: f64, q: f64) -> Option<f64> {
    let s = inv(p) + inv(q) - 1.0;
    if s.abs() <= 1e-12 {
        Some(f64::INFINITY)
    } else if s > 0.0 {
        Some(1.0 / s)
    } else {
        None
    }
}

/// All `(p, q, r)` with `p, q` from the grid and `1/p + 1/q ∈ [1, 2]`.
pub fn admissible_pairs(grid: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &p in grid {
        for &q in grid {
            if let Some(r) = derived_r(p, q) {
                out.push((p, q, r));
            }
        }
    }
    out
}

pub(crate) fn young_sides(s: &ConvolutionStructure, x: &Elem, y: &Elem, p: f64, q: f64, r: f64) -> Result<(f64, f64)> {
    let lhs = s.convolve(x, y)?.p_norm(r)?;
    let rhs = s.k() * x.p_norm(p)? * y.p_norm(q)?;
    Ok((lhs, rhs))
}

/// `‖x∗y‖_r / (k‖x‖_p‖y‖_q)` with `r` derived from `(p, q)`.
pub fn young_ratio(a: &dyn ConvolutionAlgebra, x: &Elem, y: &Elem, p: f64, q: f64) -> Result<f64> {
    let r = derived_r(p, q)
        .ok_or_else(|| InequalityError::Precondition(format!("1/p + 1/q must be at least 1 (p = {p}, q = {q})")))?;
    let (l, rh) = young_sides(a.structure(), x, y, p, q, r)?;
    Ok(l / rh)
}

/// Structured candidates: minimal projections and the identity.
fn structured(a: &dyn ConvolutionAlgebra) -> Vec<Elem> {
    let mut v = Element::minimal_projections(a.spec());
    v.push(Element::identity(a.spec()));
    v
}

fn random_pair(a: &dyn ConvolutionAlgebra, seed: u64, i: u64) -> Vec<Elem> {
    let sp = a.spec();
    let (s1, s2) = (rng::child_seed(seed, 1), rng::child_seed(seed, 2));
    match i % 4 {
        0 => vec![sample_general(sp, s1, i), sample_general(sp, s2, i)],
        1 => vec![sample_psd(sp, s1, 3 * i), sample_psd(sp, s2, 3 * i)],
        2 => vec![sample_psd(sp, s1, 3 * i + 2), sample_psd(sp, s2, 3 * i + 2)],
        _ => vec![sample_general(sp, s1, i), sample_psd(sp, s2, 3 * i + 1)],
    }
}

/// Random-perturbation hill climb on `lhs / rhs` from one instance.
fn refine(
    a: &dyn ConvolutionAlgebra,
    case: &Case,
    start: &Record,
    steps: usize,
    seed: u64,
) -> Result<Vec<Record>> {
    let mut cur = start.inputs.clone();
    let ratio = |l: f64, r: f64| if r > 0.0 { l / r } else { 0.0 };
    let mut best = ratio(start.lhs, start.rhs);
    let mut out = Vec::new();
    for step in 0..steps {
        let sigma = 0.3 * (1.0 - step as f64 / steps as f64) + 1e-3;
        let cand: Vec<Elem> = cur
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let g = Element::random_gaussian(x.spec(), rng::child_seed(seed, j as u64), step as u64);
                let scale = x.inner(x).expect("same spec").re.sqrt().max(1e-12) * sigma;
                let gn = g.inner(&g).expect("same spec").re.sqrt();
                x.add(&g.scale(Complex64::new(scale / gn, 0.0))).expect("same spec")
            })
            .collect();
        let (l, r) = case.evaluate(a, &cand)?;
        let v = ratio(l, r);
        out.push(Record {
            case: start.case,
            inputs: cand.clone(),
            lhs: l,
            rhs: r,
        });
        if v > best {
            best = v;
            cur = cand;
        }
    }
    Ok(out)
}

/// Largest `‖x∗y‖_r / (k‖x‖_p‖y‖_q)` over the admissible grid; passes iff the
/// ratio never exceeds `1 + tol`.
///
/// Per grid point the candidates are all pairs of minimal projections and the
/// identity, `cfg.samples` random pairs (general, PSD, rank-one, mixed), and a
/// short hill climb from the worst few.
pub fn young_sweep(a: &dyn ConvolutionAlgebra, cfg: &SweepConfig) -> Result<InequalityReport> {
    cfg.validate()?;
    let cases: Vec<Case> = admissible_pairs(&cfg.grid)
        .into_iter()
        .map(|(p, q, r)| Case::Young { p, q, r })
        .collect();
    let special = structured(a);
    let mut jobs = Vec::new();
    for ci in 0..cases.len() {
        for x in &special {
            for y in &special {
                jobs.push((ci, vec![x.clone(), y.clone()]));
            }
        }
        for i in 0..cfg.samples as u64 {
            jobs.push((ci, random_pair(a, cfg.seed, i)));
        }
    }
    let mut records = evaluate_all(a, &cases, jobs)?;
    if cfg.refine_starts > 0 && cfg.refine_steps > 0 {
        let mut starts = Vec::new();
        for ci in 0..cases.len() {
            let mut idx: Vec<usize> = (0..records.len()).filter(|&i| records[i].case == ci).collect();
            let key = |i: &usize| {
                let r = &records[*i];
                cases[ci].slack(r.lhs, r.rhs)
            };
            idx.sort_by(|i, j| key(i).total_cmp(&key(j)));
            starts.extend(idx.into_iter().take(cfg.refine_starts));
        }
        let extra: Vec<Vec<Record>> = starts
            .par_iter()
            .enumerate()
            .map(|(n, &i)| {
                let rec = &records[i];
                refine(
                    a,
                    &cases[rec.case],
                    rec,
                    cfg.refine_steps,
                    rng::child_seed(rng::child_seed(cfg.seed, 0x5eed), n as u64),
                )
            })
            .collect::<Result<_>>()?;
        records.extend(extra.into_iter().flatten());
    }
    let mut rep = aggregate("young", SEMANTICS_VERIFY, &cases, &records, cfg.tol, cfg.seed);
    rep.notes.push(format!(
        "grid {:?}; r derived from 1 + 1/r = 1/p + 1/q; k = {}",
        cfg.grid.iter().map(|p| fmt_exp(*p)).collect::<Vec<_>>(),
        a.structure().k()
    ));
    Ok(rep)
}

fn phase_sum(xs: &[Elem], t: f64, sign: f64) -> Result<Elem> {
    let mut acc = Element::zero(xs[0].spec());
    for (j, x) in xs.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, sign * 2.0 * PI * (j + 1) as f64 * t);
        acc = acc.add(&x.scale(ph))?;
    }
    Ok(acc)
}

pub(crate) fn phase_sides(
    s: &ConvolutionStructure,
    xs: &[Elem],
    ys: &[Elem],
    p: f64,
    q: f64,
    r: f64,
    grid: usize,
) -> Result<(f64, f64)> {
    let mut sum = Element::zero(s.spec());
    for (x, y) in xs.iter().zip(ys) {
        sum = sum.add(&s.convolve(x, y)?)?;
    }
    let lhs = sum.p_norm(r)?;
    let mut rhs = f64::NEG_INFINITY;
    for m in 0..grid {
        let t = if grid == 1 { 0.0 } else { m as f64 / (grid - 1) as f64 };
        let v = s.k() * phase_sum(xs, t, 1.0)?.p_norm(p)? * phase_sum(ys, t, -1.0)?.p_norm(q)?;
        rhs = rhs.max(v);
    }
    Ok((lhs, rhs))
}

/// `‖Σᵢ xᵢ∗yᵢ‖_r` against the best of `t_grid_size` uniform points
/// `t ∈ [0, 1]` (the bound only holds for some `t`) of `k‖Σⱼ e^{2πijt}xⱼ‖_p‖Σₗ e^{−2πilt}yₗ‖_q`.
pub fn phase_young_check(
    a: &dyn ConvolutionAlgebra,
    xs: &[Elem],
    ys: &[Elem],
    p: f64,
    q: f64,
    t_grid_size: usize,
    tol: f64,
) -> Result<InequalityReport> {
    if xs.is_empty() || xs.len() != ys.len() || t_grid_size == 0 {
        return Err(InequalityError::BadInputLists);
    }
    let r = derived_r(p, q)
        .ok_or_else(|| InequalityError::Precondition(format!("1/p + 1/q must be at least 1 (p = {p}, q = {q})")))?;
    let cases = vec![Case::PhaseYoung { p, q, r, t_grid_size }];
    let inputs: Vec<Elem> = xs.iter().chain(ys).cloned().collect();
    let records = evaluate_all(a, &cases, vec![(0, inputs)])?;
    Ok(aggregate("phase_young", SEMANTICS_VERIFY, &cases, &records, tol, 0))
}
