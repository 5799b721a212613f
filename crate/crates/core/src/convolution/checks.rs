//! Sample-based and exhaustive axiom checkers. Every checker reports its worst
//! violation together with the inputs that produced it.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Antipode, ConvolutionStructure, Elem, Spec};
use crate::algebra::{Element, ElementJson};
use crate::linalg;
use crate::rng;

type C = Complex64;

/// Default absolute tolerance for axiom checks (inputs are normalized).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Exhaustive Frobenius triples are used when `D³` is at most this.
const BASIS_TRIPLE_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub detail: String,
    pub elements: Vec<ElementJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub axiom: String,
    pub passed: bool,
    /// Largest violation seen; the check passes iff `worst ≤ tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub regime: String,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodConvolutionReport {
    pub k: f64,
    /// `τ⊗τ(Δ(I)) / d²`.
    pub k_estimated: f64,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl GoodConvolutionReport {
    pub fn check(&self, axiom: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

/// Independent streams per checker so that adding samples to one check does
/// not shift another.
fn sub_seed(seed: u64, tag: &str) -> u64 {
    tag.bytes().fold(seed, |s, b| rng::child_seed(s, b as u64))
}

fn norm2(x: &Elem) -> f64 {
    x.inner(x).expect("same spec").re.sqrt()
}

/// General sample with `‖x‖₂ = 1`.
pub fn sample_general(spec: &Arc<Spec>, seed: u64, index: u64) -> Elem {
    let x = Element::random_gaussian(spec, seed, index);
    let n = norm2(&x);
    x.scale_real(1.0 / n)
}

/// PSD sample with `τ(x) = 1`: a full Gram sample, or (every third index) a
/// rank-one element in one block, which probes the extreme rays of the cone.
pub fn sample_psd(spec: &Arc<Spec>, seed: u64, index: u64) -> Elem {
    if index % 3 == 2 {
        let mut r = rng::stream(rng::child_seed(seed, 0x7a), index);
        let blk = (rng::uniform(&mut r) * spec.num_blocks() as f64) as usize % spec.num_blocks();
        let n = spec.blocks()[blk].n;
        let v: Vec<C> = rng::unit_vector(&mut r, n);
        let mut blocks: Vec<_> = spec.blocks().iter().map(|b| linalg::CMatrix::zeros(b.n, b.n)).collect();
        blocks[blk] = linalg::CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Element::new(spec.clone(), blocks)
            .expect("shapes match")
            .normalize_trace(1.0)
            .expect("nonzero trace")
    } else {
        Element::random_density(spec, seed, index, 1.0)
    }
}

fn json(xs: &[&Elem]) -> Vec<ElementJson> {
    xs.iter().map(|x| ElementJson::from_element(x)).collect()
}

/// Runs `eval` over `n` indices in parallel and keeps the first maximal one.
fn worst_of(n: usize, eval: impl Fn(u64) -> f64 + Sync) -> (f64, Option<u64>) {
    let vals: Vec<f64> = (0..n as u64).into_par_iter().map(&eval).collect();
    let mut best = (f64::NEG_INFINITY, None);
    for (i, v) in vals.into_iter().enumerate() {
        // NaN counts as a violation
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > best.0 {
            best = (v, Some(i as u64));
        }
    }
    best
}

fn outcome(axiom: &str, worst: f64, tol: f64, samples: usize, regime: String, witness: Option<Witness>) -> CheckOutcome {
    CheckOutcome {
        axiom: axiom.into(),
        passed: worst <= tol,
        worst,
        tolerance: tol,
        samples,
        regime,
        witness,
    }
}

/// Most negative eigenvalue (as a positive violation) plus any non-Hermitian part.
fn negativity(x: &Elem) -> f64 {
    let dev = x.hermitian_deviation();
    let min = x.hermitian_part().min_eigenvalue().expect("Hermitian part");
    (-min).max(dev)
}

/// Positivity, primary Young, Haar, unitality of `Δ`, and positivity of `Δ`.
pub fn check_good_convolution(s: &ConvolutionStructure, n_samples: usize, seed: u64, tol: f64) -> GoodConvolutionReport {
    let spec = s.spec();
    let n = n_samples.max(1);
    let k = s.k();
    let mut checks = Vec::new();

    // (a) positivity
    let sd = sub_seed(seed, "positivity");
    let pair = |i: u64| (sample_psd(spec, sd, 2 * i), sample_psd(spec, sd, 2 * i + 1));
    let (worst, at) = worst_of(n, |i| {
        let (x, y) = pair(i);
        negativity(&s.convolve(&x, &y).expect("same spec"))
    });
    let witness = at.map(|i| {
        let (x, y) = pair(i);
        Witness {
            detail: format!("x, y >= 0 with min eigenvalue of x*y = {:e}", -worst),
            elements: json(&[&x, &y]),
        }
    });
    checks.push(outcome("positivity", worst, tol, n, "sampled PSD pairs, tau = 1".into(), witness));

    // (b) primary Young
    let sd = sub_seed(seed, "young");
    let pair = |i: u64| {
        let x = sample_general(spec, sd, 2 * i);
        let y = sample_general(spec, sd, 2 * i + 1);
        let (nx, ny) = (x.p_norm(1.0).unwrap(), y.p_norm(1.0).unwrap());
        (x.scale_real(1.0 / nx), y.scale_real(1.0 / ny))
    };
    let (worst, at) = worst_of(n, |i| {
        let (x, y) = pair(i);
        s.convolve(&x, &y).expect("same spec").p_norm(1.0).unwrap() - k
    });
    let witness = at.map(|i| {
        let (x, y) = pair(i);
        Witness {
            detail: format!("||x||_1 = ||y||_1 = 1, ||x*y||_1 - k = {worst:e}"),
            elements: json(&[&x, &y]),
        }
    });
    checks.push(outcome("primary_young", worst, tol, n, "sampled general pairs, ||.||_1 = 1".into(), witness));

    // (c) Haar
    let sd = sub_seed(seed, "haar");
    let pair = |i: u64| (sample_general(spec, sd, 2 * i), sample_general(spec, sd, 2 * i + 1));
    let (worst, at) = worst_of(n, |i| {
        let (x, y) = pair(i);
        let lhs = s.convolve(&x, &y).expect("same spec").trace();
        (lhs - x.trace() * y.trace() * k).norm()
    });
    let witness = at.map(|i| {
        let (x, y) = pair(i);
        Witness {
            detail: format!("|tau(x*y) - k tau(x) tau(y)| = {worst:e}"),
            elements: json(&[&x, &y]),
        }
    });
    checks.push(outcome("haar", worst, tol, n, "sampled general pairs, ||.||_2 = 1".into(), witness));

    // (d) unitality of Δ
    let id = Element::identity(spec);
    let delta_i = s.comultiply(&id).expect("same spec");
    let k_i = Element::identity(s.square_spec()).scale_real(k);
    let worst = delta_i.sub(&k_i).expect("same spec").max_abs();
    let d = spec.fp_dim();
    let k_estimated = delta_i.trace().re / (d * d);
    checks.push(outcome(
        "unitality",
        worst,
        tol,
        1,
        "exact: max entry of Delta(I) - kI".into(),
        Some(Witness {
            detail: format!("||Delta(I) - kI||_max = {worst:e}"),
            elements: json(&[&delta_i]),
        }),
    ));

    // (e) positivity of Δ
    if spec.is_commutative() {
        let projections = Element::minimal_projections(spec);
        let (worst, at) = worst_of(projections.len(), |i| {
            negativity(&s.comultiply(&projections[i as usize]).expect("same spec"))
        });
        let witness = at.map(|i| Witness {
            detail: format!("minimal projection {i}: min eigenvalue of Delta(e) = {:e}", -worst),
            elements: json(&[&projections[i as usize]]),
        });
        checks.push(outcome(
            "comultiplication_positivity",
            worst,
            tol,
            projections.len(),
            "exact: commutative algebra, all minimal projections".into(),
            witness,
        ));
    } else {
        let sd = sub_seed(seed, "comult");
        let (worst, at) = worst_of(n, |i| negativity(&s.comultiply(&sample_psd(spec, sd, i)).expect("same spec")));
        let witness = at.map(|i| Witness {
            detail: format!("z >= 0 with min eigenvalue of Delta(z) = {:e}", -worst),
            elements: json(&[&sample_psd(spec, sd, i)]),
        });
        checks.push(outcome(
            "comultiplication_positivity",
            worst,
            tol,
            n,
            "sampled PSD elements (non-commutative algebra)".into(),
            witness,
        ));
    }

    let passed = checks.iter().all(|c| c.passed);
    GoodConvolutionReport {
        k,
        k_estimated,
        checks,
        passed,
    }
}

fn frobenius_gap(s: &ConvolutionStructure, rho: &Antipode, x: &Elem, y: &Elem, z: &Elem) -> f64 {
    let lhs = s.convolve(x, y).and_then(|xy| Ok(xy.mul(z)?)).expect("same spec").trace();
    let rz = rho.apply(z).expect("same spec");
    let ry = rho.apply(y).expect("same spec");
    let rhs = s.convolve(&rz, x).and_then(|t| Ok(t.mul(&ry)?)).expect("same spec").trace();
    (lhs - rhs).norm()
}

/// `|τ((x∗y)z) − τ((ρ(z)∗x)ρ(y))|`, over all basis triples when the algebra
/// is small and over normalized random triples.
pub fn check_frobenius(s: &ConvolutionStructure, rho: &Antipode, n_samples: usize, seed: u64, tol: f64) -> CheckOutcome {
    let spec = s.spec();
    let d = spec.coord_dim();
    let basis = |a: usize| {
        let mut c = vec![C::new(0.0, 0.0); d];
        c[a] = C::new(1.0, 0.0);
        Element::from_coords(spec, &c).expect("length D")
    };
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut regime = Vec::new();
    if d * d * d <= BASIS_TRIPLE_LIMIT {
        let es: Vec<Elem> = (0..d).map(basis).collect();
        let (w, at) = worst_of(d * d * d, |t| {
            let t = t as usize;
            frobenius_gap(s, rho, &es[t / (d * d)], &es[(t / d) % d], &es[t % d])
        });
        if let Some(t) = at {
            let t = t as usize;
            worst = w;
            witness = Some(Witness {
                detail: format!("basis triple ({}, {}, {}): gap {w:e}", t / (d * d), (t / d) % d, t % d),
                elements: json(&[&es[t / (d * d)], &es[(t / d) % d], &es[t % d]]),
            });
        }
        regime.push(format!("all {} basis triples", d * d * d));
    }
    let sd = sub_seed(seed, "frobenius");
    let triple = |i: u64| {
        (
            sample_general(spec, sd, 3 * i),
            sample_general(spec, sd, 3 * i + 1),
            sample_general(spec, sd, 3 * i + 2),
        )
    };
    let (w, at) = worst_of(n_samples, |i| {
        let (x, y, z) = triple(i);
        frobenius_gap(s, rho, &x, &y, &z)
    });
    if let Some(i) = at {
        if w > worst {
            worst = w;
            let (x, y, z) = triple(i);
            witness = Some(Witness {
                detail: format!("sample {i}: gap {w:e}"),
                elements: json(&[&x, &y, &z]),
            });
        }
    }
    regime.push(format!("{n_samples} sampled triples, ||.||_2 = 1"));
    let total = n_samples + if d * d * d <= BASIS_TRIPLE_LIMIT { d * d * d } else { 0 };
    outcome("frobenius_reciprocity", worst, tol, total, regime.join(" + "), witness)
}

/// `max ‖(x∗y)∗z − x∗(y∗z)‖_max` over normalized random triples.
pub fn check_associativity(s: &ConvolutionStructure, n_samples: usize, seed: u64, tol: f64) -> CheckOutcome {
    let spec = s.spec();
    let sd = sub_seed(seed, "associativity");
    let triple = |i: u64| {
        (
            sample_general(spec, sd, 3 * i),
            sample_general(spec, sd, 3 * i + 1),
            sample_general(spec, sd, 3 * i + 2),
        )
    };
    let gap = |x: &Elem, y: &Elem, z: &Elem| {
        let l = s.convolve(&s.convolve(x, y).unwrap(), z).unwrap();
        let r = s.convolve(x, &s.convolve(y, z).unwrap()).unwrap();
        l.sub(&r).unwrap().max_abs()
    };
    let n = n_samples.max(1);
    let (worst, at) = worst_of(n, |i| {
        let (x, y, z) = triple(i);
        gap(&x, &y, &z)
    });
    let witness = at.map(|i| {
        let (x, y, z) = triple(i);
        Witness {
            detail: format!("||(x*y)*z - x*(y*z)||_max = {worst:e}"),
            elements: json(&[&x, &y, &z]),
        }
    });
    outcome("associativity", worst, tol, n, "sampled general triples, ||.||_2 = 1".into(), witness)
}

/// Exponents at which antipode norm preservation is checked.
pub const ANTIPODE_EXPONENTS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, f64::INFINITY];

/// Anti-multiplicativity, `*`-preservation, trace preservation and `p`-norm
/// preservation of `ρ` on normalized random samples.
pub fn check_antipode(spec: &Arc<Spec>, rho: &Antipode, n_samples: usize, seed: u64, tol: f64) -> Vec<CheckOutcome> {
    let n = n_samples.max(1);
    let sd = sub_seed(seed, "antipode");
    let pair = |i: u64| (sample_general(spec, sd, 2 * i), sample_general(spec, sd, 2 * i + 1));
    let rho_ = |x: &Elem| rho.apply(x).expect("same spec");
    let mut out = Vec::new();
    let mut run = |axiom: &str, f: &(dyn Fn(&Elem, &Elem) -> f64 + Sync)| {
        let (worst, at) = worst_of(n, |i| {
            let (x, y) = pair(i);
            f(&x, &y)
        });
        let witness = at.map(|i| {
            let (x, y) = pair(i);
            Witness {
                detail: format!("{axiom}: {worst:e}"),
                elements: json(&[&x, &y]),
            }
        });
        out.push(outcome(axiom, worst, tol, n, "sampled general pairs, ||.||_2 = 1".into(), witness));
    };
    run("antipode_anti_multiplicative", &|x, y| {
        let l = rho_(&x.mul(y).unwrap());
        let r = rho_(y).mul(&rho_(x)).unwrap();
        l.sub(&r).unwrap().max_abs()
    });
    run("antipode_star", &|x, _| rho_(&x.adjoint()).sub(&rho_(x).adjoint()).unwrap().max_abs());
    run("antipode_trace", &|x, _| (rho_(x).trace() - x.trace()).norm());
    run("antipode_norms", &|x, _| {
        let rx = rho_(x);
        ANTIPODE_EXPONENTS
            .iter()
            .map(|&p| {
                let (a, b) = (rx.p_norm(p).unwrap(), x.p_norm(p).unwrap());
                (a - b).abs() / b.max(1.0)
            })
            .fold(0.0, f64::max)
    });
    out
}

/// Result of verifying the Frobenius von Neumann axioms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnVerification {
    pub good: GoodConvolutionReport,
    pub frobenius: CheckOutcome,
    pub antipode: Vec<CheckOutcome>,
    /// Not an axiom; reported for information.
    pub associativity: CheckOutcome,
    pub samples: usize,
    pub seed: u64,
    pub passed: bool,
}

impl FnVerification {
    pub fn run(s: &ConvolutionStructure, rho: &Antipode, n_samples: usize, seed: u64, tol: f64) -> Self {
        let good = check_good_convolution(s, n_samples, seed, tol);
        let frobenius = check_frobenius(s, rho, n_samples, seed, tol);
        let antipode = check_antipode(s.spec(), rho, n_samples, seed, tol);
        let associativity = check_associativity(s, n_samples, seed, tol);
        let passed = good.passed && frobenius.passed && antipode.iter().all(|c| c.passed);
        Self {
            good,
            frobenius,
            antipode,
            associativity,
            samples: n_samples,
            seed,
            passed,
        }
    }

    /// Axiom checks in order: (a)–(e), Frobenius reciprocity, antipode checks.
    pub fn axiom_checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.good.checks.iter().chain(std::iter::once(&self.frobenius)).chain(&self.antipode)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.axiom_checks().find(|c| !c.passed)
    }
}
