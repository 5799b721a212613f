//! Fusion rings and the comultiplication-positivity obstruction.
//!
//! Coefficients are `N_{k,j}^i` (so `x_k x_j = Σ_i N_{k,j}^i x_i`), stored
//! exactly as integers and indexed from 0 internally; reports and JSON use the
//! 1-indexed labels with object 1 the unit.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupTable;
use crate::linalg::{self, kron, CMatrix, LinalgError};
use crate::rng;

/// Search verdict threshold on `λ_min(T(v))`.
pub const VIOLATION_THRESHOLD: f64 = -1e-7;
/// Residual tolerance for re-certifying a witness eigenpair.
pub const RECHECK_TOL: f64 = 1e-10;
/// Allowed gap between Perron values and spectral norms.
pub const FP_AGREEMENT_TOL: f64 = 1e-9;

type C = Complex64;
type Mat = CMatrix<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("malformed fusion ring: {0}")]
    Malformed(String),
    #[error("fusion ring fails validation: {0}")]
    Invalid(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("vector has length {got}, expected {expected}")]
    VectorLength { got: usize, expected: usize },
    #[error("T(v) is not Hermitian (deviation {0:e}); dual data is inconsistent")]
    NotHermitian(f64),
    #[error("Schur value has imaginary part {0:e}; dual data is inconsistent")]
    ComplexSchurValue(f64),
    #[error("matrix of size {0} is not a square of an integer")]
    NotTensorSquare(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRing {
    rank: usize,
    dual: Vec<usize>,
    coeffs: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct FusionRingJson {
    rank: usize,
    dual: Vec<usize>,
    #[serde(rename = "N")]
    n: Vec<Vec<Vec<i64>>>,
}

impl Serialize for FusionRing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.rank;
        FusionRingJson {
            rank: r,
            dual: self.dual.iter().map(|d| d + 1).collect(),
            n: (0..r)
                .map(|k| (0..r).map(|j| (0..r).map(|i| self.n(k, j, i)).collect()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FusionRing {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = FusionRingJson::deserialize(d)?;
        FusionRing::from_nested(j.rank, j.dual.iter().map(|&x| x.wrapping_sub(1)).collect(), &j.n)
            .map_err(serde::de::Error::custom)
    }
}

impl FusionRing {
    /// Builds from 0-indexed `dual` and a flat `[k][j][i]` coefficient array.
    /// Only shapes are checked here; the ring axioms are checked by [`validate`](Self::validate).
    pub fn new(rank: usize, dual: Vec<usize>, coeffs: Vec<i64>) -> Result<Self, FusionError> {
        if rank == 0 {
            return Err(FusionError::Malformed("rank must be at least 1".into()));
        }
        if dual.len() != rank {
            return Err(FusionError::Malformed(format!(
                "dual has {} entries, expected {rank}",
                dual.len()
            )));
        }
        if let Some(&bad) = dual.iter().find(|&&d| d >= rank) {
            return Err(FusionError::Malformed(format!(
                "dual entry {} out of range 1..={rank}",
                bad.wrapping_add(1)
            )));
        }
        if coeffs.len() != rank * rank * rank {
            return Err(FusionError::Malformed(format!(
                "{} coefficients, expected {}",
                coeffs.len(),
                rank * rank * rank
            )));
        }
        Ok(Self { rank, dual, coeffs })
    }

    pub fn from_nested(rank: usize, dual: Vec<usize>, n: &[Vec<Vec<i64>>]) -> Result<Self, FusionError> {
        if n.len() != rank || n.iter().any(|m| m.len() != rank || m.iter().any(|r| r.len() != rank)) {
            return Err(FusionError::Malformed(format!("N must be a {rank}x{rank}x{rank} array")));
        }
        Self::new(rank, dual, n.iter().flatten().flatten().copied().collect())
    }

    /// Group ring `ℤG`: `N_{g,h}^{gh} = 1`, dual = inverse.
    pub fn from_group(g: &GroupTable) -> Self {
        let r = g.order();
        // relabel so that the identity is object 0
        let e = g.identity();
        let label = |x: usize| if x == e { 0 } else if x == 0 { e } else { x };
        let mut coeffs = vec![0; r * r * r];
        for a in 0..r {
            for b in 0..r {
                coeffs[(label(a) * r + label(b)) * r + label(g.mul(a, b))] = 1;
            }
        }
        let mut dual = vec![0; r];
        for a in 0..r {
            dual[label(a)] = label(g.inverse(a));
        }
        Self::new(r, dual, coeffs).expect("group ring has consistent shape")
    }

    pub fn fibonacci() -> Self {
        Self::from_nested(2, vec![0, 1], &[vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 1]]])
            .expect("static data")
    }

    /// Objects `1, σ, ψ` with `σ² = 1 + ψ`, `ψ² = 1`, `σψ = σ`.
    pub fn ising() -> Self {
        Self::from_nested(
            3,
            vec![0, 1, 2],
            &[
                vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
                vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]],
                vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]],
            ],
        )
        .expect("static data")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// 0-indexed dual.
    pub fn dual(&self, k: usize) -> usize {
        self.dual[k]
    }

    /// `N_{k,j}^i`, 0-indexed.
    pub fn n(&self, k: usize, j: usize, i: usize) -> i64 {
        self.coeffs[(k * self.rank + j) * self.rank + i]
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Copy with one coefficient replaced (0-indexed).
    pub fn with_coefficient(&self, k: usize, j: usize, i: usize, value: i64) -> Self {
        let mut out = self.clone();
        out.coeffs[(k * self.rank + j) * self.rank + i] = value;
        out
    }

    /// Fusion matrix `M_k[i, j] = N_{k,j}^i` (left multiplication by `x_k`).
    pub fn fusion_matrix(&self, k: usize) -> Mat {
        let r = self.rank;
        CMatrix::from_fn(r, r, |i, j| C::new(self.n(k, j, i) as f64, 0.0))
    }

    pub fn fusion_matrices(&self) -> Vec<Mat> {
        (0..self.rank).map(|k| self.fusion_matrix(k)).collect()
    }

    /// Exact check that all fusion matrices commute.
    pub fn is_commutative(&self) -> bool {
        let r = self.rank;
        (0..r).all(|k| {
            (0..k).all(|l| {
                // M_k M_l = M_l M_k entrywise
                (0..r).all(|i| {
                    (0..r).all(|j| {
                        let kl: i64 = (0..r).map(|s| self.n(k, s, i) * self.n(l, j, s)).sum();
                        let lk: i64 = (0..r).map(|s| self.n(l, s, i) * self.n(k, j, s)).sum();
                        kl == lk
                    })
                })
            })
        })
    }

    /// Checks every ring axiom exactly and lists all failing identities.
    pub fn validate(&self) -> ValidationReport {
        let r = self.rank;
        let mut failures = Vec::new();
        let mut push = |identity: Identity, indices: Vec<usize>, lhs: i64, rhs: i64| {
            failures.push(IdentityFailure {
                identity,
                indices: indices.into_iter().map(|x| x + 1).collect(),
                lhs,
                rhs,
            });
        };
        if self.dual[0] != 0 {
            push(Identity::DualOfUnit, vec![0], self.dual[0] as i64 + 1, 1);
        }
        for k in 0..r {
            let dd = self.dual[self.dual[k]];
            if dd != k {
                push(Identity::DualInvolution, vec![k], dd as i64 + 1, k as i64 + 1);
            }
        }
        for k in 0..r {
            for j in 0..r {
                for i in 0..r {
                    let v = self.n(k, j, i);
                    if v < 0 {
                        push(Identity::Nonnegativity, vec![k, j, i], v, 0);
                    }
                }
            }
        }
        for j in 0..r {
            for i in 0..r {
                let want = (i == j) as i64;
                if self.n(0, j, i) != want {
                    push(Identity::LeftUnit, vec![j, i], self.n(0, j, i), want);
                }
            }
        }
        for k in 0..r {
            for i in 0..r {
                let want = (i == k) as i64;
                if self.n(k, 0, i) != want {
                    push(Identity::RightUnit, vec![k, i], self.n(k, 0, i), want);
                }
            }
        }
        for k in 0..r {
            for j in 0..r {
                let want = (j == self.dual[k]) as i64;
                if self.n(k, j, 0) != want {
                    push(Identity::Duality, vec![k, j], self.n(k, j, 0), want);
                }
            }
        }
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    for t in 0..r {
                        let lhs: i64 = (0..r).map(|s| self.n(a, b, s) * self.n(s, c, t)).sum();
                        let rhs: i64 = (0..r).map(|s| self.n(b, c, s) * self.n(a, s, t)).sum();
                        if lhs != rhs {
                            push(Identity::Associativity, vec![a, b, c, t], lhs, rhs);
                        }
                    }
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let lhs = self.n(i, self.dual[j], k);
                    let rhs = self.n(k, j, i);
                    if lhs != rhs {
                        push(Identity::Reciprocity, vec![i, j, k], lhs, rhs);
                    }
                }
            }
        }
        ValidationReport {
            passed: failures.is_empty(),
            rank: r,
            failures,
        }
    }

    fn require_valid(&self) -> Result<(), FusionError> {
        let report = self.validate();
        match report.failures.first() {
            None => Ok(()),
            Some(f) => Err(FusionError::Invalid(format!(
                "{f} ({} failing identities)",
                report.failures.len()
            ))),
        }
    }

    /// Perron values `d(x_k)` together with the spectral norms `‖M_k‖`.
    pub fn fp_dimensions(&self) -> Result<FpDimensions, FusionError> {
        self.require_valid()?;
        let mut dims = Vec::with_capacity(self.rank);
        let mut norms = Vec::with_capacity(self.rank);
        for m in self.fusion_matrices() {
            dims.push(linalg::perron_eigen(&m)?.value);
            norms.push(linalg::spectral_norm(&m));
        }
        let max_disagreement = dims
            .iter()
            .zip(&norms)
            .fold(0.0_f64, |m, (d, s)| m.max((d - s).abs()));
        Ok(FpDimensions {
            agree: max_disagreement <= FP_AGREEMENT_TOL,
            dims,
            spectral_norms: norms,
            max_disagreement,
        })
    }

    /// Precomputed matrices for repeated criterion evaluation.
    pub fn criterion_context(&self) -> Result<CriterionContext, FusionError> {
        self.require_valid()?;
        let mats = self.fusion_matrices();
        let norms: Vec<f64> = mats.iter().map(linalg::spectral_norm).collect();
        let krons = mats.iter().map(|m| kron(m, m)).collect();
        Ok(CriterionContext {
            rank: self.rank,
            mats,
            krons,
            norms,
        })
    }

    /// `T(v) = Σ_k (v* M_k v / ‖M_k‖) M_k ⊗ M_k`.
    pub fn criterion_t(&self, v: &[C]) -> Result<Mat, FusionError> {
        self.criterion_context()?.t_checked(v)
    }

    /// `Σ_k (1/‖M_k‖) Π_s v_s* M_k v_s` (real part; the imaginary part is checked).
    pub fn schur_value(&self, v1: &[C], v2: &[C], v3: &[C]) -> Result<f64, FusionError> {
        self.criterion_context()?.schur_checked(v1, v2, v3)
    }

    /// Left-regular image of `Δ₁(g g*)` for `g = Σ a_i x_i`, built from the ring
    /// product directly: `Σ_k (1/d(x_k)) (Σ_{i,j} a_i ā_j N_{i,j*}^k) M_k ⊗ M_k`.
    pub fn delta1_of_square(&self, a: &[C]) -> Result<Mat, FusionError> {
        let dims = self.fp_dimensions()?.dims;
        let r = self.rank;
        if a.len() != r {
            return Err(FusionError::VectorLength {
                got: a.len(),
                expected: r,
            });
        }
        let mut out = Mat::zeros(r * r, r * r);
        for k in 0..r {
            let mut coef = C::new(0.0, 0.0);
            for i in 0..r {
                for j in 0..r {
                    let n = self.n(i, self.dual[j], k);
                    if n != 0 {
                        coef += a[i] * a[j].conj() * n as f64;
                    }
                }
            }
            if coef.norm() == 0.0 {
                continue;
            }
            let m = self.fusion_matrix(k);
            out = &out + &kron(&m, &m).scale(coef / dims[k]);
        }
        Ok(out)
    }

    /// Multistart minimization of `λ_min(T(v))` over unit `v`.
    pub fn search_comult_violation(&self, budget: usize, seed: u64) -> Result<CriterionReport, FusionError> {
        let ctx = self.criterion_context()?;
        Ok(ctx.search_comult(budget, seed))
    }

    /// Multistart minimization of the Schur value over unit vector triples.
    pub fn search_schur_violation(&self, budget: usize, seed: u64) -> Result<CriterionReport, FusionError> {
        let ctx = self.criterion_context()?;
        Ok(ctx.search_schur(budget, seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    DualOfUnit,
    DualInvolution,
    Nonnegativity,
    LeftUnit,
    RightUnit,
    Duality,
    Associativity,
    Reciprocity,
}

impl Identity {
    pub fn statement(self) -> &'static str {
        match self {
            Identity::DualOfUnit => "dual(1) = 1",
            Identity::DualInvolution => "dual(dual(k)) = k",
            Identity::Nonnegativity => "N_{k,j}^i >= 0",
            Identity::LeftUnit => "N_{1,j}^i = [i = j]",
            Identity::RightUnit => "N_{k,1}^i = [i = k]",
            Identity::Duality => "N_{k,j}^1 = [j = dual(k)]",
            Identity::Associativity => "sum_s N_{a,b}^s N_{s,c}^t = sum_s N_{b,c}^s N_{a,s}^t",
            Identity::Reciprocity => "N_{i,dual(j)}^k = N_{k,j}^i",
        }
    }
}

/// One failing instance of a ring identity; indices are 1-indexed in the
/// order the identity names them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IdentityFailure {
    pub identity: Identity,
    pub indices: Vec<usize>,
    pub lhs: i64,
    pub rhs: i64,
}

impl fmt::Display for IdentityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "{:?} fails at ({}): {} ; lhs {} != rhs {}",
            self.identity,
            idx.join(","),
            self.identity.statement(),
            self.lhs,
            self.rhs
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub rank: usize,
    pub failures: Vec<IdentityFailure>,
}

impl ValidationReport {
    pub fn failing_identities(&self) -> BTreeSet<Identity> {
        self.failures.iter().map(|f| f.identity).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpDimensions {
    pub dims: Vec<f64>,
    pub spectral_norms: Vec<f64>,
    pub max_disagreement: f64,
    /// Whether Perron values and spectral norms agree within [`FP_AGREEMENT_TOL`].
    pub agree: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub verdict: Verdict,
    /// Best (smallest) criterion value found.
    pub value: f64,
    /// Witness vectors as `[re, im]` pairs: `[v]` for the comultiplication
    /// criterion, `[v1, v2, v3]` for the Schur criterion.
    pub witness: Vec<Vec<[f64; 2]>>,
    /// Eigenvector of `T(v)` attaining `value` (comultiplication criterion only).
    pub eigenvector: Option<Vec<[f64; 2]>>,
    pub threshold: f64,
    pub recheck_tolerance: f64,
    /// Value recomputed from the witness alone.
    pub rechecked_value: f64,
    pub starts: usize,
    pub evaluations: usize,
}

/// Fusion matrices, their Kronecker squares and spectral norms.
#[derive(Debug, Clone)]
pub struct CriterionContext {
    rank: usize,
    mats: Vec<Mat>,
    krons: Vec<Mat>,
    norms: Vec<f64>,
}

fn check_len(v: &[C], n: usize) -> Result<(), FusionError> {
    if v.len() != n {
        return Err(FusionError::VectorLength {
            got: v.len(),
            expected: n,
        });
    }
    if v.iter().all(|z| z.norm() == 0.0) {
        return Err(FusionError::ZeroVector);
    }
    Ok(())
}

fn vnorm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(v: &[C]) -> Vec<C> {
    let n = vnorm(v);
    v.iter().map(|z| z / n).collect()
}

fn pairs(v: &[C]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

struct Local {
    value: f64,
    v: Vec<C>,
    evals: usize,
    gap: f64,
}

/// Number of best degenerate local minima re-examined with Nelder–Mead.
const POLISH_COUNT: usize = 8;

impl CriterionContext {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    fn coefficients(&self, v: &[C]) -> Vec<C> {
        self.mats
            .iter()
            .zip(&self.norms)
            .map(|(m, &nrm)| m.quadratic_form(v) / nrm)
            .collect()
    }

    fn t_raw(&self, v: &[C]) -> Mat {
        let n2 = self.rank * self.rank;
        let mut data = vec![C::new(0.0, 0.0); n2 * n2];
        for (c, kr) in self.coefficients(v).into_iter().zip(&self.krons) {
            if c.norm() == 0.0 {
                continue;
            }
            for (d, &x) in data.iter_mut().zip(kr.as_slice()) {
                if x.re != 0.0 {
                    *d += c * x.re;
                }
            }
        }
        CMatrix::new(n2, n2, data).expect("n^2 x n^2 data")
    }

    /// `T(v)` with the Hermiticity assertion.
    pub fn t_checked(&self, v: &[C]) -> Result<Mat, FusionError> {
        check_len(v, self.rank)?;
        let t = self.t_raw(v);
        let dev = t.hermitian_deviation();
        if dev > 1e-10 * (1.0 + t.max_abs()) {
            return Err(FusionError::NotHermitian(dev));
        }
        Ok(t.hermitian_part())
    }

    pub fn schur_checked(&self, v1: &[C], v2: &[C], v3: &[C]) -> Result<f64, FusionError> {
        for v in [v1, v2, v3] {
            check_len(v, self.rank)?;
        }
        let z = self.schur_complex(v1, v2, v3);
        let scale = 1.0 + vnorm(v1).powi(2) * vnorm(v2).powi(2) * vnorm(v3).powi(2) * self.rank as f64;
        if z.im.abs() > 1e-9 * scale {
            return Err(FusionError::ComplexSchurValue(z.im));
        }
        Ok(z.re)
    }

    fn schur_complex(&self, v1: &[C], v2: &[C], v3: &[C]) -> C {
        self.mats
            .iter()
            .zip(&self.norms)
            .map(|(m, &nrm)| m.quadratic_form(v1) * m.quadratic_form(v2) * m.quadratic_form(v3) / nrm)
            .sum()
    }

    /// `(λ_min(T(v)), eigenvector, spectral gap)` for unit `v`.
    fn lambda_min(&self, v: &[C]) -> (f64, Vec<C>, f64) {
        linalg::min_eigenpair(&self.t_raw(v)).expect("T(v) is Hermitian by construction")
    }

    /// Riemannian gradient of `v ↦ λ_min(T(v))` at unit `v` (real-inner-product sense).
    fn gradient(&self, v: &[C], u: &[C]) -> Vec<C> {
        let n = self.rank;
        let mut g = vec![C::new(0.0, 0.0); n];
        for ((m, kr), &nrm) in self.mats.iter().zip(&self.krons).zip(&self.norms) {
            let gk = kr.quadratic_form(u);
            if gk.norm() == 0.0 {
                continue;
            }
            let mv = m.matvec(v);
            for (gi, x) in g.iter_mut().zip(mv) {
                *gi += gk * x * (2.0 / nrm);
            }
        }
        let radial: f64 = v.iter().zip(&g).map(|(a, b)| (a.conj() * b).re).sum();
        g.iter().zip(v).map(|(gi, vi)| gi - vi * radial).collect()
    }

    /// Projected gradient descent with backtracking from one start.
    fn descend(&self, start: Vec<C>) -> Local {
        let mut v = normalized(&start);
        let (mut val, mut u, mut gap) = self.lambda_min(&v);
        let mut evals = 1;
        let mut step = 0.5;
        for _ in 0..100 {
            let g = self.gradient(&v, &u);
            let gn = vnorm(&g);
            if gn < 1e-10 {
                break;
            }
            let mut improved = false;
            while step > 1e-8 {
                let cand: Vec<C> = v.iter().zip(&g).map(|(a, b)| a - b * step).collect();
                let cand = normalized(&cand);
                let (cv, cu, cg) = self.lambda_min(&cand);
                evals += 1;
                if cv < val - 1e-4 * step * gn * gn {
                    let gain = val - cv;
                    v = cand;
                    val = cv;
                    u = cu;
                    gap = cg;
                    improved = gain > 1e-11 * (1.0 + val.abs());
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Local { value: val, v, evals, gap }
    }

    /// Derivative-free polish for a point where `λ_min` is (nearly) degenerate
    /// and the gradient of a single eigenvalue branch is not informative.
    fn polish(&self, local: Local) -> Local {
        let f = |x: &[f64]| {
            let w = from_real(x);
            if vnorm(&w) == 0.0 {
                return f64::INFINITY;
            }
            self.lambda_min(&normalized(&w)).0
        };
        let (x, fx, n_evals) = nelder_mead(f, &to_real(&local.v), 0.05, 100 * self.rank);
        let mut out = local;
        out.evals += n_evals;
        if fx < out.value {
            out.v = normalized(&from_real(&x));
            let (val, _, gap) = self.lambda_min(&out.v);
            out.value = val;
            out.gap = gap;
        }
        out
    }

    /// Deterministic start list: basis vectors, Hermitian-part eigenvectors of
    /// the fusion matrices, then random unit vectors.
    fn starts(&self, budget: usize, seed: u64) -> Vec<Vec<C>> {
        let n = self.rank;
        let mut out = Vec::new();
        for i in 0..n {
            let mut e = vec![C::new(0.0, 0.0); n];
            e[i] = C::new(1.0, 0.0);
            out.push(e);
        }
        for m in &self.mats {
            let h = (m + &m.adjoint()).scale_real(0.5);
            if let Ok(eig) = linalg::eig_hermitian(&h) {
                for j in 0..n {
                    out.push(eig.vector(j));
                }
            }
        }
        out.truncate(budget);
        let fixed = out.len();
        for s in fixed..budget {
            out.push(rng::unit_vector(&mut rng::stream(seed, s as u64), n));
        }
        out
    }

    pub fn search_comult(&self, budget: usize, seed: u64) -> CriterionReport {
        let starts = self.starts(budget.max(1), seed);
        let mut results: Vec<Local> = starts.into_par_iter().map(|s| self.descend(s)).collect();
        // stable sort keeps the start order among ties, so the result is deterministic
        results.sort_by(|a, b| a.value.total_cmp(&b.value));
        let degenerate: Vec<usize> = (0..results.len())
            .filter(|&i| results[i].gap < 1e-6)
            .take(POLISH_COUNT)
            .collect();
        let polished: Vec<Local> = degenerate
            .par_iter()
            .map(|&i| self.polish(Local { v: results[i].v.clone(), ..results[i] }))
            .collect();
        for (&i, p) in degenerate.iter().zip(polished) {
            results[i] = p;
        }
        let evaluations = results.iter().map(|r| r.evals).sum();
        let best = results
            .into_iter()
            .reduce(|a, b| if b.value < a.value { b } else { a })
            .expect("at least one start");
        // independent re-check from the witness alone
        let t = self.t_checked(&best.v).expect("unit witness");
        let eig = linalg::eig_hermitian(&t).expect("Hermitian");
        let u = eig.vector(0);
        let lam = eig.values[0];
        let tu = t.matvec(&u);
        let residual = tu
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b * lam).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let rayleigh = t.quadratic_form(&u).re;
        let scale = 1.0 + t.max_abs();
        let certified = residual <= RECHECK_TOL * scale && rayleigh < VIOLATION_THRESHOLD;
        let verdict = if best.value >= VIOLATION_THRESHOLD {
            Verdict::Pass
        } else if certified {
            Verdict::Violation
        } else {
            Verdict::Inconclusive
        };
        CriterionReport {
            criterion: "comultiplication_positivity".into(),
            verdict,
            value: best.value,
            witness: vec![pairs(&best.v)],
            eigenvector: Some(pairs(&u)),
            threshold: VIOLATION_THRESHOLD,
            recheck_tolerance: RECHECK_TOL,
            rechecked_value: lam,
            starts: budget.max(1),
            evaluations,
        }
    }

    /// Minimizes `⟨A v, v⟩` for the Hermitian `A = Σ_k c_k M_k / ‖M_k‖`.
    fn schur_block_min(&self, coeffs: &[C]) -> (f64, Vec<C>) {
        let n = self.rank;
        let mut a = Mat::zeros(n, n);
        for ((m, &nrm), &c) in self.mats.iter().zip(&self.norms).zip(coeffs) {
            if c.norm() != 0.0 {
                a = &a + &m.scale(c / nrm);
            }
        }
        let eig = linalg::eig_hermitian(&a.hermitian_part()).expect("Hermitian");
        (eig.values[0], eig.vector(0))
    }

    fn schur_descend(&self, mut vs: [Vec<C>; 3]) -> (f64, [Vec<C>; 3], usize) {
        let mut val = self.schur_complex(&vs[0], &vs[1], &vs[2]).re;
        let mut evals = 1;
        for _ in 0..100 {
            let before = val;
            for s in 0..3 {
                let (o1, o2) = ((s + 1) % 3, (s + 2) % 3);
                let coeffs: Vec<C> = self
                    .mats
                    .iter()
                    .map(|m| m.quadratic_form(&vs[o1]) * m.quadratic_form(&vs[o2]))
                    .collect();
                let (lv, v) = self.schur_block_min(&coeffs);
                evals += 1;
                if lv < val {
                    val = lv;
                    vs[s] = v;
                }
            }
            if before - val <= 1e-14 * (1.0 + val.abs()) {
                break;
            }
        }
        (val, vs, evals)
    }

    pub fn search_schur(&self, budget: usize, seed: u64) -> CriterionReport {
        let n = self.rank;
        let budget = budget.max(1);
        let results: Vec<(f64, [Vec<C>; 3], usize)> = (0..budget)
            .into_par_iter()
            .map(|s| {
                let mut r = rng::stream(rng::child_seed(seed, 0x5c4), s as u64);
                let vs = [
                    rng::unit_vector(&mut r, n),
                    rng::unit_vector(&mut r, n),
                    rng::unit_vector(&mut r, n),
                ];
                self.schur_descend(vs)
            })
            .collect();
        let evaluations = results.iter().map(|r| r.2).sum();
        let (value, vs, _) = results
            .into_iter()
            .reduce(|a, b| if b.0 < a.0 { b } else { a })
            .expect("at least one start");
        let rechecked = self.schur_complex(&vs[0], &vs[1], &vs[2]).re;
        let verdict = if value >= VIOLATION_THRESHOLD {
            Verdict::Pass
        } else if rechecked < VIOLATION_THRESHOLD {
            Verdict::Violation
        } else {
            Verdict::Inconclusive
        };
        CriterionReport {
            criterion: "schur_product".into(),
            verdict,
            value,
            witness: vs.iter().map(|v| pairs(v)).collect(),
            eigenvector: None,
            threshold: VIOLATION_THRESHOLD,
            recheck_tolerance: RECHECK_TOL,
            rechecked_value: rechecked,
            starts: budget,
            evaluations,
        }
    }
}

fn to_real(v: &[C]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn from_real(x: &[f64]) -> Vec<C> {
    x.chunks(2).map(|p| C::new(p[0], p[1])).collect()
}

/// Basic Nelder–Mead; returns `(argmin, min, evaluations)`.
pub(crate) fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], scale: f64, max_evals: usize) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= 1e-15 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p.0[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            evals += 1;
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = p.0.iter().zip(&best).map(|(x, b)| b + 0.5 * (x - b)).collect();
                    p.1 = f(&p.0);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMinReport {
    /// Best-found `min ⟨M(v⊗w), v⊗w⟩` over unit `v, w`.
    pub product_min: f64,
    pub lambda_min: f64,
    pub v: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
    pub starts: usize,
}

/// `A[i, j] = Σ_{k,l} M[(i,k),(j,l)] w̄_k w_l` (fix the second factor).
fn partial_form_second(m: &Mat, w: &[C], n: usize) -> Mat {
    CMatrix::from_fn(n, n, |i, j| {
        let mut s = C::new(0.0, 0.0);
        for k in 0..n {
            for l in 0..n {
                s += m[(i * n + k, j * n + l)] * w[k].conj() * w[l];
            }
        }
        s
    })
}

fn partial_form_first(m: &Mat, v: &[C], n: usize) -> Mat {
    CMatrix::from_fn(n, n, |k, l| {
        let mut s = C::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += m[(i * n + k, j * n + l)] * v[i].conj() * v[j];
            }
        }
        s
    })
}

/// Minimum of `⟨M(v⊗w), v⊗w⟩` over unit product vectors, by alternating
/// Hermitian eigenproblems from `budget` starts, alongside `λ_min(M)`.
pub fn product_vector_min(m: &Mat, budget: usize, seed: u64) -> Result<ProductMinReport, FusionError> {
    let dim = m.rows();
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim || !m.is_square() {
        return Err(FusionError::NotTensorSquare(dim));
    }
    let m = {
        let dev = m.hermitian_deviation();
        if dev > 1e-10 * (1.0 + m.max_abs()) {
            return Err(FusionError::NotHermitian(dev));
        }
        m.hermitian_part()
    };
    let lambda_min = linalg::min_eigenvalue(&m)?;
    let budget = budget.max(1);
    let runs: Vec<(f64, Vec<C>, Vec<C>)> = (0..budget)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(seed, s as u64);
            let mut v: Vec<C> = rng::unit_vector(&mut r, n);
            let mut w: Vec<C> = rng::unit_vector(&mut r, n);
            let mut val = f64::INFINITY;
            for _ in 0..200 {
                let ev = linalg::eig_hermitian(&partial_form_second(&m, &w, n).hermitian_part()).expect("Hermitian");
                v = ev.vector(0);
                let ew = linalg::eig_hermitian(&partial_form_first(&m, &v, n).hermitian_part()).expect("Hermitian");
                w = ew.vector(0);
                let new = ew.values[0];
                if val - new <= 1e-15 * (1.0 + new.abs()) {
                    val = val.min(new);
                    break;
                }
                val = new;
            }
            (val, v, w)
        })
        .collect();
    let (product_min, v, w) = runs
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start");
    Ok(ProductMinReport {
        product_min,
        lambda_min,
        v: pairs(&v),
        w: pairs(&w),
        starts: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn z2() -> FusionRing {
        FusionRing::from_group(&GroupTable::cyclic(2))
    }

    #[test]
    fn validate_examples() {
        assert!(z2().validate().passed);
        assert!(FusionRing::fibonacci().validate().passed);
        assert!(FusionRing::ising().validate().passed);
        // x^2 = 1 + 2x is itself a fusion ring
        assert!(FusionRing::fibonacci().with_coefficient(1, 1, 1, 2).validate().passed);
        let bad = FusionRing::fibonacci().with_coefficient(1, 1, 0, 2);
        let rep = bad.validate();
        assert!(!rep.passed);
        assert!(rep.failing_identities().contains(&Identity::Duality));
    }

    #[test]
    fn group_ring_relabels_identity_to_first_object() {
        // a table whose identity is element 2
        let t = vec![vec![2, 0, 1], vec![0, 1, 2], vec![1, 2, 0]];
        let g = GroupTable::new(3, t).unwrap();
        assert_eq!(g.identity(), 1);
        assert!(FusionRing::from_group(&g).validate().passed);
    }

    #[test]
    fn json_round_trip_is_one_indexed() {
        let f = FusionRing::fibonacci();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"dual\":[1,2]"));
        let back: FusionRing = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<FusionRing>(r#"{"rank":2,"dual":[1,3],"N":[]}"#).is_err());
        assert!(serde_json::from_str::<FusionRing>(r#"{"rank":2,"dual":[0,1],"N":[]}"#).is_err());
    }

    #[test]
    fn fp_dimension_examples() {
        let fib = FusionRing::fibonacci().fp_dimensions().unwrap();
        assert!((fib.dims[1] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(fib.agree);
        let ising = FusionRing::ising().fp_dimensions().unwrap();
        for (d, e) in ising.dims.iter().zip([1.0, 2f64.sqrt(), 1.0]) {
            assert!((d - e).abs() < 1e-12);
        }
        let z4 = FusionRing::from_group(&GroupTable::cyclic(4)).fp_dimensions().unwrap();
        assert!(z4.dims.iter().all(|d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn criterion_t_examples() {
        let r = z2();
        let t = r.criterion_t(&[c(1.0), c(0.0)]).unwrap();
        assert!((&t - &Mat::identity(4)).max_abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let t = r.criterion_t(&[c(h), c(h)]).unwrap();
        let m2 = r.fusion_matrix(1);
        let expect = &Mat::identity(4) + &kron(&m2, &m2);
        assert!((&t - &expect).max_abs() < 1e-15);
        assert!(linalg::min_eigenvalue(&t).unwrap().abs() < 1e-12);
        assert!(matches!(r.criterion_t(&[c(0.0), c(0.0)]), Err(FusionError::ZeroVector)));
    }

    #[test]
    fn schur_value_examples() {
        let r = z2();
        let v = [c(1.0), c(-1.0)];
        assert!(r.schur_value(&v, &v, &v).unwrap().abs() < 1e-12);
    }

    #[test]
    fn swap_matrix_separates_criteria() {
        let mut m = Mat::identity(4);
        m[(1, 1)] = c(0.0);
        m[(2, 2)] = c(0.0);
        m[(1, 2)] = c(1.0);
        m[(2, 1)] = c(1.0);
        let rep = product_vector_min(&m, 16, 1).unwrap();
        assert!(rep.product_min >= -1e-9);
        assert!((rep.lambda_min + 1.0).abs() < 1e-9);
        let id = product_vector_min(&Mat::identity(9), 4, 1).unwrap();
        assert!((id.product_min - 1.0).abs() < 1e-12 && (id.lambda_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, fx, _) = nelder_mead(|x| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2), &[0.0, 0.0], 0.3, 2000);
        assert!(fx < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] + 0.5).abs() < 1e-5);
    }
}
