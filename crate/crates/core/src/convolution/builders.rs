use std::sync::Arc;

use num_complex::Complex64;

use super::{Antipode, ConvolutionError, ConvolutionStructure, Elem, FnAlgebra, Spec, TensorEntry};
use crate::algebra::{AlgebraSpec, Block};
use crate::fusion::FusionRing;
use crate::group::GroupTable;
use crate::linalg::{self, kron, CMatrix};

type C = Complex64;
type Mat = CMatrix<f64>;

/// Samples used when a builder verifies what it assembled.
pub const VERIFY_SAMPLES: usize = 64;
/// Seed used when a builder verifies what it assembled.
pub const VERIFY_SEED: u64 = 0;
const VERIFY_TOL: f64 = 1e-9;

/// Functions on `G` with counting trace and `(f∗g)(s) = Σ_t f(t) g(t⁻¹s)`,
/// antipode `ρ(f)(s) = f(s⁻¹)`, `k = 1`.
pub fn build_group_algebra(g: &GroupTable) -> Result<FnAlgebra, ConvolutionError> {
    let n = g.order();
    let spec = Arc::new(AlgebraSpec::points(n));
    let mut entries = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            entries.push(TensorEntry {
                a,
                b,
                c: g.mul(a, b),
                value: C::new(1.0, 0.0),
            });
        }
    }
    let s = ConvolutionStructure::new(spec.clone(), 1.0, entries)?;
    let rho = Antipode::from_permutation(&spec, (0..n).map(|x| g.inverse(x)).collect())?;
    FnAlgebra::verify(s, rho, VERIFY_SAMPLES, VERIFY_SEED, VERIFY_TOL)
}

/// Parses and validates a raw table before building.
pub fn build_group_algebra_from_table(order: usize, table: Vec<Vec<usize>>) -> Result<FnAlgebra, ConvolutionError> {
    let g = GroupTable::new(order, table)?;
    build_group_algebra(&g)
}

fn swap(n: usize) -> Mat {
    CMatrix::from_fn(n * n, n * n, |r, c| {
        let (s, u) = (c / n, c % n);
        if r == u * n + s {
            C::new(1.0, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// `x ∗ y = Tr₂(U (x⊗y) U*)` on `M_n` with unnormalized trace; `Δ(z) = U*(z⊗I)U`.
pub fn build_unitary_convolution(u: &Mat, n: usize) -> Result<ConvolutionStructure, ConvolutionError> {
    if n == 0 || u.rows() != n * n || u.cols() != n * n {
        return Err(ConvolutionError::NotUnitary(format!(
            "expected a {0}x{0} matrix, got {1}x{2}",
            n * n,
            u.rows(),
            u.cols()
        )));
    }
    let dev = (&(&u.adjoint() * u) - &Mat::identity(n * n)).max_abs();
    if dev > 1e-10 {
        return Err(ConvolutionError::NotUnitary(format!("||U*U - I||_max = {dev:e}")));
    }
    let spec = Arc::new(AlgebraSpec::matrix(n));
    let id = Mat::identity(n);
    let ud = u.adjoint();
    let d = n * n;
    let mut entries = Vec::new();
    // With unit trace weight, coordinates are matrix entries; Δ(E_pq) sits in one n²×n² block.
    for c in 0..d {
        let mut e = Mat::zeros(n, n);
        e[(c / n, c % n)] = C::new(1.0, 0.0);
        let delta = &(&ud * &kron(&e, &id)) * u;
        for a in 0..d {
            let (s, t) = (a / n, a % n);
            for b in 0..d {
                let (p, q) = (b / n, b % n);
                let v = delta[(s * n + p, t * n + q)];
                if v.norm() > 1e-15 {
                    entries.push(TensorEntry {
                        a,
                        b,
                        c,
                        value: v.conj(),
                    });
                }
            }
        }
    }
    ConvolutionStructure::new(spec, 1.0, entries)
}

/// The unitary `√θ I + i√(1−θ) S` on `ℂⁿ⊗ℂⁿ`.
pub fn theta_swap_unitary(theta: f64, n: usize) -> Result<Mat, ConvolutionError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(ConvolutionError::ThetaOutOfRange(theta));
    }
    let a = C::new(theta.sqrt(), 0.0);
    let b = C::new(0.0, (1.0 - theta).sqrt());
    Ok(&Mat::identity(n * n).scale(a) + &swap(n).scale(b))
}

pub fn build_theta_swap(theta: f64, n: usize) -> Result<ConvolutionStructure, ConvolutionError> {
    build_unitary_convolution(&theta_swap_unitary(theta, n)?, n)
}

/// `Tr₂(U (x⊗y) U*)` evaluated directly on matrices.
pub fn unitary_partial_trace(u: &Mat, x: &Mat, y: &Mat) -> Result<Mat, ConvolutionError> {
    let n = x.rows();
    let inner = &(u * &kron(x, y)) * &u.adjoint();
    Ok(linalg::partial_trace_second(&inner, n, n)?)
}

/// `θx + (1−θ)y − i√(θ(1−θ))[x, y]`, valid for unit-trace `x`, `y`.
pub fn theta_swap_closed_form(theta: f64, x: &Mat, y: &Mat) -> Mat {
    let comm = &(x * y) - &(y * x);
    let lin = &x.scale_real(theta) + &y.scale_real(1.0 - theta);
    &lin - &comm.scale(C::new(0.0, (theta * (1.0 - theta)).sqrt()))
}

/// Frobenius–Perron weights `d_k²` and the commutative convolution
/// `e_i ∗ e_j = Σ_s N_{i,j}^s (d_i d_j / d_s) e_s` on functions on the objects.
///
/// The dimensions are read off the common Perron eigenvector of the commuting
/// fusion matrices and cross-checked against the per-matrix Perron values; the
/// assembled algebra must then pass every axiom check.
pub fn build_fusion_bialgebra(ring: &FusionRing) -> Result<FnAlgebra, ConvolutionError> {
    let report = ring.validate();
    if let Some(f) = report.failures.first() {
        return Err(ConvolutionError::InvalidRing(f.to_string()));
    }
    if !ring.is_commutative() {
        return Err(ConvolutionError::NonCommutative);
    }
    let r = ring.rank();
    let mats = ring.fusion_matrices();
    let sum = mats.iter().skip(1).fold(mats[0].clone(), |acc, m| &acc + m);
    let perron = linalg::perron_eigen(&sum)?;
    let p: Vec<C> = perron.vector.iter().map(|&x| C::new(x, 0.0)).collect();
    let fp = ring.fp_dimensions()?;
    let mut dims = Vec::with_capacity(r);
    for (k, m) in mats.iter().enumerate() {
        let mp = m.matvec(&p);
        let dk = p.iter().zip(&mp).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        let resid = mp.iter().zip(&p).map(|(a, b)| (a - b * dk).norm()).fold(0.0, f64::max);
        if resid > 1e-9 || (dk - fp.dims[k]).abs() > 1e-9 {
            return Err(ConvolutionError::VerificationFailed {
                axiom: format!("common Perron eigenvector (object {})", k + 1),
                worst: resid.max((dk - fp.dims[k]).abs()),
                witness: None,
            });
        }
        dims.push(dk);
    }
    let weights: Vec<f64> = dims.iter().map(|d| d * d).collect();
    let spec = Arc::new(Spec::new(weights.iter().map(|&delta| Block { n: 1, delta }).collect())?);
    // In trace-orthonormal coordinates f_i = e_i / d_i the tensor is N itself.
    let mut entries = Vec::new();
    for i in 0..r {
        for j in 0..r {
            for s in 0..r {
                let n = ring.n(i, j, s);
                if n != 0 {
                    entries.push(TensorEntry {
                        a: i,
                        b: j,
                        c: s,
                        value: C::new(n as f64, 0.0),
                    });
                }
            }
        }
    }
    let s = ConvolutionStructure::new(spec.clone(), 1.0, entries)?;
    let rho = Antipode::from_permutation(&spec, (0..r).map(|k| ring.dual(k)).collect())?;
    FnAlgebra::verify(s, rho, VERIFY_SAMPLES, VERIFY_SEED, VERIFY_TOL)
}

/// Point-mass `δ_g` in a commutative algebra with one block per point.
pub fn point_mass(spec: &Arc<Spec>, g: usize) -> Elem {
    Elem::matrix_unit(spec, g, 0, 0)
}
