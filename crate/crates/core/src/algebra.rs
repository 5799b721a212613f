//! Finite-dimensional tracial *-algebras.
//!
//! An [`AlgebraSpec`] is a direct sum of matrix blocks `M_{n_i}` with trace
//! weights `δ_i`, so that `τ(x) = Σ_i δ_i Tr(x_i)`. Elements are stored as one
//! dense matrix per block.
//!
//! Tensor constructions and convolution tensors work in the trace-orthonormal
//! basis `{δ_i^{-1/2} E^{(i)}_{st}}`: the coordinate of `x` at `(i, s, t)` is
//! `δ_i^{1/2} x_i[s, t]`, and `⟨x, y⟩ = τ(y* x)` becomes the plain complex
//! dot product of coordinate vectors.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, hermitian_tol, CMatrix, HermitianEigen, LinalgError};
use crate::rng;
use crate::scalar::{xlogx, Real};

/// Default relative cut for range projections (relative to `‖x‖_∞`).
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("invalid algebra: {0}")]
    InvalidSpec(String),
    #[error("element belongs to a different algebra")]
    SpecMismatch,
    #[error("block {block} has shape {rows}x{cols}, expected {expected}x{expected}")]
    BlockShape {
        block: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("exponent p = {0} must be positive")]
    InvalidExponent(f64),
    #[error("element has zero trace; cannot normalize")]
    ZeroTrace,
    #[error("normalization target {0} must be positive")]
    InvalidTarget(f64),
    #[error("coordinate vector has length {got}, expected {expected}")]
    CoordinateLength { got: usize, expected: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T, E = AlgebraError> = std::result::Result<T, E>;

/// One summand `M_n` with trace weight `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Block<T> {
    pub n: usize,
    pub delta: T,
}

/// A finite-dimensional tracial *-algebra `⊕_i M_{n_i}` with trace weights `δ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
#[serde(try_from = "SpecRepr<T>")]
pub struct AlgebraSpec<T> {
    blocks: Vec<Block<T>>,
    #[serde(skip)]
    offsets: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
struct SpecRepr<T> {
    blocks: Vec<Block<T>>,
}

impl<T: Real> TryFrom<SpecRepr<T>> for AlgebraSpec<T> {
    type Error = AlgebraError;

    fn try_from(r: SpecRepr<T>) -> Result<Self> {
        Self::new(r.blocks)
    }
}

impl<T: Real> AlgebraSpec<T> {
    pub fn new(blocks: Vec<Block<T>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(AlgebraError::InvalidSpec("no blocks".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.n == 0 {
                return Err(AlgebraError::InvalidSpec(format!("block {i} has dimension 0")));
            }
            if !(b.delta > T::zero()) || !b.delta.is_finite() {
                return Err(AlgebraError::InvalidSpec(format!(
                    "block {i} has non-positive trace weight {}",
                    b.delta
                )));
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            acc += b.n * b.n;
        }
        offsets.push(acc);
        Ok(Self { blocks, offsets })
    }

    /// `M_n` with the unnormalized trace.
    pub fn matrix(n: usize) -> Self {
        Self::new(vec![Block { n, delta: T::one() }]).expect("valid single block")
    }

    /// Functions on `n` points with counting trace.
    pub fn points(n: usize) -> Self {
        Self::weighted_points(&vec![T::one(); n]).expect("unit weights are valid")
    }

    /// Functions on points with the given trace weights.
    pub fn weighted_points(weights: &[T]) -> Result<Self> {
        Self::new(weights.iter().map(|&delta| Block { n: 1, delta }).collect())
    }

    pub fn blocks(&self) -> &[Block<T>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Coordinate dimension `Σ n_i²`.
    pub fn coord_dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// `τ(I) = Σ δ_i n_i`.
    pub fn fp_dim(&self) -> T {
        self.blocks
            .iter()
            .fold(T::zero(), |s, b| s + b.delta * T::lit(b.n as f64))
    }

    /// Trace of a minimal projection, `min δ_i`.
    pub fn min_projection_trace(&self) -> T {
        self.blocks.iter().fold(T::infinity(), |m, b| m.min(b.delta))
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|b| b.n == 1)
    }

    pub fn block_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    /// Coordinate index of `(block, row, col)`.
    pub fn coord_index(&self, block: usize, s: usize, t: usize) -> usize {
        self.offsets[block] + s * self.blocks[block].n + t
    }

    /// Inverse of [`coord_index`](Self::coord_index).
    pub fn coord_location(&self, a: usize) -> (usize, usize, usize) {
        let block = match self.offsets.binary_search(&a) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let n = self.blocks[block].n;
        let r = a - self.offsets[block];
        (block, r / n, r % n)
    }

    /// Blocks `(i, j)` in row-major pair order, dimension `n_i n_j`, weight `δ_i δ_j`.
    pub fn tensor_square(&self) -> Self {
        let mut blocks = Vec::with_capacity(self.blocks.len() * self.blocks.len());
        for a in &self.blocks {
            for b in &self.blocks {
                blocks.push(Block {
                    n: a.n * b.n,
                    delta: a.delta * b.delta,
                });
            }
        }
        Self::new(blocks).expect("products of valid blocks are valid")
    }

    /// Trace weights rescaled by `1/λ`, i.e. `τ_λ = λ^{-1} τ`.
    pub fn rescaled(&self, lambda: T) -> Result<Self> {
        Self::new(
            self.blocks
                .iter()
                .map(|b| Block {
                    n: b.n,
                    delta: b.delta / lambda,
                })
                .collect(),
        )
    }
}

/// A block-diagonal element of an [`AlgebraSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Element<T> {
    spec: Arc<AlgebraSpec<T>>,
    blocks: Vec<CMatrix<T>>,
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> Element<T> {
    pub fn new(spec: Arc<AlgebraSpec<T>>, blocks: Vec<CMatrix<T>>) -> Result<Self> {
        if blocks.len() != spec.num_blocks() {
            return Err(AlgebraError::InvalidSpec(format!(
                "{} blocks supplied for an algebra with {}",
                blocks.len(),
                spec.num_blocks()
            )));
        }
        for (i, (m, b)) in blocks.iter().zip(spec.blocks()).enumerate() {
            if m.rows() != b.n || m.cols() != b.n {
                return Err(AlgebraError::BlockShape {
                    block: i,
                    rows: m.rows(),
                    cols: m.cols(),
                    expected: b.n,
                });
            }
        }
        Ok(Self { spec, blocks })
    }

    pub fn zero(spec: &Arc<AlgebraSpec<T>>) -> Self {
        Self {
            spec: spec.clone(),
            blocks: spec.blocks().iter().map(|b| CMatrix::zeros(b.n, b.n)).collect(),
        }
    }

    pub fn identity(spec: &Arc<AlgebraSpec<T>>) -> Self {
        Self {
            spec: spec.clone(),
            blocks: spec.blocks().iter().map(|b| CMatrix::identity(b.n)).collect(),
        }
    }

    /// Matrix unit `E^{(block)}_{st}`.
    pub fn matrix_unit(spec: &Arc<AlgebraSpec<T>>, block: usize, s: usize, t: usize) -> Self {
        let mut x = Self::zero(spec);
        x.blocks[block][(s, t)] = Complex::new(T::one(), T::zero());
        x
    }

    /// Real diagonal element of a commutative algebra (one value per point).
    pub fn from_point_values(spec: &Arc<AlgebraSpec<T>>, values: &[T]) -> Result<Self> {
        if !spec.is_commutative() || values.len() != spec.num_blocks() {
            return Err(AlgebraError::CoordinateLength {
                got: values.len(),
                expected: spec.num_blocks(),
            });
        }
        Self::new(
            spec.clone(),
            values.iter().map(|&v| CMatrix::from_diag(&[v])).collect(),
        )
    }

    /// Element with the given trace-orthonormal coordinates.
    pub fn from_coords(spec: &Arc<AlgebraSpec<T>>, coords: &[Complex<T>]) -> Result<Self> {
        if coords.len() != spec.coord_dim() {
            return Err(AlgebraError::CoordinateLength {
                got: coords.len(),
                expected: spec.coord_dim(),
            });
        }
        let blocks = spec
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let off = spec.block_offset(i);
                let inv = T::one() / b.delta.sqrt();
                CMatrix::new(
                    b.n,
                    b.n,
                    coords[off..off + b.n * b.n].iter().map(|&z| z * inv).collect(),
                )
                .expect("block slice has n^2 entries")
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            blocks,
        })
    }

    /// Trace-orthonormal coordinates.
    pub fn coords(&self) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.spec.coord_dim());
        for (m, b) in self.blocks.iter().zip(self.spec.blocks()) {
            let s = b.delta.sqrt();
            out.extend(m.as_slice().iter().map(|&z| z * s));
        }
        out
    }

    pub fn spec(&self) -> &Arc<AlgebraSpec<T>> {
        &self.spec
    }

    pub fn blocks(&self) -> &[CMatrix<T>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix<T> {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMatrix<T>> {
        self.blocks
    }

    fn same_spec(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec {
            Ok(())
        } else {
            Err(AlgebraError::SpecMismatch)
        }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix<T>, &CMatrix<T>) -> CMatrix<T>) -> Result<Self> {
        self.same_spec(other)?;
        Ok(Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a - b)
    }

    /// Blockwise product `xy`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a * b)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map_blocks(|m| m.scale(s))
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map_blocks(|m| m.scale_real(s))
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix<T>) -> CMatrix<T>) -> Self {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|m| m.adjoint())
    }

    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(|m| m.hermitian_part())
    }

    /// `τ(x) = Σ δ_i Tr(x_i)`.
    pub fn trace(&self) -> Complex<T> {
        self.blocks
            .iter()
            .zip(self.spec.blocks())
            .fold(czero(), |acc, (m, b)| acc + m.trace() * b.delta)
    }

    /// `⟨x, y⟩ = τ(y* x)`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_spec(other)?;
        let mut acc = czero();
        for ((a, b), blk) in self.blocks.iter().zip(&other.blocks).zip(self.spec.blocks()) {
            let s = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .fold(czero(), |s, (&x, &y)| s + y.conj() * x);
            acc += s * blk.delta;
        }
        Ok(acc)
    }

    pub fn max_abs(&self) -> T {
        self.blocks.iter().fold(T::zero(), |m, b| m.max(b.max_abs()))
    }

    pub fn hermitian_deviation(&self) -> T {
        self.blocks.iter().fold(T::zero(), |m, b| m.max(b.hermitian_deviation()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= hermitian_tol::<T>() * (T::one() + self.max_abs())
    }

    /// Per-block Hermitian eigendecompositions.
    pub fn eigen(&self) -> Result<Vec<HermitianEigen<T>>> {
        self.blocks
            .iter()
            .map(|b| linalg::eig_hermitian(b).map_err(AlgebraError::from))
            .collect()
    }

    /// Smallest eigenvalue across blocks (Hermitian elements).
    pub fn min_eigenvalue(&self) -> Result<T> {
        let mut m = T::infinity();
        for b in &self.blocks {
            m = m.min(linalg::min_eigenvalue(b)?);
        }
        Ok(m)
    }

    /// PSD check at the shared tolerance; returns the minimal eigenvalue on failure.
    pub fn check_psd(&self) -> Result<()> {
        for b in &self.blocks {
            linalg::psd_eigen(b)?;
        }
        Ok(())
    }

    pub fn is_psd(&self) -> bool {
        self.check_psd().is_ok()
    }

    /// Singular values of each block.
    pub fn singular_values(&self) -> Vec<Vec<T>> {
        self.blocks
            .iter()
            .map(|b| {
                if b.hermitian_deviation() <= T::eps() * T::lit(16.0) * (T::one() + b.max_abs()) {
                    // |eigenvalues| are more accurate than sqrt of Gram eigenvalues near zero.
                    match linalg::eig_hermitian(b) {
                        Ok(e) => e.values.into_iter().map(|l| l.abs()).collect(),
                        Err(_) => linalg::singular_values(b),
                    }
                } else {
                    linalg::singular_values(b)
                }
            })
            .collect()
    }

    /// `‖x‖_p = τ(|x|^p)^{1/p}`; `p = ∞` gives the operator norm, `p < 1` the quasi-norm.
    pub fn p_norm(&self, p: T) -> Result<T> {
        if !(p > T::zero()) {
            return Err(AlgebraError::InvalidExponent(p.to_f64_lossy()));
        }
        let sv = self.singular_values();
        if p.is_infinite() {
            return Ok(sv
                .iter()
                .flat_map(|v| v.iter())
                .fold(T::zero(), |m, &s| m.max(s)));
        }
        let mut acc = T::zero();
        for (vals, b) in sv.iter().zip(self.spec.blocks()) {
            let s = vals
                .iter()
                .fold(T::zero(), |s, &x| if x > T::zero() { s + x.powf(p) } else { s });
            acc += b.delta * s;
        }
        Ok(acc.powf(T::one() / p))
    }

    pub fn operator_norm(&self) -> T {
        self.p_norm(T::infinity()).expect("infinite exponent is valid")
    }

    /// Von Neumann entropy `H(x) = τ(-x log x)`, `0 log 0 = 0`.
    pub fn entropy(&self) -> Result<T> {
        let mut h = T::zero();
        for (m, b) in self.blocks.iter().zip(self.spec.blocks()) {
            let eig = linalg::psd_eigen(m)?;
            let s = eig.values.iter().fold(T::zero(), |s, &l| s - xlogx(l));
            h += b.delta * s;
        }
        Ok(h)
    }

    /// Applies a scalar function to the spectrum of a PSD element.
    pub fn psd_function(&self, f: impl Fn(T) -> T + Copy) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|m| linalg::matrix_function(m, f))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    /// `x^r` for PSD `x`, `r > 0`.
    pub fn power(&self, r: T) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(AlgebraError::InvalidExponent(r.to_f64_lossy()));
        }
        self.psd_function(|t| if t > T::zero() { t.powf(r) } else { T::zero() })
    }

    /// Spectral projection onto eigenvalues above `rank_tol · ‖x‖_∞`.
    pub fn range_projection(&self, rank_tol: T) -> Result<Self> {
        let eigs = self
            .blocks
            .iter()
            .map(linalg::psd_eigen)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let top = eigs
            .iter()
            .flat_map(|e| e.values.iter())
            .fold(T::zero(), |m, &l| m.max(l));
        let cut = rank_tol * top;
        let blocks = eigs
            .iter()
            .map(|e| {
                if top == T::zero() {
                    CMatrix::zeros(e.values.len(), e.values.len())
                } else {
                    e.reconstruct_with(|l| if l > cut { T::one() } else { T::zero() })
                }
            })
            .collect();
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    /// `S(x) = τ(R(x))` at an explicit rank tolerance.
    pub fn support_with(&self, rank_tol: T) -> Result<T> {
        Ok(self.range_projection(rank_tol)?.trace().re)
    }

    /// `S(x) = τ(R(x))` at the default rank tolerance.
    pub fn support(&self) -> Result<T> {
        self.support_with(T::lit(DEFAULT_RANK_TOL))
    }

    /// Scales so that `τ(x) = target`.
    pub fn normalize_trace(&self, target: T) -> Result<Self> {
        if !(target > T::zero()) {
            return Err(AlgebraError::InvalidTarget(target.to_f64_lossy()));
        }
        let t = self.trace();
        if t.norm() == T::zero() {
            return Err(AlgebraError::ZeroTrace);
        }
        Ok(self.scale(Complex::new(target, T::zero()) / t))
    }

    /// Nearest PSD element: Hermitian part with negative eigenvalues clipped.
    pub fn psd_projection(&self) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|m| {
                let e = linalg::eig_hermitian(&m.hermitian_part())?;
                Ok(e.reconstruct_with(|l| l.max(T::zero())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    /// `g* g` with independent standard complex Gaussian entries, drawn from
    /// stream `index` of `seed`.
    pub fn random_positive(spec: &Arc<AlgebraSpec<T>>, seed: u64, index: u64) -> Self {
        let g = Self::random_gaussian(spec, seed, index);
        g.adjoint().mul(&g).expect("same spec").hermitian_part()
    }

    /// Element with independent standard complex Gaussian entries.
    pub fn random_gaussian(spec: &Arc<AlgebraSpec<T>>, seed: u64, index: u64) -> Self {
        let mut r = rng::stream(seed, index);
        let blocks = spec
            .blocks()
            .iter()
            .map(|b| CMatrix::from_fn(b.n, b.n, |_, _| rng::complex_normal(&mut r)))
            .collect();
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    /// Random Hermitian element.
    pub fn random_hermitian(spec: &Arc<AlgebraSpec<T>>, seed: u64, index: u64) -> Self {
        Self::random_gaussian(spec, seed, index).hermitian_part()
    }

    /// Random PSD element normalized to trace `target`.
    pub fn random_density(spec: &Arc<AlgebraSpec<T>>, seed: u64, index: u64, target: T) -> Self {
        Self::random_positive(spec, seed, index)
            .normalize_trace(target)
            .expect("Gram samples have positive trace")
    }

    /// Minimal projections `E^{(i)}_{ss}`.
    pub fn minimal_projections(spec: &Arc<AlgebraSpec<T>>) -> Vec<Self> {
        let mut out = Vec::new();
        for (i, b) in spec.blocks().iter().enumerate() {
            for s in 0..b.n {
                out.push(Self::matrix_unit(spec, i, s, s));
            }
        }
        out
    }

    pub fn cast<U: Real>(&self, spec: &Arc<AlgebraSpec<U>>) -> Element<U> {
        Element {
            spec: spec.clone(),
            blocks: self.blocks.iter().map(|b| b.cast()).collect(),
        }
    }
}

/// Serialized form of an element: per block, row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub blocks: Vec<Vec<[f64; 2]>>,
}

impl ElementJson {
    pub fn from_element(x: &Element<f64>) -> Self {
        Self {
            blocks: x
                .blocks()
                .iter()
                .map(|m| m.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn to_element(&self, spec: &Arc<AlgebraSpec<f64>>) -> Result<Element<f64>> {
        if self.blocks.len() != spec.num_blocks() {
            return Err(AlgebraError::InvalidSpec(format!(
                "{} blocks supplied for an algebra with {}",
                self.blocks.len(),
                spec.num_blocks()
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(spec.blocks())
            .map(|(entries, b)| {
                CMatrix::new(
                    b.n,
                    b.n,
                    entries.iter().map(|&[re, im]| Complex::new(re, im)).collect(),
                )
                .map_err(AlgebraError::from)
            })
            .collect::<Result<Vec<_>>>()?;
        Element::new(spec.clone(), blocks)
    }
}
