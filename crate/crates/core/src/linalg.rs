//! Dense complex matrix kernels.
//!
//! Everything downstream (tracial algebras, convolution tensors, fusion
//! criteria) reduces to a handful of operations on small dense complex
//! matrices: Hermitian eigendecomposition, Kronecker products, partial traces,
//! spectral functions and Perron data. Dimensions are at most a few hundred,
//! so the routines favour robustness over asymptotic speed.
//!
//! The Hermitian eigensolver reduces to a real symmetric tridiagonal matrix
//! with Householder reflections and a diagonal phase, then runs implicit QL.
//! General (non-normal) spectra use Hessenberg reduction and the Francis
//! double-shift QR iteration.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Absolute tolerance on the max-entry scale for Hermiticity and PSD checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |A - A*| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },
    #[error("scalar function undefined at eigenvalue {eigenvalue:e}")]
    FunctionUndefined { eigenvalue: f64 },
    #[error("negative entry {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub type Result<T, E = LinalgError> = std::result::Result<T, E>;

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        )
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
    }

    /// `max |A - A*|` over all entries.
    pub fn hermitian_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `v* A v`.
    pub fn quadratic_form(&self, v: &[Complex<T>]) -> Complex<T> {
        let av = self.matvec(v);
        v.iter()
            .zip(&av)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a.conj() * b)
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Converts the scalar type entrywise.
    pub fn cast<U: Real>(&self) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.try_mul(rhs).expect("shape mismatch in mul")
    }
}

/// Hermiticity tolerance for scalar type `T`: `1e-10` at double precision,
/// relaxed to a few hundred ulps for narrower types.
pub fn hermitian_tol<T: Real>() -> T {
    T::lit(HERMITIAN_TOL).max(T::eps() * T::lit(256.0))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Columns are the corresponding orthonormal eigenvectors.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn vector(&self, j: usize) -> Vec<Complex<T>> {
        self.vectors.column(j)
    }

    /// `V diag(f(λ)) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, &w) in fv.iter().enumerate() {
                if w != T::zero() {
                    acc += v[(i, k)] * v[(j, k)].conj() * w;
                }
            }
            acc
        })
    }
}

/// Eigendecomposition `A = V diag(λ) V*` of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian<T: Real>(a: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    a.require_square()?;
    let tol = hermitian_tol::<T>() * (T::one() + a.max_abs());
    let dev = a.hermitian_deviation();
    if dev > tol {
        return Err(LinalgError::NotHermitian {
            deviation: dev.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    eig_hermitian_unchecked(&a.hermitian_part())
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian<T: Real>(a: &CMatrix<T>) -> Result<Vec<T>> {
    Ok(eig_hermitian(a)?.values)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(a: &CMatrix<T>) -> Result<T> {
    Ok(eigvals_hermitian(a)?[0])
}

fn eig_hermitian_unchecked<T: Real>(a: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = a.rows;
    let zero = Complex::new(T::zero(), T::zero());
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let mut h = a.clone();
    let mut q = CMatrix::<T>::identity(n);
    let two = T::lit(2.0);

    // Householder reduction to Hermitian tridiagonal form.
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).fold(T::zero(), |s, i| s + h[(i, k)].norm_sqr()).sqrt();
        let tail = (k + 2..n).fold(T::zero(), |s, i| s + h[(i, k)].norm_sqr());
        if xnorm == T::zero() || tail == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v = vec![zero; n];
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2 = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if vnorm2 == T::zero() {
            continue;
        }
        let tau = two / vnorm2;
        // p = tau * H v
        let mut p = vec![zero; n];
        for i in 0..n {
            let mut acc = zero;
            for j in k + 1..n {
                acc += h[(i, j)] * v[j];
            }
            p[i] = acc * tau;
        }
        let vp = v.iter().zip(&p).fold(zero, |s, (&a, &b)| s + a.conj() * b);
        let kk = vp * (tau / two);
        let w: Vec<Complex<T>> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kk * vi).collect();
        for i in 0..n {
            for j in 0..n {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                if upd != zero {
                    h[(i, j)] -= upd;
                }
            }
        }
        // Q <- Q (I - tau v v*)
        for i in 0..n {
            let mut qv = zero;
            for j in k + 1..n {
                qv += q[(i, j)] * v[j];
            }
            let qv = qv * tau;
            for j in k + 1..n {
                q[(i, j)] -= qv * v[j].conj();
            }
        }
    }

    // Diagonal phase making the subdiagonal real and nonnegative.
    let mut diag = vec![T::zero(); n];
    let mut sub = vec![T::zero(); n];
    let mut d = vec![Complex::new(T::one(), T::zero()); n];
    for i in 0..n {
        diag[i] = h[(i, i)].re;
    }
    for i in 0..n - 1 {
        let e = h[(i + 1, i)];
        let m = e.norm();
        sub[i] = m;
        d[i + 1] = if m == T::zero() { d[i] } else { d[i] * (e / m) };
    }
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = q[(i, j)] * d[j];
        }
    }

    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    tql2(&mut diag, &mut sub, Some(&mut z), n)?;

    // V = Q Z
    let mut vectors = CMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let qik = q[(i, k)];
            if qik == zero {
                continue;
            }
            for j in 0..n {
                vectors.data[i * n + j] += qik * z[k * n + j];
            }
        }
    }
    Ok(HermitianEigen {
        values: diag,
        vectors,
    })
}

/// Implicit QL on a real symmetric tridiagonal matrix (`d` diagonal, `e[i]`
/// couples `i` and `i+1`), accumulating rotations into row-major `z`.
/// Eigenvalues are returned sorted ascending with matching columns.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>, n: usize) -> Result<()> {
    let eps = T::eps();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    if n > 0 {
        e[n - 1] = T::zero();
    }
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(LinalgError::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zk1 = z[k * n + i + 1];
                            let zk = z[k * n + i];
                            z[k * n + i + 1] = s * zk + c * zk1;
                            z[k * n + i] = c * zk - s * zk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    // Selection sort, ascending.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().take(n).skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            if let Some(z) = z.as_deref_mut() {
                for row in 0..n {
                    z.swap(row * n + i, row * n + k);
                }
            }
        }
    }
    Ok(())
}

/// Smallest eigenpair of a Hermitian matrix, plus the gap to the next eigenvalue
/// (`+∞` for 1×1). Cheaper than [`eig_hermitian`]: eigenvalues come from the
/// tridiagonal form without accumulating rotations, and the vector from inverse
/// iteration on the tridiagonal matrix.
pub fn min_eigenpair<T: Real>(a: &CMatrix<T>) -> Result<(T, Vec<Complex<T>>, T)> {
    a.require_square()?;
    let tol = hermitian_tol::<T>() * (T::one() + a.max_abs());
    let dev = a.hermitian_deviation();
    if dev > tol {
        return Err(LinalgError::NotHermitian {
            deviation: dev.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    let n = a.rows;
    let zero = Complex::new(T::zero(), T::zero());
    if n == 0 {
        return Err(LinalgError::DimensionMismatch("empty matrix".into()));
    }
    let two = T::lit(2.0);
    let mut h = a.hermitian_part();
    let mut reflectors: Vec<(Vec<Complex<T>>, T)> = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).fold(T::zero(), |s, i| s + h[(i, k)].norm_sqr()).sqrt();
        let tail = (k + 2..n).fold(T::zero(), |s, i| s + h[(i, k)].norm_sqr());
        if xnorm == T::zero() || tail == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let mut v = vec![zero; n];
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] += phase * xnorm;
        let vnorm2 = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        let tau = two / vnorm2;
        let mut p = vec![zero; n];
        for (i, pi) in p.iter_mut().enumerate().skip(k) {
            let mut acc = zero;
            for j in k + 1..n {
                acc += h[(i, j)] * v[j];
            }
            *pi = acc * tau;
        }
        let vp = v.iter().zip(&p).fold(zero, |s, (&a, &b)| s + a.conj() * b);
        let kk = vp * (tau / two);
        let w: Vec<Complex<T>> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kk * vi).collect();
        for i in k..n {
            for j in k..n {
                h[(i, j)] -= v[i] * w[j].conj() + w[i] * v[j].conj();
            }
        }
        reflectors.push((v, tau));
    }
    let mut diag: Vec<T> = (0..n).map(|i| h[(i, i)].re).collect();
    let mut sub = vec![T::zero(); n];
    let mut phases = vec![Complex::new(T::one(), T::zero()); n];
    for i in 0..n - 1 {
        let e = h[(i + 1, i)];
        let m = e.norm();
        sub[i] = m;
        phases[i + 1] = if m == T::zero() { phases[i] } else { phases[i] * (e / m) };
    }
    let (d0, e0) = (diag.clone(), sub.clone());
    tql2(&mut diag, &mut sub, None, n)?;
    let lambda = diag[0];
    let gap = if n > 1 { diag[1] - diag[0] } else { T::infinity() };

    // Inverse iteration on the positive definite T - μI, μ just below λ_min.
    let scale = diag.iter().fold(T::one(), |m, x| m.max(x.abs()));
    let mu = lambda - T::lit(1e-10).max(T::eps() * T::lit(64.0)) * scale;
    let mut z = vec![T::one(); n];
    for _ in 0..3 {
        // LDLᵀ of the shifted tridiagonal, then solve.
        let mut dd = vec![T::zero(); n];
        let mut l = vec![T::zero(); n];
        dd[0] = d0[0] - mu;
        for i in 1..n {
            l[i] = e0[i - 1] / dd[i - 1];
            dd[i] = d0[i] - mu - l[i] * e0[i - 1];
        }
        for i in 1..n {
            let prev = z[i - 1];
            z[i] -= l[i] * prev;
        }
        for i in 0..n {
            z[i] /= dd[i];
        }
        for i in (0..n - 1).rev() {
            let next = z[i + 1];
            z[i] -= l[i + 1] * next;
        }
        let norm = z.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            // Fall back to the full decomposition.
            let eig = eig_hermitian_unchecked(&a.hermitian_part())?;
            return Ok((eig.values[0], eig.vector(0), gap));
        }
        for x in &mut z {
            *x /= norm;
        }
    }
    let mut x: Vec<Complex<T>> = z.iter().zip(&phases).map(|(&zi, &p)| p * zi).collect();
    for (v, tau) in reflectors.iter().rev() {
        let vx = v.iter().zip(&x).fold(zero, |s, (&a, &b)| s + a.conj() * b) * *tau;
        for (xi, &vi) in x.iter_mut().zip(v) {
            *xi -= vi * vx;
        }
    }
    Ok((lambda, x, gap))
}

/// Eigenvalues of a general real square matrix via Hessenberg reduction and
/// Francis double-shift QR. Order is unspecified.
pub fn eigenvalues_general<T: Real>(m: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    m.require_square()?;
    if m.data.iter().any(|z| z.im != T::zero()) {
        return Err(LinalgError::DimensionMismatch(
            "eigenvalues_general expects a real matrix".into(),
        ));
    }
    let n = m.rows;
    let mut a: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
    hessenberg(&mut a);
    hqr(&mut a)
}

fn hessenberg<T: Real>(h: &mut [Vec<T>]) {
    let n = h.len();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![T::zero(); n];
    for m in 1..high {
        let scale = (m..=high).fold(T::zero(), |s, i| s + h[i][m - 1].abs());
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f += ort[i] * h[i][j];
            }
            f /= hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut().take(high + 1) {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f += ort[j] * row[j];
            }
            f /= hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m][m - 1] = scale * g;
    }
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

#[allow(unused_assignments)]
fn hqr<T: Real>(a: &mut [Vec<T>]) -> Result<Vec<Complex<T>>> {
    let n = a.len();
    let eps = T::eps();
    let mut wr = vec![T::zero(); n];
    let mut wi = vec![T::zero(); n];
    let mut anorm = T::zero();
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut x, mut y, mut z, mut w);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = T::zero();
                    break;
                }
                l -= 1;
            }
            x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = T::zero();
                nn -= 1;
                break;
            }
            y = a[nu - 1][nu - 1];
            w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                p = T::lit(0.5) * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != T::zero() {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = T::zero();
                    wi[nu] = T::zero();
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its >= 60 {
                return Err(LinalgError::NoConvergence);
            }
            if its == 10 || its == 20 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            loop {
                z = a[m][m];
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - r - s0;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i][i - 2] = T::zero();
                if i != m + 2 {
                    a[i][i - 3] = T::zero();
                }
            }
            let mut k = m;
            while k + 1 <= nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = T::zero();
                    if k + 1 != nu {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        p = x * row[k] + y * row[k + 1];
                        if k + 1 != nu {
                            p += z * row[k + 2];
                            row[k + 2] -= p * r;
                        }
                        row[k + 1] -= p * q;
                        row[k] -= p;
                    }
                }
                k += 1;
            }
            if l + 1 >= nu {
                break;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex::new(re, im)).collect())
}

/// Kronecker product with the first factor's index varying slowest.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij.re == T::zero() && aij.im == T::zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Traces out the second tensor factor of an `(n1·n2)×(n1·n2)` matrix.
pub fn partial_trace_second<T: Real>(c: &CMatrix<T>, n1: usize, n2: usize) -> Result<CMatrix<T>> {
    let dim = n1 * n2;
    if c.rows != dim || c.cols != dim {
        return Err(LinalgError::DimensionMismatch(format!(
            "partial trace of {}x{} over {n1}x{n2}",
            c.rows, c.cols
        )));
    }
    Ok(CMatrix::from_fn(n1, n1, |i, j| {
        (0..n2).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + c[(i * n2 + k, j * n2 + k)])
    }))
}

/// Clamps eigenvalues within the PSD tolerance to zero; rejects larger negatives.
pub fn psd_eigen<T: Real>(a: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let mut eig = eig_hermitian(a)?;
    let tol = hermitian_tol::<T>() * T::one().max(a.max_abs());
    if let Some(&min) = eig.values.first() {
        if min < -tol {
            return Err(LinalgError::NotPsd {
                min_eigenvalue: min.to_f64_lossy(),
                tolerance: tol.to_f64_lossy(),
            });
        }
    }
    for v in &mut eig.values {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    Ok(eig)
}

/// `V diag(f(λ)) V*` for a positive semidefinite `A`.
pub fn matrix_function<T: Real>(a: &CMatrix<T>, f: impl Fn(T) -> T) -> Result<CMatrix<T>> {
    let eig = psd_eigen(a)?;
    let mut values = Vec::with_capacity(eig.values.len());
    for &l in &eig.values {
        let fl = f(l);
        if !fl.is_finite() {
            return Err(LinalgError::FunctionUndefined {
                eigenvalue: l.to_f64_lossy(),
            });
        }
        values.push(fl);
    }
    Ok(HermitianEigen {
        values,
        vectors: eig.vectors,
    }
    .reconstruct_with(|x| x))
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.rows == 0 || a.cols == 0 {
        return T::zero();
    }
    let gram = if a.rows >= a.cols {
        &a.adjoint() * a
    } else {
        a * &a.adjoint()
    };
    let values = eig_hermitian_unchecked(&gram.hermitian_part())
        .expect("tridiagonal QL converges on Gram matrices")
        .values;
    values.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt()
}

/// Singular values of `A`, ascending, computed from the eigenvalues of `A*A`.
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    let gram = &a.adjoint() * a;
    eig_hermitian_unchecked(&gram.hermitian_part())
        .expect("tridiagonal QL converges on Gram matrices")
        .values
        .into_iter()
        .map(|l| l.max(T::zero()).sqrt())
        .collect()
}

/// Perron–Frobenius data of an entrywise-nonnegative matrix.
#[derive(Debug, Clone)]
pub struct PerronData<T> {
    pub value: T,
    /// Entrywise nonnegative, unit Euclidean norm.
    pub vector: Vec<T>,
    /// Whether the symmetrized pattern `M + Mᵀ` is irreducible; only then is
    /// `vector` guaranteed to be an eigenvector.
    pub irreducible: bool,
}

/// Spectral radius and Perron vector of a nonnegative real matrix.
pub fn perron_eigen<T: Real>(m: &CMatrix<T>) -> Result<PerronData<T>> {
    m.require_square()?;
    let n = m.rows;
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            if z.im != T::zero() || z.re < T::zero() {
                return Err(LinalgError::NegativeEntry {
                    row: i,
                    col: j,
                    value: z.re.to_f64_lossy(),
                });
            }
        }
    }
    if n == 0 {
        return Ok(PerronData {
            value: T::zero(),
            vector: vec![],
            irreducible: true,
        });
    }
    let spectrum = eigenvalues_general(m)?;
    let value = spectrum.iter().fold(T::zero(), |r, z| r.max(z.norm()));

    // Perron vector: null vector of (M - ρI), read off the Gram matrix.
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= Complex::new(value, T::zero());
    }
    let gram = &shifted.adjoint() * &shifted;
    let eig = eig_hermitian_unchecked(&gram.hermitian_part())?;
    let raw = eig.vector(0);
    let mut vector: Vec<T> = raw.iter().map(|z| z.norm()).collect();
    let norm = vector.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    if norm > T::zero() {
        for x in &mut vector {
            *x /= norm;
        }
    }
    Ok(PerronData {
        value,
        vector,
        irreducible: symmetrized_irreducible(m),
    })
}

fn symmetrized_irreducible<T: Real>(m: &CMatrix<T>) -> bool {
    let n = m.rows;
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && (m[(i, j)].re > T::zero() || m[(j, i)].re > T::zero()) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn real(rows: usize, cols: usize, v: &[f64]) -> CMatrix<f64> {
        CMatrix::from_real(rows, cols, v).unwrap()
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = eig_hermitian(&CMatrix::<f64>::identity(3)).unwrap();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-14));
        let vv = &e.vectors.adjoint() * &e.vectors;
        assert!((&vv - &CMatrix::identity(3)).max_abs() < 1e-14);

        let e = eig_hermitian(&CMatrix::<f64>::from_diag(&[2.0, -1.0])).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eig_swap_block() {
        let e = eig_hermitian(&real(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_complex_hermitian_reconstructs() {
        let a = CMatrix::new(
            3,
            3,
            vec![
                c(2.0),
                Complex::new(1.0, -1.0),
                Complex::new(0.0, 0.5),
                Complex::new(1.0, 1.0),
                c(-1.0),
                Complex::new(0.3, 0.0),
                Complex::new(0.0, -0.5),
                Complex::new(0.3, 0.0),
                c(0.5),
            ],
        )
        .unwrap();
        let e = eig_hermitian(&a).unwrap();
        let back = e.reconstruct_with(|l| l);
        assert!((&back - &a).max_abs() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_hermitian_and_non_square() {
        let a = real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eig_hermitian(&a), Err(LinalgError::NotHermitian { .. })));
        let b = CMatrix::<f64>::zeros(2, 3);
        assert!(matches!(eig_hermitian(&b), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn eig_single_precision() {
        let a = CMatrix::<f32>::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = eig_hermitian(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-6);
        assert!((e.values[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn kron_examples() {
        let i2 = CMatrix::<f64>::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let s = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ss = kron(&s, &s);
        let anti = CMatrix::from_fn(4, 4, |i, j| c(if i + j == 3 { 1.0 } else { 0.0 }));
        assert_eq!(ss, anti);
        let (a, b, cc, d) = (2.0, 3.0, 5.0, 7.0);
        let dd = kron(&CMatrix::from_diag(&[a, b]), &CMatrix::from_diag(&[cc, d]));
        assert_eq!(dd, CMatrix::from_diag(&[a * cc, a * d, b * cc, b * d]));
    }

    #[test]
    fn partial_trace_examples() {
        let x = CMatrix::new(2, 2, vec![c(1.0), Complex::new(0.0, 2.0), Complex::new(0.0, -2.0), c(3.0)]).unwrap();
        let y = real(2, 2, &[0.25, 0.5, 0.5, 0.75]);
        let pt = partial_trace_second(&kron(&x, &y), 2, 2).unwrap();
        assert!((&pt - &x.scale(y.trace())).max_abs() < 1e-15);
        let pt = partial_trace_second(&CMatrix::<f64>::identity(4), 2, 2).unwrap();
        assert_eq!(pt, CMatrix::from_diag(&[2.0, 2.0]));
        assert!(partial_trace_second(&CMatrix::<f64>::identity(3), 2, 2).is_err());
    }

    /// Swap on C^n ⊗ C^n: S(e_a ⊗ e_b) = e_b ⊗ e_a.
    fn swap(n: usize) -> CMatrix<f64> {
        CMatrix::from_fn(n * n, n * n, |row, col| {
            let (a, b) = (col / n, col % n);
            c(if row == b * n + a { 1.0 } else { 0.0 })
        })
    }

    #[test]
    fn partial_trace_of_swapped_product_brute_force() {
        // Oracle: sum over matrix units at n = 2 directly from the index formula
        // (S(x⊗y))[(i,k),(j,l)] = (x⊗y)[(k,i),(j,l)] = x[k,j] y[i,l].
        let n = 2;
        let x = CMatrix::new(2, 2, vec![c(1.0), Complex::new(2.0, 1.0), c(-1.0), c(0.5)]).unwrap();
        let y = CMatrix::new(2, 2, vec![Complex::new(0.0, 1.0), c(3.0), c(2.0), c(-2.0)]).unwrap();
        let mut oracle = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    oracle[(i, j)] += x[(k, j)] * y[(i, k)];
                }
            }
        }
        let pt = partial_trace_second(&(&swap(n) * &kron(&x, &y)), n, n).unwrap();
        assert!((&pt - &oracle).max_abs() < 1e-14);
        assert!((&pt - &(&y * &x)).max_abs() < 1e-14);
    }

    #[test]
    fn matrix_function_examples() {
        let p = real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        for r in [0.3, 1.0, 2.7] {
            let pr = matrix_function(&p, |t: f64| t.powf(r)).unwrap();
            assert!((&pr - &p).max_abs() < 1e-14);
        }
        let s = matrix_function(&CMatrix::from_diag(&[4.0, 9.0]), f64::sqrt).unwrap();
        assert!((&s - &CMatrix::from_diag(&[2.0, 3.0])).max_abs() < 1e-14);
        let n = 4usize;
        let u = CMatrix::<f64>::identity(n).scale_real(1.0 / n as f64);
        let h = matrix_function(&u, |t| -crate::scalar::xlogx(t)).unwrap();
        let expect = (n as f64).ln() / n as f64;
        assert!((&h - &CMatrix::identity(n).scale_real(expect)).max_abs() < 1e-14);
    }

    #[test]
    fn matrix_function_errors() {
        let neg = CMatrix::from_diag(&[1.0, -1e-6]);
        assert!(matches!(matrix_function(&neg, |t| t), Err(LinalgError::NotPsd { .. })));
        // Within tolerance: clamped.
        let tiny = CMatrix::from_diag(&[1.0, -1e-12]);
        let out = matrix_function(&tiny, f64::sqrt).unwrap();
        assert_eq!(out[(1, 1)].re, 0.0);
        let sing = CMatrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(
            matrix_function(&sing, f64::ln),
            Err(LinalgError::FunctionUndefined { .. })
        ));
    }

    #[test]
    fn perron_examples() {
        let pd = perron_eigen(&CMatrix::<f64>::identity(3)).unwrap();
        assert!((pd.value - 1.0).abs() < 1e-14);
        assert!((pd.vector.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);

        let fib = real(2, 2, &[0.0, 1.0, 1.0, 1.0]);
        let pd = perron_eigen(&fib).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((pd.value - phi).abs() < 1e-12 * phi);
        assert!(pd.irreducible);

        let sw = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let pd = perron_eigen(&sw).unwrap();
        assert!((pd.value - 1.0).abs() < 1e-12);
        let h = 1.0 / 2f64.sqrt();
        assert!((pd.vector[0] - h).abs() < 1e-10 && (pd.vector[1] - h).abs() < 1e-10);

        assert!(matches!(
            perron_eigen(&real(1, 1, &[-1.0])),
            Err(LinalgError::NegativeEntry { .. })
        ));
    }

    #[test]
    fn perron_of_cyclic_permutation() {
        // Non-normal spectrum path: eigenvalues are cube roots of unity.
        let p = real(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let spec = eigenvalues_general(&p).unwrap();
        assert!(spec.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let pd = perron_eigen(&p).unwrap();
        assert!((pd.value - 1.0).abs() < 1e-12);
        let v = pd.vector;
        assert!(v.iter().all(|&x| (x - 1.0 / 3f64.sqrt()).abs() < 1e-10));
    }

    #[test]
    fn general_eigenvalues_companion() {
        // Companion matrix of (t-1)(t-2)(t-3)(t+4) = t^4 - 2t^3 - 13t^2 + 38t - 24.
        let m = real(
            4,
            4,
            &[2.0, 13.0, -38.0, 24.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        );
        let mut re: Vec<f64> = eigenvalues_general(&m).unwrap().iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in re.iter().zip([-4.0, 1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-9, "{re:?}");
        }
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&CMatrix::<f64>::identity(4)) - 1.0).abs() < 1e-15);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spectral_norm(&real(2, 2, &[0.0, 1.0, 1.0, 1.0])) - phi).abs() < 1e-12 * phi);
        assert_eq!(spectral_norm(&CMatrix::<f64>::zeros(3, 3)), 0.0);
        let rect = real(1, 2, &[3.0, 4.0]);
        assert!((spectral_norm(&rect) - 5.0).abs() < 1e-13);
    }

    #[test]
    fn min_eigenpair_matches_full_decomposition() {
        let mut seed = 0x1234_5678_u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for n in [1, 2, 3, 7, 16] {
            let g = CMatrix::from_fn(n, n, |_, _| Complex::new(next(), next()));
            let a = g.hermitian_part();
            let full = eig_hermitian(&a).unwrap();
            let (lam, v, gap) = min_eigenpair(&a).unwrap();
            assert!((lam - full.values[0]).abs() < 1e-12);
            if n > 1 {
                assert!((gap - (full.values[1] - full.values[0])).abs() < 1e-12);
            }
            let av = a.matvec(&v);
            let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - y * lam).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-9, "n={n} residual {res}");
        }
        // degenerate minimum: any vector of the eigenspace is acceptable
        let a = CMatrix::<f64>::from_diag(&[-1.0, -1.0, 2.0, 5.0]);
        let (lam, v, gap) = min_eigenpair(&a).unwrap();
        assert!((lam + 1.0).abs() < 1e-14 && gap.abs() < 1e-14);
        assert!(v[2].norm() < 1e-8 && v[3].norm() < 1e-8);
    }
}
