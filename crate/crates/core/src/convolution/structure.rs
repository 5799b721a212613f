use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Antipode, AntipodeJson, ConvolutionError, Elem, Spec};
use crate::algebra::Element;

type C = Complex64;

/// One nonzero structure coefficient: `(x∗y)_c += x_a y_b · value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorEntry {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub value: C,
}

/// A bilinear convolution on a tracial algebra, stored as its structure tensor
/// in trace-orthonormal coordinates, together with the constant `k`.
#[derive(Debug, Clone)]
pub struct ConvolutionStructure {
    spec: Arc<Spec>,
    square: Arc<Spec>,
    k: f64,
    entries: Vec<TensorEntry>,
    /// `pair[a * D + b]` = coordinate of `(a, b)` in the tensor square.
    pair: Vec<usize>,
}

impl PartialEq for ConvolutionStructure {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.k == other.k && self.entries == other.entries
    }
}

impl ConvolutionStructure {
    /// Duplicate `(a, b, c)` entries are summed; exact zeros are dropped.
    pub fn new(spec: Arc<Spec>, k: f64, entries: Vec<TensorEntry>) -> Result<Self, ConvolutionError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(ConvolutionError::InvalidStructure(format!("k = {k} must be positive")));
        }
        let dim = spec.coord_dim();
        let mut entries = entries;
        for e in &entries {
            if e.a >= dim || e.b >= dim || e.c >= dim {
                return Err(ConvolutionError::InvalidStructure(format!(
                    "tensor index ({}, {}, {}) out of range for dimension {dim}",
                    e.a, e.b, e.c
                )));
            }
            if !e.value.re.is_finite() || !e.value.im.is_finite() {
                return Err(ConvolutionError::InvalidStructure("non-finite tensor entry".into()));
            }
        }
        entries.sort_by_key(|e| (e.a, e.b, e.c));
        let mut merged: Vec<TensorEntry> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if (last.a, last.b, last.c) == (e.a, e.b, e.c) => last.value += e.value,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.value != C::new(0.0, 0.0));
        let square = Arc::new(spec.tensor_square());
        let nb = spec.num_blocks();
        let mut pair = vec![0; dim * dim];
        for a in 0..dim {
            let (i, s, t) = spec.coord_location(a);
            for b in 0..dim {
                let (j, u, v) = spec.coord_location(b);
                let nj = spec.blocks()[j].n;
                pair[a * dim + b] = square.coord_index(i * nb + j, s * nj + u, t * nj + v);
            }
        }
        Ok(Self {
            spec,
            square,
            k,
            entries: merged,
            pair,
        })
    }

    /// Builds from a dense `D×D×D` coefficient function.
    pub fn from_dense(spec: Arc<Spec>, k: f64, f: impl Fn(usize, usize, usize) -> C) -> Result<Self, ConvolutionError> {
        let d = spec.coord_dim();
        let mut entries = Vec::new();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let value = f(a, b, c);
                    if value != C::new(0.0, 0.0) {
                        entries.push(TensorEntry { a, b, c, value });
                    }
                }
            }
        }
        Self::new(spec, k, entries)
    }

    pub fn spec(&self) -> &Arc<Spec> {
        &self.spec
    }

    /// The algebra `Δ` maps into.
    pub fn square_spec(&self) -> &Arc<Spec> {
        &self.square
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn entries(&self) -> &[TensorEntry] {
        &self.entries
    }

    fn require_spec(&self, x: &Elem) -> Result<(), ConvolutionError> {
        if Arc::ptr_eq(x.spec(), &self.spec) || **x.spec() == *self.spec {
            Ok(())
        } else {
            Err(ConvolutionError::SpecMismatch)
        }
    }

    /// `x ∗ y`.
    pub fn convolve(&self, x: &Elem, y: &Elem) -> Result<Elem, ConvolutionError> {
        self.require_spec(x)?;
        self.require_spec(y)?;
        let (xc, yc) = (x.coords(), y.coords());
        let mut out = vec![C::new(0.0, 0.0); self.spec.coord_dim()];
        for e in &self.entries {
            out[e.c] += xc[e.a] * yc[e.b] * e.value;
        }
        Ok(Element::from_coords(&self.spec, &out)?)
    }

    /// `Δ(z)`, the adjoint of `∗`: `⟨x∗y, z⟩ = ⟨x⊗y, Δ(z)⟩`.
    pub fn comultiply(&self, z: &Elem) -> Result<Elem, ConvolutionError> {
        self.require_spec(z)?;
        let zc = z.coords();
        let d = self.spec.coord_dim();
        let mut out = vec![C::new(0.0, 0.0); self.square.coord_dim()];
        for e in &self.entries {
            out[self.pair[e.a * d + e.b]] += e.value.conj() * zc[e.c];
        }
        Ok(Element::from_coords(&self.square, &out)?)
    }

    /// `x ⊗ y` in the tensor square.
    pub fn tensor(&self, x: &Elem, y: &Elem) -> Result<Elem, ConvolutionError> {
        self.require_spec(x)?;
        self.require_spec(y)?;
        let (xc, yc) = (x.coords(), y.coords());
        let d = xc.len();
        let mut out = vec![C::new(0.0, 0.0); self.square.coord_dim()];
        for a in 0..d {
            for b in 0..d {
                out[self.pair[a * d + b]] = xc[a] * yc[b];
            }
        }
        Ok(Element::from_coords(&self.square, &out)?)
    }

    /// Trace rescaled by `1/λ₁` and convolution by `1/λ₂`; the constant becomes `λ₁k/λ₂`.
    pub fn rescaled(&self, lambda1: f64, lambda2: f64) -> Result<Self, ConvolutionError> {
        if !(lambda1 > 0.0 && lambda2 > 0.0) {
            return Err(ConvolutionError::InvalidStructure("rescaling factors must be positive".into()));
        }
        // coordinates scale by λ₁^{-1/2}, so the tensor picks up √λ₁ / λ₂
        let f = lambda1.sqrt() / lambda2;
        let spec = Arc::new(self.spec.rescaled(lambda1)?);
        Self::new(
            spec,
            lambda1 * self.k / lambda2,
            self.entries
                .iter()
                .map(|e| TensorEntry { value: e.value * f, ..*e })
                .collect(),
        )
    }

    /// Copy with `value` added to coefficient `(a, b, c)`.
    pub fn with_added_entry(&self, a: usize, b: usize, c: usize, value: C) -> Result<Self, ConvolutionError> {
        let mut entries = self.entries.clone();
        entries.push(TensorEntry { a, b, c, value });
        Self::new(self.spec.clone(), self.k, entries)
    }

    /// Copy with a different declared constant.
    pub fn with_k(&self, k: f64) -> Result<Self, ConvolutionError> {
        Self::new(self.spec.clone(), k, self.entries.clone())
    }
}

/// `{"spec": ..., "k": float, "tensor": [[a, b, c, re, im], ...], "antipode"?: ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureJson {
    pub spec: Spec,
    pub k: f64,
    pub tensor: Vec<(usize, usize, usize, f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antipode: Option<AntipodeJson>,
}

impl StructureJson {
    pub fn from_parts(s: &ConvolutionStructure, antipode: Option<&Antipode>) -> Self {
        Self {
            spec: (**s.spec()).clone(),
            k: s.k(),
            tensor: s
                .entries()
                .iter()
                .map(|e| (e.a, e.b, e.c, e.value.re, e.value.im))
                .collect(),
            antipode: antipode.map(AntipodeJson::from_antipode),
        }
    }

    pub fn into_parts(self) -> Result<(ConvolutionStructure, Option<Antipode>), ConvolutionError> {
        let spec = Arc::new(self.spec);
        let s = ConvolutionStructure::new(
            spec.clone(),
            self.k,
            self.tensor
                .into_iter()
                .map(|(a, b, c, re, im)| TensorEntry {
                    a,
                    b,
                    c,
                    value: C::new(re, im),
                })
                .collect(),
        )?;
        let rho = self.antipode.map(|j| j.to_antipode(&spec)).transpose()?;
        Ok((s, rho))
    }
}
