use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ConvolutionError, Elem, Spec};
use crate::algebra::Element;
use crate::linalg::CMatrix;

type Mat = CMatrix<f64>;

/// Trace-preserving anti-*-isomorphism `ρ(x)_i = V_i x_{π(i)}ᵀ V_i*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Antipode {
    perm: Vec<usize>,
    unitaries: Vec<Mat>,
}

impl Antipode {
    /// Checks that `π` is a permutation matching block sizes and weights and
    /// that every `V_i` is unitary.
    pub fn new(spec: &Spec, perm: Vec<usize>, unitaries: Vec<Mat>) -> Result<Self, ConvolutionError> {
        let nb = spec.num_blocks();
        let bad = |m: String| Err(ConvolutionError::InvalidAntipode(m));
        if perm.len() != nb || unitaries.len() != nb {
            return bad(format!("expected {nb} permutation entries and unitaries"));
        }
        let mut seen = vec![false; nb];
        for (i, &p) in perm.iter().enumerate() {
            if p >= nb || seen[p] {
                return bad(format!("perm is not a permutation (entry {i})"));
            }
            seen[p] = true;
            let (bi, bp) = (spec.blocks()[i], spec.blocks()[p]);
            if bi.n != bp.n || (bi.delta - bp.delta).abs() > 1e-12 * bi.delta.max(bp.delta) {
                return bad(format!("block {i} and its image {p} differ in size or weight"));
            }
            let v = &unitaries[i];
            if v.rows() != bi.n || v.cols() != bi.n {
                return bad(format!("unitary {i} has the wrong shape"));
            }
            let dev = (&(&v.adjoint() * v) - &Mat::identity(bi.n)).max_abs();
            if dev > 1e-10 {
                return bad(format!("V_{i} is not unitary (deviation {dev:e})"));
            }
        }
        Ok(Self { perm, unitaries })
    }

    /// `ρ(x)_i = x_{π(i)}ᵀ`.
    pub fn from_permutation(spec: &Spec, perm: Vec<usize>) -> Result<Self, ConvolutionError> {
        let unitaries = spec.blocks().iter().map(|b| Mat::identity(b.n)).collect();
        Self::new(spec, perm, unitaries)
    }

    /// Blockwise transpose.
    pub fn transpose(spec: &Spec) -> Self {
        Self::from_permutation(spec, (0..spec.num_blocks()).collect()).expect("identity permutation")
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn unitaries(&self) -> &[Mat] {
        &self.unitaries
    }

    pub fn apply(&self, x: &Elem) -> Result<Elem, ConvolutionError> {
        if x.blocks().len() != self.perm.len() {
            return Err(ConvolutionError::SpecMismatch);
        }
        let blocks = self
            .perm
            .iter()
            .zip(&self.unitaries)
            .map(|(&p, v)| &(v * &x.block(p).transpose()) * &v.adjoint())
            .collect();
        Ok(Element::new(x.spec().clone(), blocks)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AntipodeJson {
    /// 0-indexed block permutation.
    pub perm: Vec<usize>,
    /// Per block, row-major `[re, im]` entries; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<Vec<[f64; 2]>>>,
}

impl AntipodeJson {
    pub fn from_antipode(r: &Antipode) -> Self {
        let trivial = r.unitaries.iter().all(|v| (v - &Mat::identity(v.rows())).max_abs() == 0.0);
        Self {
            perm: r.perm.clone(),
            unitaries: (!trivial).then(|| {
                r.unitaries
                    .iter()
                    .map(|v| v.as_slice().iter().map(|z| [z.re, z.im]).collect())
                    .collect()
            }),
        }
    }

    pub fn to_antipode(&self, spec: &Arc<Spec>) -> Result<Antipode, ConvolutionError> {
        match &self.unitaries {
            None => Antipode::from_permutation(spec, self.perm.clone()),
            Some(us) => {
                if us.len() != spec.num_blocks() {
                    return Err(ConvolutionError::InvalidAntipode("wrong number of unitaries".into()));
                }
                let mats = us
                    .iter()
                    .zip(spec.blocks())
                    .map(|(entries, b)| {
                        CMatrix::new(
                            b.n,
                            b.n,
                            entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                        )
                        .map_err(|e| ConvolutionError::InvalidAntipode(e.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Antipode::new(spec, self.perm.clone(), mats)
            }
        }
    }
}
