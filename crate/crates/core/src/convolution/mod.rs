//! Convolutions on tracial algebras, their comultiplications and antipodes,
//! axiom checkers, and concrete builders.

mod antipode;
mod builders;
mod checks;
mod structure;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraSpec, Element};
use crate::fusion::FusionError;
use crate::group::GroupError;
use crate::linalg::LinalgError;

pub use antipode::{Antipode, AntipodeJson};
pub use builders::{
    build_fusion_bialgebra, build_group_algebra, build_group_algebra_from_table, build_theta_swap,
    build_unitary_convolution, point_mass, theta_swap_closed_form, theta_swap_unitary, unitary_partial_trace,
    VERIFY_SAMPLES, VERIFY_SEED,
};
pub use checks::{
    check_antipode, check_associativity, check_frobenius, check_good_convolution, sample_general, sample_psd,
    CheckOutcome, FnVerification, GoodConvolutionReport, Witness, ANTIPODE_EXPONENTS, DEFAULT_TOL,
};
pub use structure::{ConvolutionStructure, StructureJson, TensorEntry};

pub type Spec = AlgebraSpec<f64>;
pub type Elem = Element<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvolutionError {
    #[error("element belongs to a different algebra")]
    SpecMismatch,
    #[error("invalid convolution structure: {0}")]
    InvalidStructure(String),
    #[error("invalid antipode: {0}")]
    InvalidAntipode(String),
    #[error("not a group: {0}")]
    InvalidGroup(#[from] GroupError),
    #[error("U is not unitary: {0}")]
    NotUnitary(String),
    #[error("theta = {0} is outside [0, 1]")]
    ThetaOutOfRange(f64),
    #[error("fusion ring fails validation: {0}")]
    InvalidRing(String),
    #[error("fusion matrices do not commute")]
    NonCommutative,
    #[error("verification failed: {axiom} (worst violation {worst:e})")]
    VerificationFailed {
        axiom: String,
        worst: f64,
        witness: Option<Box<Witness>>,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// A tracial algebra with a good `k`-convolution and an antipode, together
/// with the checker report that admitted it.
#[derive(Debug, Clone)]
pub struct FnAlgebra {
    structure: ConvolutionStructure,
    antipode: Antipode,
    verification: FnVerification,
}

impl FnAlgebra {
    /// Runs every axiom check and only returns the algebra if all pass.
    pub fn verify(
        structure: ConvolutionStructure,
        antipode: Antipode,
        n_samples: usize,
        seed: u64,
        tol: f64,
    ) -> Result<Self, ConvolutionError> {
        let verification = FnVerification::run(&structure, &antipode, n_samples, seed, tol);
        if let Some(f) = verification.first_failure() {
            return Err(ConvolutionError::VerificationFailed {
                axiom: f.axiom.clone(),
                worst: f.worst,
                witness: f.witness.clone().map(Box::new),
            });
        }
        Ok(Self {
            structure,
            antipode,
            verification,
        })
    }

    pub fn structure(&self) -> &ConvolutionStructure {
        &self.structure
    }

    pub fn antipode(&self) -> &Antipode {
        &self.antipode
    }

    pub fn verification(&self) -> &FnVerification {
        &self.verification
    }

    pub fn spec(&self) -> &Arc<Spec> {
        self.structure.spec()
    }

    pub fn k(&self) -> f64 {
        self.structure.k()
    }

    pub fn convolve(&self, x: &Elem, y: &Elem) -> Result<Elem, ConvolutionError> {
        self.structure.convolve(x, y)
    }

    /// The same algebra with trace scaled by `1/λ₁` and convolution by `1/λ₂`,
    /// re-verified.
    pub fn rescaled(&self, lambda1: f64, lambda2: f64) -> Result<Self, ConvolutionError> {
        let s = self.structure.rescaled(lambda1, lambda2)?;
        let rho = Antipode::new(s.spec(), self.antipode.perm().to_vec(), self.antipode.unitaries().to_vec())?;
        Self::verify(
            s,
            rho,
            self.verification.samples,
            self.verification.seed,
            self.verification.good.checks[0].tolerance,
        )
    }
}

/// Serializable summary of an FN algebra (structure plus antipode).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FnAlgebraJson(pub StructureJson);

impl FnAlgebraJson {
    pub fn from_algebra(f: &FnAlgebra) -> Self {
        Self(StructureJson::from_parts(&f.structure, Some(&f.antipode)))
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64 as C;

    use super::*;
    use crate::fusion::FusionRing;
    use crate::group::GroupTable;
    use crate::linalg::CMatrix;

    fn pts(spec: &Arc<Spec>, v: &[f64]) -> Elem {
        Element::from_point_values(spec, v).unwrap()
    }

    #[test]
    fn group_convolution_examples() {
        let z2 = build_group_algebra(&GroupTable::cyclic(2)).unwrap();
        let sp = z2.spec().clone();
        for g in 0..2 {
            for h in 0..2 {
                let c = z2.convolve(&point_mass(&sp, g), &point_mass(&sp, h)).unwrap();
                assert!(c.sub(&point_mass(&sp, (g + h) % 2)).unwrap().max_abs() < 1e-15);
            }
        }
        assert_eq!(sp.fp_dim(), 2.0);
        assert_eq!(sp.min_projection_trace(), 1.0);
        let z4 = build_group_algebra(&GroupTable::cyclic(4)).unwrap();
        let u = pts(z4.spec(), &[0.5, 0.0, 0.5, 0.0]);
        assert!(z4.convolve(&u, &u).unwrap().sub(&u).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn group_comultiplication_is_brute_force_adjoint() {
        let f = build_group_algebra(&GroupTable::cyclic(3)).unwrap();
        let sp = f.spec().clone();
        let s = f.structure();
        for g in 0..3 {
            let d = s.comultiply(&point_mass(&sp, g)).unwrap();
            let mut expect = Element::zero(s.square_spec());
            for h in 0..3 {
                let t = s.tensor(&point_mass(&sp, h), &point_mass(&sp, (g + 3 - h) % 3)).unwrap();
                expect = expect.add(&t).unwrap();
            }
            assert!(d.sub(&expect).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn group_antipode_is_inversion() {
        let f = build_group_algebra(&GroupTable::cyclic(3)).unwrap();
        let sp = f.spec().clone();
        for g in 0..3 {
            let r = f.antipode().apply(&point_mass(&sp, g)).unwrap();
            assert!(r.sub(&point_mass(&sp, (3 - g) % 3)).unwrap().max_abs() < 1e-15);
        }
        let i = Element::identity(&sp);
        assert_eq!(f.antipode().apply(&i).unwrap(), i);
    }

    #[test]
    fn s3_convolution_is_noncommutative() {
        let g = GroupTable::dihedral(3);
        let f = build_group_algebra(&g).unwrap();
        let sp = f.spec().clone();
        let (a, b) = (1, 3);
        let ab = f.convolve(&point_mass(&sp, a), &point_mass(&sp, b)).unwrap();
        let ba = f.convolve(&point_mass(&sp, b), &point_mass(&sp, a)).unwrap();
        assert!(ab.sub(&point_mass(&sp, g.mul(a, b))).unwrap().max_abs() < 1e-15);
        assert!(ab.sub(&ba).unwrap().max_abs() > 0.5);
        let e = point_mass(&sp, g.identity());
        let x = sample_general(&sp, 1, 0);
        assert!(f.convolve(&e, &x).unwrap().sub(&x).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn unitary_convolution_examples() {
        let n = 2;
        let ident = build_unitary_convolution(&CMatrix::identity(4), n).unwrap();
        let sp = ident.spec().clone();
        let x = sample_general(&sp, 3, 0);
        let y = sample_general(&sp, 3, 1);
        let xy = ident.convolve(&x, &y).unwrap();
        assert!(xy.sub(&x.scale(y.trace())).unwrap().max_abs() < 1e-14);
        let swap = theta_swap_unitary(0.0, n).unwrap().scale(C::new(0.0, -1.0));
        let sw = build_unitary_convolution(&swap, n).unwrap();
        assert!(sw.convolve(&x, &y).unwrap().sub(&y.scale(x.trace())).unwrap().max_abs() < 1e-14);
        let bad = CMatrix::<f64>::identity(4).scale_real(2.0);
        assert!(matches!(build_unitary_convolution(&bad, n), Err(ConvolutionError::NotUnitary(_))));
    }

    #[test]
    fn theta_swap_paths_agree() {
        let n = 2;
        let sp = Arc::new(AlgebraSpec::<f64>::matrix(n));
        for theta in [0.0, 0.3, 0.5, 1.0] {
            let s = build_theta_swap(theta, n).unwrap();
            let u = theta_swap_unitary(theta, n).unwrap();
            for i in 0..10 {
                let x = Element::random_density(&sp, 9, 2 * i, 1.0);
                let y = Element::random_density(&sp, 9, 2 * i + 1, 1.0);
                let a = s.convolve(&x, &y).unwrap();
                let b = unitary_partial_trace(&u, x.block(0), y.block(0)).unwrap();
                let c = theta_swap_closed_form(theta, x.block(0), y.block(0));
                assert!((a.block(0) - &b).max_abs() < 1e-12);
                assert!((a.block(0) - &c).max_abs() < 1e-12);
            }
        }
        assert!(matches!(build_theta_swap(1.5, 2), Err(ConvolutionError::ThetaOutOfRange(_))));
    }

    #[test]
    fn perturbed_tensor_breaks_haar() {
        let f = build_group_algebra(&GroupTable::cyclic(3)).unwrap();
        let s = f.structure().with_added_entry(0, 1, 2, C::new(0.1, 0.0)).unwrap();
        let rep = check_good_convolution(&s, 50, 1, DEFAULT_TOL);
        assert!(!rep.check("haar").unwrap().passed);
    }

    #[test]
    fn fibonacci_bialgebra_has_unequal_weights() {
        let f = build_fusion_bialgebra(&FusionRing::fibonacci()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let w: Vec<f64> = f.spec().blocks().iter().map(|b| b.delta).collect();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - phi * phi).abs() < 1e-9);
        assert!(f.verification().passed);
    }

    #[test]
    fn mutated_ring_is_rejected() {
        let bad = FusionRing::fibonacci().with_coefficient(1, 1, 0, 0);
        assert!(matches!(build_fusion_bialgebra(&bad), Err(ConvolutionError::InvalidRing(_))));
    }

    #[test]
    fn structure_json_round_trip() {
        let f = build_group_algebra(&GroupTable::dihedral(3)).unwrap();
        let js = serde_json::to_string(&FnAlgebraJson::from_algebra(&f)).unwrap();
        let back: StructureJson = serde_json::from_str(&js).unwrap();
        let (s, rho) = back.into_parts().unwrap();
        assert_eq!(&s, f.structure());
        assert_eq!(rho.as_ref(), Some(f.antipode()));
    }
}
