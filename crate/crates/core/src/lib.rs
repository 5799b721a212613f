//! Convolution inequalities on finite-dimensional tracial algebras, and
//! categorification obstructions for fusion rings.
//!
//! The matrix kernels and tracial algebras are generic over the scalar type
//! (`f32` or `f64`); convolution structures, fusion criteria and the
//! inequality engines run in `f64`. The aliases below name the `f64` types.

pub mod algebra;
pub mod convolution;
pub mod fusion;
pub mod group;
pub mod inequality;
pub mod linalg;
pub mod rng;
pub mod scalar;

pub use convolution::{ConvolutionStructure, FnAlgebra};
pub use fusion::FusionRing;
pub use group::GroupTable;
pub use scalar::Real;

pub type CMatrix64 = linalg::CMatrix<f64>;
pub type CMatrix32 = linalg::CMatrix<f32>;
pub type Spec64 = algebra::AlgebraSpec<f64>;
pub type Spec32 = algebra::AlgebraSpec<f32>;
pub type Element64 = algebra::Element<f64>;
pub type Element32 = algebra::Element<f32>;
