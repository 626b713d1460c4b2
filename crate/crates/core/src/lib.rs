//! Matrix-valued Charlier orthogonal polynomials, their dual families and the
//! difference-operator algebra around them.
//!
//! Special functions, matrices, model parameters, weights, the explicit
//! polynomials, norms, recurrence data and the dual families are generic over
//! [`Scalar`]: `f32`, `f64` and the 237-bit [`Wide`]. The dual route, whose
//! intermediate values span more than thirty orders of magnitude, runs in
//! [`Wide`]. Operator algebra over `P_n`, the shift operators and the
//! Gram-Schmidt oracle work in `f64`.

pub mod duality;
pub mod error;
pub mod matrix;
pub mod mvop;
pub mod operators;
pub mod params;
pub mod poly;
pub mod scalar;
pub mod special;
pub mod weight;

pub use error::{Error, Result};
pub use matrix::{block_vandermonde_det, Mat};
pub use params::ModelParams;
pub use scalar::{Scalar, Wide};

/// Double precision matrix.
pub type Matrix = Mat<f64>;
/// Double precision model parameters.
pub type Params = ModelParams<f64>;
/// Single precision matrix.
pub type Matrix32 = Mat<f32>;
/// Single precision model parameters.
pub type Params32 = ModelParams<f32>;
