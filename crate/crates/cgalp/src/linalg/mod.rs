//! Finite-dimensional Hilbert-space primitives: dense vectors and matrices,
//! the bounded-linear-operator abstraction, masks, and SVD routines.

mod map;
mod matrix;
mod svd;
mod vector;

pub use map::{check_adjoint, operator_norm_estimate, LinearMap, MaskOperator};
pub use matrix::DenseMatrix;
pub use svd::{jacobi_svd, power_svd_top, PowerSvdFailure, Svd, TopSingular};
pub use vector::{inner, DenseVector};
