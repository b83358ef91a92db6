//! Solver library for affinely constrained composite convex minimization by
//! conditional gradient hybridized with an augmented Lagrangian and a
//! proximal step, plus the supporting prox/LMO toolkits, a product-space
//! lifting layer, a generalized forward-backward baseline, and a benchmark
//! harness.

pub mod bench;
pub mod error;
pub mod gfb;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod product;
pub mod prox;
pub mod scalar;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases used by the benchmark harness.
pub type Vector = linalg::DenseVector<f64>;
pub type Matrix = linalg::DenseMatrix<f64>;
pub type Map = linalg::LinearMap<f64>;
