//! Relaxed H(div)-conforming hybrid DG solver for 2D Stokes and Navier-Stokes flow.

// index loops mirror the quadrature sums; negated comparisons also reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod mesh;
pub mod error;
pub mod scalar;
pub mod space;
pub mod assembly;
pub mod reconstruction;
pub mod solvers;
pub mod analysis;
pub mod problems;
pub mod scenarios;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Gauss rule on `[0, 1]` in double precision.
pub type IntervalRule = basis::QuadratureRule<f64, 1>;
/// Collapsed tensor rule on the reference triangle in double precision.
pub type TriangleRule = basis::QuadratureRule<f64, 2>;
/// Basis tabulation in double precision.
pub type BasisTable = basis::BasisTable<f64>;
