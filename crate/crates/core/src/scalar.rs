//! Scalar abstraction for the reference-element layer.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type usable by the polynomial and quadrature code: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Lossy conversion from `f64` constants.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion")
    }

    /// Conversion from a small integer (degrees, counts).
    #[inline]
    fn n(x: usize) -> Self {
        Self::from_usize(x).expect("scalar conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
