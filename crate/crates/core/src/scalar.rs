//! Scalar abstraction over the floating-point element type.
//!
//! All network math is generic over [`Scalar`] so the same code runs in
//! f64 for gradient checking and f32 for training.

use std::fmt::{Debug, Display};

use num_traits::Float;

/// Element type of tensors and network parameters.
pub trait Scalar:
    Float + num_traits::NumAssignOps + Debug + Display + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}
