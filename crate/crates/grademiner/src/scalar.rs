//! Scalar abstraction for the numeric kernels.
//!
//! Everything that does arithmetic (clustering, entropy, grade blending)
//! is generic over [`Real`] so it can run in `f32` or `f64`. The crate
//! root pins concrete `f64` aliases for the pipeline types.

use std::fmt;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Converts an element count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as scalar")
    }

    /// Converts an `f64` constant into the scalar type.
    fn from_f64_const(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable as scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
