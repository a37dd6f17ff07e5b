//! Scalar abstraction shared by every computation in the crate.
//!
//! All routines are generic over [`Real`], which is implemented for `f32`
//! and `f64`. The double-precision aliases at the crate root are what the
//! CLI and the acceptance tests use.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only if the target type cannot
    /// represent finite doubles at all (never the case for `f32`/`f64`).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer not representable")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `x^(2k)` evaluated with integer exponent; `k` is a harmonic mode.
#[inline]
pub(crate) fn pow2k<T: Real>(x: T, k: u32) -> T {
    x.powi(2 * k as i32)
}
