//! Scalar abstraction for the numeric core.

use core::fmt::{Debug, Display};
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the pricing formulas are written against.
///
/// Blanket-implemented for anything float-like (`f32`, `f64`, ...).
pub trait Real:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` literal into the scalar type.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("numeric constant not representable")
    }

    /// This scalar as `f64` (for diagnostics and serialization).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
