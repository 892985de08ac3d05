//! Scalar abstraction used by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`], a thin bundle of the
//! `num-traits` capabilities they actually need, so the same code runs in
//! `f32` or `f64`. The crate root exposes `f64` aliases for the common types;
//! the stated tolerances throughout the crate assume `f64` precision.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Shorthand for converting an `f64` literal into `Self`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal converts to any Real")
    }

    /// Lossy view of the value as `f64`, for reports and diagnostics.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Free-function form of [`Real::lit`], convenient in expressions.
pub fn lit<T: Real>(v: f64) -> T {
    T::lit(v)
}
