//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used throughout the library (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `asinh` of a positive number given through its natural logarithm.
    ///
    /// Stays finite when the number itself would overflow.
    fn asinh_from_ln(ln_x: Self) -> Self {
        if ln_x > Self::lit(20.0) {
            // asinh(x) = ln(2x) + 1/(4x^2) + ...
            ln_x + Self::LN_2() + Self::lit(0.25) * (Self::lit(-2.0) * ln_x).exp()
        } else {
            ln_x.exp().asinh()
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
