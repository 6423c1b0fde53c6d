//! Scalar abstraction: all numerics are generic over the floating type.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use std::iter::Sum;

/// Floating-point scalar usable everywhere in this crate: real field
/// algebra (nalgebra), FFT support (rustfft) and primitive conversions.
pub trait Scalar: RealField + FftNum + FromPrimitive + ToPrimitive + Sum<Self> + Default {
    /// Shorthand for embedding an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossy readback, for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar to f64")
    }
}

impl<T> Scalar for T where T: RealField + FftNum + FromPrimitive + ToPrimitive + Sum<T> + Default {}

/// Wrap an angle to the half-open interval `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut x = a % two_pi;
    if x > T::pi() {
        x -= two_pi;
    } else if x <= -T::pi() {
        x += two_pi;
    }
    x
}
