//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real scalar usable throughout the toolkit (`f32` or `f64`).
pub trait Real:
    FftNum + Float + FloatConst + Default + Display + LowerExp + Debug + Sum + FromStr
{
}

impl<T> Real for T where
    T: FftNum + Float + FloatConst + Default + Display + LowerExp + Debug + Sum + FromStr
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}

#[inline]
pub(crate) fn cast_complex<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(lit(z.re), lit(z.im))
}

#[inline]
pub(crate) fn complex_to_f64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(to_f64(z.re), to_f64(z.im))
}

/// `exp(-j 2 pi num / den)` with the exponent reduced modulo `den` first,
/// so large products of indices keep full precision.
pub(crate) fn twiddle<T: Real>(num: i64, den: usize) -> Complex<T> {
    let r = num.rem_euclid(den as i64) as f64;
    let theta = -2.0 * std::f64::consts::PI * r / den as f64;
    Complex::new(lit(theta.cos()), lit(theta.sin()))
}
