//! Scalar abstractions.
//!
//! Bernstein arithmetic only needs ring operations, so it is written against
//! [`Scalar`] and works for exact rationals as well as floats. Everything that
//! pivots, takes square roots or compares magnitudes uses [`Real`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Ring-like scalar: enough for evaluation and differentiation of polynomials.
pub trait Scalar: Num + Copy + FromPrimitive + ToPrimitive + PartialOrd + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Num + Copy + FromPrimitive + ToPrimitive + PartialOrd + Debug + Send + Sync + 'static {}

/// Floating point scalar (`f32` or `f64`).
pub trait Real: Scalar + Float + FloatConst + Sum + Display + LowerExp {}

impl<T> Real for T where T: Scalar + Float + FloatConst + Sum + Display + LowerExp {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: FromPrimitive>(x: f64) -> T {
    T::from_f64(x).expect("literal not representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: FromPrimitive>(n: usize) -> T {
    T::from_usize(n).expect("count not representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn max_abs<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |m, v| m.max(v.abs()))
}
