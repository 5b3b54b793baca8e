use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the detectors, classifier and analytic formulas are
/// generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self;

    /// Conversion from a count.
    fn from_count(n: usize) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        n as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        n as f64
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Arithmetic mean of a slice, `None` when empty.
pub fn mean<F: Scalar>(xs: &[F]) -> Option<F> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().copied().sum::<F>() / F::from_count(xs.len()))
    }
}

/// Population standard deviation (divides by `n`).
pub fn population_std<F: Scalar>(xs: &[F]) -> Option<F> {
    let m = mean(xs)?;
    let ss: F = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    Some((ss / F::from_count(xs.len())).sqrt())
}
