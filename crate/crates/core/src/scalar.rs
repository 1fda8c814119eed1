//! Scalar abstraction used throughout the closed-form model code.
//!
//! Everything that is plain real arithmetic is written against [`Real`] so it
//! can be evaluated in `f32` or `f64`. Stochastic and dense linear-algebra
//! code (Monte Carlo, Fock-space oracle, detector statistics) is pinned to
//! `f64` where the tolerances demand it.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::FloatConst
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal or constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
