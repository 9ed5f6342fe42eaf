//! Floating-point scalar abstraction: every numeric kernel in this crate is
//! generic over [`Scalar`], which `f32` and `f64` satisfy.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the library is generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum<Self>
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for lifting an `f64` literal into the generic scalar type.
#[inline]
pub(crate) fn sc<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal must convert into the scalar type")
}

/// Lifts a `usize` (counts, grid sizes) into the scalar type.
#[inline]
pub(crate) fn sc_usize<T: Scalar>(v: usize) -> T {
    T::from_usize(v).expect("usize must convert into the scalar type")
}
