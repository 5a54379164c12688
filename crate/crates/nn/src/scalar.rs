use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, NumAssign};
use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar the kernels are generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + SampleUniform
    + ScalarOperand
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f64 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Lift an `f64` constant into the generic scalar type.
#[inline]
pub fn c<S: Scalar>(v: f64) -> S {
    S::from(v).expect("f64 constant convertible to scalar")
}

/// Lower a scalar to `f64` (exact for f32/f64).
#[inline]
pub fn lower<S: Scalar>(v: S) -> f64 {
    v.to_f64().expect("scalar convertible to f64")
}
