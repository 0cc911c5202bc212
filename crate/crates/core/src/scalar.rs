use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar used by the generic special-function and grid code.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalars the polar grid can run FFTs in.
pub trait GridScalar: Real + rustfft::FftNum {}

impl<T: Real + rustfft::FftNum> GridScalar for T {}
