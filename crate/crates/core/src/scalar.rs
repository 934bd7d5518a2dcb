//! Scalar abstraction shared by the kinematics and model-evaluation layers.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point type the tensor and constitutive code is generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
