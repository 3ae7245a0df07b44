//! Scalar abstraction for the numeric core.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used by the generic math modules.
///
/// Implemented for `f32` and `f64`. Constants written as `f64` literals are
/// injected through [`Real::c`].
pub trait Real:
    Float + FromPrimitive + Debug + Display + Default + Serialize + DeserializeOwned + 'static
{
    /// Converts an `f64` constant into the scalar type.
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("constant not representable in scalar type")
    }

    /// Lossy view of the scalar as `f64`, for diagnostics.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
