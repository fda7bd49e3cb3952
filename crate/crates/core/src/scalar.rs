//! Scalar abstraction for the closed-form geometry.
//!
//! The arc, circle, Möbius and de Sitter primitives are written against
//! [`Real`] so they run in `f32` for quick previews and `f64` everywhere
//! else. The cluster-level numerics (Jacobians, SVD, eigen-decompositions)
//! are `f64` only.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar usable by the geometry kernels: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Machine epsilon as `f64`, used to scale tolerances to the type.
    fn eps_f64() -> f64;
}

impl Real for f32 {
    fn eps_f64() -> f64 {
        f32::EPSILON as f64
    }
}

impl Real for f64 {
    fn eps_f64() -> f64 {
        f64::EPSILON
    }
}
