//! Scalar abstraction for the numeric core.
//!
//! All physics, fitting, and metric code is generic over [`Real`] so the
//! same formulas run in `f32` or `f64`. The CLI and file formats use the
//! `f64` aliases exported from the crate root.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar used by the dynamics, force, fitting, and metric
/// code.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal. Panics only for types that
    /// cannot represent ordinary constants, which none of the provided
    /// implementations do.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("constant not representable in scalar type")
    }

    /// Round-trip to `f64` for I/O and reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
