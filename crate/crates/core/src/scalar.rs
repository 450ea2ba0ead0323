//! Floating-point scalar abstraction.
//!
//! All mode algebra, operators, field grids, and fits are generic over a
//! [`Real`] scalar so the same code runs in `f32` or `f64`. Concrete `f64`
//! aliases for the main types live at the crate root; `f64` is what the CLI
//! and the acceptance tolerances assume.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type the simulation is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant must be representable in the scalar type")
}

/// A tolerance stated for `f64`, widened to stay meaningful when the working
/// scalar is coarser (`f32`).
#[inline]
pub(crate) fn tol_scaled<T: Real>(f64_tol: f64) -> T {
    lit::<T>(f64_tol).max(T::epsilon() * lit(100.0))
}
