//! Scalar abstraction: the numerical core is generic over the floating type.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating scalar the solver runs on: `f64` for production runs, `f32` for
/// quick low-precision experiments.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// Lower to `f64` for reporting and serialization.
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }

    /// Lift a `usize` (vertex counts, sample sizes).
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
