//! Working-precision abstraction for the series and Padé machinery.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use crate::dd::DoubleDouble;

/// A real floating-point type usable for series construction and Padé fitting.
///
/// `UNIT_ROUNDOFF` is carried explicitly because some extended types report a
/// misleading `Float::epsilon()`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Relative rounding error of one arithmetic operation.
    const UNIT_ROUNDOFF: f64;
    /// Largest Hankel condition number accepted by the Padé fit.
    const HANKEL_COND_LIMIT: f64;
    /// Short human-readable name used in diagnostics.
    const NAME: &'static str;

    fn of(x: f64) -> Self;

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    /// Nearest `f64`.
    fn lossy(self) -> f64;
}

impl Scalar for f32 {
    const UNIT_ROUNDOFF: f64 = 5.960_464_477_539_063e-8;
    const HANKEL_COND_LIMIT: f64 = 1e3;
    const NAME: &'static str = "f32";

    fn of(x: f64) -> Self {
        x as f32
    }

    fn lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const UNIT_ROUNDOFF: f64 = 1.110_223_024_625_156_5e-16;
    const HANKEL_COND_LIMIT: f64 = 1e12;
    const NAME: &'static str = "f64";

    fn of(x: f64) -> Self {
        x
    }

    fn lossy(self) -> f64 {
        self
    }
}

impl Scalar for DoubleDouble {
    // 2^-104: a double-double carries about 106 significant bits.
    const UNIT_ROUNDOFF: f64 = 4.930_380_657_631_324e-32;
    const HANKEL_COND_LIMIT: f64 = 1e27;
    const NAME: &'static str = "double-double";

    fn of(x: f64) -> Self {
        DoubleDouble::from(x)
    }

    fn lossy(self) -> f64 {
        self.hi() + self.lo()
    }
}

/// Exact multiplication by `2^e`.
pub fn ldexp<T: Scalar>(x: T, e: i32) -> T {
    x * T::of(2.0).powi(e)
}
