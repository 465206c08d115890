//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for types that cannot hold it,
    /// which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Rounds `x` to an integer count, snapping values within `1e-6` of an
/// integer so that e.g. `1.0 * 49.999_999_9` still yields 50 samples.
pub(crate) fn snap_floor<T: Real>(x: T) -> usize {
    let xf = x.as_f64();
    if !xf.is_finite() || xf <= 0.0 {
        return 0;
    }
    let r = xf.round();
    if (xf - r).abs() < 1e-6 {
        r as usize
    } else {
        xf.floor() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_floor_tolerates_rounding() {
        assert_eq!(snap_floor(49.999_999_9_f64), 50);
        assert_eq!(snap_floor(25.5_f64), 25);
        assert_eq!(snap_floor(0.0_f64), 0);
        assert_eq!(snap_floor(-3.0_f32), 0);
    }
}
