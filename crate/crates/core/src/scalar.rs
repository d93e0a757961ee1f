//! Floating point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type used by the model: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Absolute slack below a threshold that still counts as "at threshold".
    ///
    /// Comparisons are made against `tol * max(1, |threshold|)`.
    const TOLERANCE: f64;

    /// Lossy conversion from an `f64` literal or parameter.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every supported scalar")
    }

    /// Lossy conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Slack used when testing `value >= threshold`.
    fn slack(threshold: Self) -> Self {
        Self::of(Self::TOLERANCE) * threshold.abs().max(Self::one())
    }

    /// `value >= threshold` up to [`Scalar::slack`].
    fn clears(value: Self, threshold: Self) -> bool {
        value >= threshold - Self::slack(threshold)
    }

    /// `cost <= budget` up to [`Scalar::slack`].
    fn within_budget(cost: Self, budget: Self) -> bool {
        cost <= budget + Self::slack(budget)
    }
}

impl Scalar for f64 {
    const TOLERANCE: f64 = 1e-12;
}

impl Scalar for f32 {
    const TOLERANCE: f64 = 1e-5;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clears_is_strict_below_slack() {
        assert!(f64::clears(0.9, 0.9));
        assert!(f64::clears(0.9 - 1e-13, 0.9));
        assert!(!f64::clears(0.9 - 1e-9, 0.9));
        // relative at large magnitudes
        assert!(f64::clears(1e6 - 1e-7, 1e6));
        assert!(!f64::clears(1e6 - 1e-5, 1e6));
    }

    #[test]
    fn f32_tolerance_is_coarser() {
        assert!(f32::clears(0.9 - 1e-6, 0.9));
        assert!(!f32::clears(0.89, 0.9));
    }
}
