//! Scalar abstraction for the scoring code.
//!
//! Metrics are ratios of counts, so they are written once against [`Scalar`]
//! and evaluated either in floating point (`f32`/`f64`) or exactly with
//! `Ratio<i64>` when a test needs to compare against a hand-derived fraction.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn hundred() -> Self {
        Self::from_count(100)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Num + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug {}

/// Arithmetic mean; zero for an empty input.
pub fn mean<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let total = values.iter().cloned().fold(T::zero(), |acc, v| acc + v);
    total / T::from_count(values.len())
}

/// Rounds to one decimal place, halves away from zero (scores are nonnegative,
/// so this is half-up). A small nudge absorbs binary representation error such
/// as 44.45 being stored as 44.4499...
pub fn round1(x: f64) -> f64 {
    let scaled = x * 10.0;
    let nudged = scaled + scaled.signum() * 1e-9;
    nudged.round() / 10.0
}
