// SPDX-License-Identifier: Apache-2.0

//! Scalar types usable as measure weights and operator entries.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Ordered signed field-like scalars: `f32`, `f64` and exact `BigRational` all qualify.
pub trait Weight:
    Clone + Send + Sync + PartialOrd + Debug + Signed + FromPrimitive + ToPrimitive + 'static
{
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("representable count")
    }

    /// `num / den`.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Weight for T where
    T: Clone + Send + Sync + PartialOrd + Debug + Signed + FromPrimitive + ToPrimitive + 'static
{
}
