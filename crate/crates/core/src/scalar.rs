//! Numeric abstraction for the planner arithmetic.
//!
//! Planner formulas are sums and products of message times, so they only need
//! field operations and an ordering. Floating point (`f32`, `f64`) and exact
//! rationals (`Ratio<i64>`) both qualify.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Scalar type usable by the planner.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync
{
    /// Lossless-enough conversion of a count or bit quantity.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    /// Value in seconds as `f64`, used when handing results to the simulator.
    fn to_seconds(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn clamp_non_negative(self) -> Self {
        self.max_of(Self::zero())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Ratio<i64> {}
