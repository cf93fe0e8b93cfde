//! The real scalar type every estimator is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// floating point: f32 or f64
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute tolerance used for ordering checks between log-domain estimates.
    ///
    /// Never tighter than `1e-10`; widened for low-precision scalars so that
    /// rounding in prefix sums cannot trip a check.
    fn chain_tolerance() -> Self {
        let floor = Self::lit(1e-10);
        let scaled = Self::epsilon() * Self::lit(4096.0);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn cis<T: Real>(log_magnitude: T, phase: T) -> Complex<T> {
    Complex::from_polar(log_magnitude.exp(), phase)
}
