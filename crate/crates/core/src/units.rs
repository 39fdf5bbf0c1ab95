use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A current in picoamperes.
///
/// Everything observable in the unipolar current domain is nonnegative, so a
/// `Current` can only be built from a finite value `>= 0`. Internal state
/// variables that may transiently leave that range are plain `f64`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Current(f64);

impl Current {
    pub const ZERO: Current = Current(0.0);

    pub fn new(pa: f64) -> Result<Self> {
        if !pa.is_finite() {
            return Err(Error::NonFinite("current"));
        }
        if pa < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "negative current {pa} pA in a unipolar domain"
            )));
        }
        Ok(Current(pa))
    }

    /// Clamp at zero. NaN maps to zero.
    pub fn clamped(pa: f64) -> Self {
        if pa > 0.0 {
            Current(pa)
        } else {
            Current(0.0)
        }
    }

    #[inline]
    pub fn pa(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Current {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} pA", self.0)
    }
}

impl Serialize for Current {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
