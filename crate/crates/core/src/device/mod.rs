//! Behavioral device models.
//!
//! A trigger is two coupled thresholding elements: the forward element turns
//! the summed input into the output current, and the feedback element injects
//! `width` back into the input once the output is high, which lowers the
//! effective switching point from `thresh` to `thresh - width`.
//!
//! Two evaluation forms are provided. The ideal form is a two-state machine
//! with sharp thresholds. The smooth form replaces both thresholds with a
//! logistic of steepness `k` and gives each branch a first-order lag, which
//! makes the trigger integrable in time.

mod ideal;
mod params;
mod smooth;

pub use ideal::{ideal_step, inverted_output, Branch, SchmittState};
pub use params::{
    schmitt_thresholds, Calibration, DynamicsConfig, Effective, SchmittParams, SchmittTrigger,
    Thresholds, BASELINE_GAIN, BASELINE_THRESH, BASELINE_WIDTH, DEFAULT_TAU, REFERENCE_TEMPERATURE,
};
pub use smooth::{
    fixed_points, settle_smooth, smooth_equilibria, smooth_rhs, Equilibrium, FixedPoint,
    SmoothDerivatives,
};

use crate::error::{Error, Result};
use crate::units::{logistic, Current};

/// Smooth tunable Heaviside element: `gain · σ(k · u)`.
pub fn heaviside_smooth(u: f64, gain: f64, k: f64) -> Result<Current> {
    if !u.is_finite() {
        return Err(Error::NonFinite("u"));
    }
    if !gain.is_finite() || !k.is_finite() {
        return Err(Error::NonFinite("heaviside parameter"));
    }
    if gain < 0.0 || k <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "heaviside needs gain >= 0 and k > 0 (gain={gain}, k={k})"
        )));
    }
    Ok(Current::clamped(gain * logistic(k * u)))
}
