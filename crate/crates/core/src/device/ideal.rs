use serde::Serialize;

use super::params::{Calibration, SchmittParams, SchmittTrigger, Thresholds};
use crate::error::Result;
use crate::units::Current;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Branch {
    Low,
    High,
}

/// Memory of one trigger.
///
/// The ideal model only reads `branch`; the smooth model integrates `i_fb`
/// and `i_out` and derives `branch` from them. `undefined` stays set until
/// the input has crossed one of the two thresholds at least once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmittState {
    pub branch: Branch,
    pub i_fb: f64,
    pub i_out: f64,
    pub undefined: bool,
}

impl SchmittState {
    pub const LOW: SchmittState = SchmittState {
        branch: Branch::Low,
        i_fb: 0.0,
        i_out: 0.0,
        undefined: false,
    };

    /// Low state that has not seen any threshold crossing yet.
    pub fn fresh() -> Self {
        SchmittState {
            undefined: true,
            ..Self::LOW
        }
    }

    pub fn high(th: &Thresholds) -> Self {
        SchmittState {
            branch: Branch::High,
            i_fb: th.hyst_width,
            i_out: th.high_level,
            undefined: false,
        }
    }

    pub fn is_high(&self) -> bool {
        self.branch == Branch::High
    }
}

impl Thresholds {
    /// One update of the discrete-state trigger.
    pub fn step(&self, i_in: f64, state: &SchmittState) -> (SchmittState, Current) {
        let branch = if i_in > self.i_th_high {
            Branch::High
        } else if i_in < self.i_th_low {
            Branch::Low
        } else {
            state.branch
        };
        let crossed = i_in > self.i_th_high || i_in < self.i_th_low;
        let next = match branch {
            Branch::High => SchmittState::high(self),
            Branch::Low => SchmittState::LOW,
        };
        let next = SchmittState {
            undefined: state.undefined && !crossed,
            ..next
        };
        let out = match branch {
            Branch::High => Current::clamped(self.high_level),
            Branch::Low => Current::ZERO,
        };
        (next, out)
    }
}

impl SchmittTrigger {
    pub fn ideal_step(&self, i_in: f64, state: &SchmittState) -> (SchmittState, Current) {
        self.thresholds().step(i_in, state)
    }
}

/// Discrete-state trigger update from raw bias currents and a calibration.
pub fn ideal_step(
    params: &SchmittParams,
    cal: &Calibration,
    i_in: f64,
    state: &SchmittState,
) -> Result<(SchmittState, Current)> {
    let th = super::schmitt_thresholds(params, cal)?;
    Ok(th.step(i_in, state))
}

/// Output of the inverted trigger: `high_level - i_out`.
///
/// The second value is true when `i_out` exceeded `high_level` and the result
/// was clamped to zero.
pub fn inverted_output(i_out: Current, high_level: f64) -> (Current, bool) {
    let v = high_level - i_out.pa();
    (Current::clamped(v), v < 0.0)
}
