use serde::Serialize;

use crate::error::{Error, Result};

/// Baseline bias currents of the reference operating point (pA).
pub const BASELINE_GAIN: f64 = 486.0;
pub const BASELINE_THRESH: f64 = 368.0;
pub const BASELINE_WIDTH: f64 = 216.0;

/// Reference temperature for the threshold drift knob (°C).
pub const REFERENCE_TEMPERATURE: f64 = 27.0;

fn check_finite(v: f64, what: &'static str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// The three bias currents of a trigger, in pA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmittParams {
    pub i_gain: f64,
    pub i_thresh: f64,
    pub i_width: f64,
}

impl SchmittParams {
    /// Validated constructor: all three strictly positive and `i_width < i_thresh`.
    pub fn new(i_gain: f64, i_thresh: f64, i_width: f64) -> Result<Self> {
        let p = SchmittParams {
            i_gain,
            i_thresh,
            i_width,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn baseline() -> Self {
        SchmittParams {
            i_gain: BASELINE_GAIN,
            i_thresh: BASELINE_THRESH,
            i_width: BASELINE_WIDTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite(self.i_gain, "i_gain")?;
        check_finite(self.i_thresh, "i_thresh")?;
        check_finite(self.i_width, "i_width")?;
        if self.i_gain <= 0.0 || self.i_thresh <= 0.0 || self.i_width <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "bias currents must be strictly positive (i_gain={}, i_thresh={}, i_width={})",
                self.i_gain, self.i_thresh, self.i_width
            )));
        }
        if self.i_width >= self.i_thresh {
            return Err(Error::InvalidConfig(format!(
                "bistability requires i_width < i_thresh (i_width={} pA, i_thresh={} pA)",
                self.i_width, self.i_thresh
            )));
        }
        Ok(())
    }
}

/// Systematic offsets between set bias currents and realized characteristics.
///
/// The defaults are the differences between the reference observed
/// characteristic (500/350/200 pA) and the baseline bias currents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub gain_offset: f64,
    pub thresh_offset: f64,
    pub width_offset: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            gain_offset: 500.0 - BASELINE_GAIN,
            thresh_offset: 350.0 - BASELINE_THRESH,
            width_offset: 200.0 - BASELINE_WIDTH,
        }
    }
}

impl Calibration {
    /// Zero offsets: the realized characteristic equals the bias currents.
    pub fn ideal() -> Self {
        Calibration {
            gain_offset: 0.0,
            thresh_offset: 0.0,
            width_offset: 0.0,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.gain_offset == 0.0 && self.thresh_offset == 0.0 && self.width_offset == 0.0
    }

    /// Apply the offsets and check that the result is still a bistable trigger.
    pub fn apply(&self, p: &SchmittParams) -> Result<Effective> {
        check_finite(self.gain_offset, "gain_offset")?;
        check_finite(self.thresh_offset, "thresh_offset")?;
        check_finite(self.width_offset, "width_offset")?;
        Effective::new(
            p.i_gain + self.gain_offset,
            p.i_thresh + self.thresh_offset,
            p.i_width + self.width_offset,
        )
    }
}

/// Time constants and smooth-model shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsConfig {
    /// Feedback branch time constant (s).
    pub tau_fb: f64,
    /// Output branch time constant (s).
    pub tau_out: f64,
    /// Logistic steepness of the smooth comparator (1/pA).
    pub steepness_k: f64,
    /// Strength of the feedback-derivative drive into the output branch.
    pub overshoot_coupling: f64,
    /// Upper-threshold drift (pA/°C).
    pub temp_thresh_drift: f64,
    /// Operating temperature (°C).
    pub temperature: f64,
}

/// Time constant giving a ~1 kHz small-signal bandwidth: 1 / (2π · 1 kHz).
pub const DEFAULT_TAU: f64 = 159e-6;

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            tau_fb: DEFAULT_TAU,
            tau_out: DEFAULT_TAU,
            steepness_k: 1.0,
            overshoot_coupling: 0.5,
            temp_thresh_drift: 0.0,
            temperature: REFERENCE_TEMPERATURE,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        check_finite(self.tau_fb, "tau_fb")?;
        check_finite(self.tau_out, "tau_out")?;
        check_finite(self.steepness_k, "steepness_k")?;
        check_finite(self.overshoot_coupling, "overshoot_coupling")?;
        check_finite(self.temp_thresh_drift, "temp_thresh_drift")?;
        check_finite(self.temperature, "temperature")?;
        if self.tau_fb <= 0.0 || self.tau_out <= 0.0 {
            return Err(Error::InvalidConfig(
                "time constants must be strictly positive".into(),
            ));
        }
        if self.steepness_k <= 0.0 {
            return Err(Error::InvalidConfig(
                "steepness_k must be strictly positive".into(),
            ));
        }
        if self.overshoot_coupling < 0.0 {
            return Err(Error::InvalidConfig(
                "overshoot_coupling must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn max_tau(&self) -> f64 {
        self.tau_fb.max(self.tau_out)
    }

    pub fn min_tau(&self) -> f64 {
        self.tau_fb.min(self.tau_out)
    }

    fn thresh_drift(&self) -> f64 {
        self.temp_thresh_drift * (self.temperature - REFERENCE_TEMPERATURE)
    }
}

/// Realized (offset-corrected) gain, upper threshold and feedback width, in pA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Effective {
    pub gain: f64,
    pub thresh: f64,
    pub width: f64,
}

impl Effective {
    pub fn new(gain: f64, thresh: f64, width: f64) -> Result<Self> {
        if gain <= 0.0 || width <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "effective gain and width must be positive (gain={gain} pA, width={width} pA)"
            )));
        }
        if thresh - width <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "effective lower threshold {} pA is not positive (thresh={thresh} pA, width={width} pA)",
                thresh - width
            )));
        }
        Ok(Effective {
            gain,
            thresh,
            width,
        })
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            i_th_high: self.thresh,
            i_th_low: self.thresh - self.width,
            hyst_width: self.width,
            high_level: self.gain,
        }
    }
}

/// Switching characteristic of a trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub i_th_high: f64,
    pub i_th_low: f64,
    pub hyst_width: f64,
    pub high_level: f64,
}

/// Closed-form characteristic of a trigger under a calibration.
pub fn schmitt_thresholds(params: &SchmittParams, cal: &Calibration) -> Result<Thresholds> {
    params.validate()?;
    Ok(cal.apply(params)?.thresholds())
}

/// A fully configured trigger: bias currents, calibration and dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmittTrigger {
    pub params: SchmittParams,
    pub cal: Calibration,
    pub dynamics: DynamicsConfig,
    #[serde(skip)]
    eff: Effective,
}

impl SchmittTrigger {
    pub fn new(params: SchmittParams, cal: Calibration, dynamics: DynamicsConfig) -> Result<Self> {
        params.validate()?;
        dynamics.validate()?;
        let base = cal.apply(&params)?;
        let eff = Effective::new(base.gain, base.thresh + dynamics.thresh_drift(), base.width)?;
        Ok(SchmittTrigger {
            params,
            cal,
            dynamics,
            eff,
        })
    }

    /// Baseline bias currents with the default calibration.
    pub fn baseline() -> Self {
        Self::new(
            SchmittParams::baseline(),
            Calibration::default(),
            DynamicsConfig::default(),
        )
        .expect("baseline configuration is valid")
    }

    pub fn with_calibration(&self, cal: Calibration) -> Result<Self> {
        Self::new(self.params, cal, self.dynamics)
    }

    pub fn with_params(&self, params: SchmittParams) -> Result<Self> {
        Self::new(params, self.cal, self.dynamics)
    }

    pub fn with_dynamics(&self, dynamics: DynamicsConfig) -> Result<Self> {
        Self::new(self.params, self.cal, dynamics)
    }

    /// Effective currents, including the temperature drift of the upper threshold.
    #[inline]
    pub fn effective(&self) -> &Effective {
        &self.eff
    }

    #[inline]
    pub fn thresholds(&self) -> Thresholds {
        self.eff.thresholds()
    }

    #[inline]
    pub fn high_level(&self) -> f64 {
        self.eff.gain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_calibration_is_direct_substitution() {
        let t = schmitt_thresholds(&SchmittParams::baseline(), &Calibration::ideal()).unwrap();
        assert_eq!(
            (t.i_th_high, t.i_th_low, t.hyst_width, t.high_level),
            (368.0, 152.0, 216.0, 486.0)
        );
    }

    #[test]
    fn default_calibration_hits_reference_point() {
        let t = schmitt_thresholds(&SchmittParams::baseline(), &Calibration::default()).unwrap();
        assert_eq!(
            (t.i_th_high, t.i_th_low, t.hyst_width, t.high_level),
            (350.0, 150.0, 200.0, 500.0)
        );
    }

    #[test]
    fn rejects_width_above_thresh() {
        let p = SchmittParams {
            i_gain: 486.0,
            i_thresh: 100.0,
            i_width: 216.0,
        };
        for cal in [Calibration::ideal(), Calibration::default()] {
            assert!(matches!(
                schmitt_thresholds(&p, &cal),
                Err(Error::InvalidConfig(_))
            ));
        }
        assert!(SchmittParams::new(1.0, 1.0, 1.0).is_err());
        assert!(SchmittParams::new(0.0, 10.0, 1.0).is_err());
        assert!(SchmittParams::new(f64::NAN, 10.0, 1.0).is_err());
    }

    #[test]
    fn offsets_can_break_a_valid_triple() {
        // raw triple is fine but the default width offset makes it nonpositive
        let p = SchmittParams::new(100.0, 50.0, 10.0).unwrap();
        assert!(Calibration::default().apply(&p).is_err());
        assert!(Calibration::ideal().apply(&p).is_ok());
    }

    #[test]
    fn drift_moves_upper_threshold_only() {
        let dynamics = DynamicsConfig {
            temp_thresh_drift: 0.5,
            temperature: 67.0,
            ..DynamicsConfig::default()
        };
        let t = SchmittTrigger::new(SchmittParams::baseline(), Calibration::default(), dynamics)
            .unwrap()
            .thresholds();
        assert_eq!(t.i_th_high, 370.0);
        assert_eq!(t.hyst_width, 200.0);
        assert_eq!(t.high_level, 500.0);
    }

    #[test]
    fn dynamics_validation() {
        let bad = DynamicsConfig {
            tau_fb: 0.0,
            ..DynamicsConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = DynamicsConfig {
            overshoot_coupling: -0.1,
            ..DynamicsConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
