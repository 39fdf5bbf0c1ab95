use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::hysteresis::{dc_hysteresis, DcSweep};
use crate::device::{Calibration, DynamicsConfig, SchmittParams, SchmittTrigger};
use crate::error::{Error, Result};
use crate::graph::EvalMode;

/// Which bias current is swept; each controls one metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TuneTarget {
    /// `i_gain` → high output level.
    Gain,
    /// `i_thresh` → upper switching threshold (with `i_width` = 50 pA).
    Thresh,
    /// `i_width` → hysteresis width.
    Width,
}

/// Feedback width used while sweeping the threshold.
pub const THRESH_SWEEP_WIDTH: f64 = 50.0;

impl TuneTarget {
    /// Sweep range of the reference characterisation.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            TuneTarget::Gain => (50.0, 500.0),
            TuneTarget::Thresh => (100.0, 400.0),
            TuneTarget::Width => (10.0, 300.0),
        }
    }

    fn params(self, set: f64) -> SchmittParams {
        let b = SchmittParams::baseline();
        match self {
            TuneTarget::Gain => SchmittParams { i_gain: set, ..b },
            TuneTarget::Thresh => SchmittParams {
                i_thresh: set,
                i_width: THRESH_SWEEP_WIDTH,
                ..b
            },
            TuneTarget::Width => SchmittParams { i_width: set, ..b },
        }
    }
}

impl fmt::Display for TuneTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuneTarget::Gain => "gain",
            TuneTarget::Thresh => "thresh",
            TuneTarget::Width => "width",
        })
    }
}

impl FromStr for TuneTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gain" => Ok(TuneTarget::Gain),
            "thresh" => Ok(TuneTarget::Thresh),
            "width" => Ok(TuneTarget::Width),
            _ => Err(Error::InvalidConfig(format!(
                "unknown tuning target `{s}` (expected gain, thresh or width)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TunePoint {
    #[serde(rename = "set_pA")]
    pub set: f64,
    #[serde(rename = "measured_pA")]
    pub measured: Option<f64>,
    pub rel_error: Option<f64>,
    /// Why the point could not be measured.
    pub flag: Option<String>,
}

/// Affine fit of measured against set value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearityReport {
    pub which: TuneTarget,
    pub slope: f64,
    #[serde(rename = "intercept_pA")]
    pub intercept: f64,
    pub max_rel_error: f64,
    /// Relative error at the top of the range, if that point was measured.
    pub rel_error_at_top: Option<f64>,
    /// `measured - (slope · set + intercept)`, one entry per sweep point.
    pub residuals: Vec<Option<f64>>,
    pub points: Vec<TunePoint>,
}

fn measure(which: TuneTarget, set: f64, cal: Calibration, mode: EvalMode) -> Result<f64> {
    let trig = SchmittTrigger::new(which.params(set), cal, DynamicsConfig::default())?;
    let m = dc_hysteresis(&trig, &DcSweep::covering(&trig).with_mode(mode))?;
    let v = match which {
        TuneTarget::Gain => m.high_level,
        TuneTarget::Thresh => m.i_th_high,
        TuneTarget::Width => m.hyst_width,
    };
    match v {
        Some(v) if m.bistable => Ok(v),
        _ => Err(Error::Analysis(format!(
            "no hysteresis at {which}={set} pA"
        ))),
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Sweep one bias current over `points` evenly spaced values in `[lo, hi]`.
///
/// Points whose configuration is invalid are flagged and excluded from the
/// fit; the sweep fails only if fewer than two points remain.
pub fn tunability_sweep(
    which: TuneTarget,
    lo: f64,
    hi: f64,
    points: usize,
    cal: Calibration,
    mode: EvalMode,
) -> Result<LinearityReport> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidConfig(format!(
            "tunability range needs lo < hi (lo={lo}, hi={hi})"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidConfig(
            "tunability needs at least 2 points".into(),
        ));
    }
    let pts: Vec<TunePoint> = (0..points)
        .map(|i| {
            let set = if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            };
            match measure(which, set, cal, mode) {
                Ok(v) => TunePoint {
                    set,
                    measured: Some(v),
                    rel_error: Some((v - set).abs() / set),
                    flag: None,
                },
                Err(e) => TunePoint {
                    set,
                    measured: None,
                    rel_error: None,
                    flag: Some(e.to_string()),
                },
            }
        })
        .collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) = pts
        .iter()
        .filter_map(|p| p.measured.map(|m| (p.set, m)))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::Analysis(format!(
            "{which} sweep has fewer than two valid points"
        )));
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let residuals = pts
        .iter()
        .map(|p| p.measured.map(|m| m - (slope * p.set + intercept)))
        .collect();
    let max_rel_error = pts.iter().filter_map(|p| p.rel_error).fold(0.0, f64::max);
    let rel_error_at_top = pts.last().and_then(|p| p.rel_error);
    Ok(LinearityReport {
        which,
        slope,
        intercept,
        max_rel_error,
        rel_error_at_top,
        residuals,
        points: pts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(which: TuneTarget, cal: Calibration) -> LinearityReport {
        let (lo, hi) = which.default_range();
        tunability_sweep(which, lo, hi, 16, cal, EvalMode::Ideal).unwrap()
    }

    #[test]
    fn default_calibration_top_errors() {
        // offsets +14, -18, -16 pA over 500, 400, 300 pA
        let g = run(TuneTarget::Gain, Calibration::default());
        assert!((g.rel_error_at_top.unwrap() - 0.028).abs() < 1e-4);
        let t = run(TuneTarget::Thresh, Calibration::default());
        assert!((t.rel_error_at_top.unwrap() - 0.045).abs() < 1e-4);
        let w = run(TuneTarget::Width, Calibration::default());
        assert!((w.rel_error_at_top.unwrap() - 16.0 / 300.0).abs() < 1e-4);
        for r in [&g, &t, &w] {
            assert!((r.slope - 1.0).abs() < 0.005, "{r:?}");
            assert_eq!(r.residuals.len(), r.points.len());
        }
        assert!((g.intercept - 14.0).abs() < 0.01);
        assert!((t.intercept + 18.0).abs() < 0.01);
    }

    #[test]
    fn width_bottom_is_flagged_not_fatal() {
        // 10 pA - 16 pA offset leaves no feedback current
        let w = run(TuneTarget::Width, Calibration::default());
        assert!(w.points[0].flag.is_some());
        assert_eq!(w.residuals[0], None);
        assert!(w.points[1..].iter().all(|p| p.measured.is_some()));
    }

    #[test]
    fn ideal_calibration_is_exact() {
        for which in [TuneTarget::Gain, TuneTarget::Thresh, TuneTarget::Width] {
            let r = run(which, Calibration::ideal());
            assert!(r.max_rel_error < 0.002, "{which}: {}", r.max_rel_error);
        }
    }

    #[test]
    fn gain_error_decreases_with_current() {
        let g = run(TuneTarget::Gain, Calibration::default());
        let errs: Vec<f64> = g.points.iter().map(|p| p.rel_error.unwrap()).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn bad_ranges() {
        assert!(tunability_sweep(
            TuneTarget::Gain,
            5.0,
            1.0,
            4,
            Calibration::default(),
            EvalMode::Ideal
        )
        .is_err());
        assert!("ithresh".parse::<TuneTarget>().is_err());
    }
}
