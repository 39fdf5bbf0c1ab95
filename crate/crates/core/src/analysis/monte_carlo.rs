use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use super::hysteresis::{dc_hysteresis, DcSweep, HysteresisMetrics};
use crate::device::{Calibration, SchmittParams, SchmittTrigger};
use crate::error::{Error, Result};
use crate::graph::EvalMode;

/// Perturbation drawn for one run, in draw order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub d_gain: f64,
    pub d_thresh: f64,
    pub d_width: f64,
    pub d_gain_offset: f64,
    pub d_thresh_offset: f64,
    pub d_width_offset: f64,
}

impl Perturbation {
    pub const ZERO: Perturbation = Perturbation {
        d_gain: 0.0,
        d_thresh: 0.0,
        d_width: 0.0,
        d_gain_offset: 0.0,
        d_thresh_offset: 0.0,
        d_width_offset: 0.0,
    };

    /// Draws for run `run`; independent of how many other runs exist.
    pub fn draw(seed: u64, run: u64, sigma: f64) -> Self {
        if sigma == 0.0 {
            return Self::ZERO;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run);
        let n = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
        let mut d = || n.sample(&mut rng);
        Perturbation {
            d_gain: d(),
            d_thresh: d(),
            d_width: d(),
            d_gain_offset: d(),
            d_thresh_offset: d(),
            d_width_offset: d(),
        }
    }

    fn apply(&self, base: &SchmittTrigger) -> Result<SchmittTrigger> {
        let p = SchmittParams {
            i_gain: base.params.i_gain + self.d_gain,
            i_thresh: base.params.i_thresh + self.d_thresh,
            i_width: base.params.i_width + self.d_width,
        };
        let c = Calibration {
            gain_offset: base.cal.gain_offset + self.d_gain_offset,
            thresh_offset: base.cal.thresh_offset + self.d_thresh_offset,
            width_offset: base.cal.width_offset + self.d_width_offset,
        };
        SchmittTrigger::new(p, c, base.dynamics)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRun {
    pub run: usize,
    pub perturbation: Perturbation,
    pub metrics: HysteresisMetrics,
}

/// Sample standard deviation of each metric over the bistable runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSpread {
    #[serde(rename = "i_th_high_pA")]
    pub i_th_high: f64,
    #[serde(rename = "i_th_low_pA")]
    pub i_th_low: f64,
    #[serde(rename = "hyst_width_pA")]
    pub hyst_width: f64,
    #[serde(rename = "high_level_pA")]
    pub high_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MismatchDistribution {
    pub seed: u64,
    #[serde(rename = "sigma_pA")]
    pub sigma: f64,
    pub nominal: HysteresisMetrics,
    /// Ordered by run index.
    pub runs: Vec<McRun>,
    pub std: MetricSpread,
    pub retention: f64,
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Gaussian mismatch on the three bias currents and the three calibration
/// offsets of `base`, `runs` times. Runs are evaluated in parallel and are
/// bit-identical for a given `(seed, sigma, runs)`.
pub fn monte_carlo(
    base: &SchmittTrigger,
    sigma: f64,
    runs: usize,
    seed: u64,
    mode: EvalMode,
) -> Result<MismatchDistribution> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidConfig(
            "monte carlo needs at least one run".into(),
        ));
    }
    let mut sweep = DcSweep::covering(base).with_mode(mode);
    sweep.hi = base.thresholds().i_th_high + 100.0 + 8.0 * sigma;
    let nominal = dc_hysteresis(base, &sweep)?;

    let out: Vec<McRun> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let perturbation = Perturbation::draw(seed, run as u64, sigma);
            let metrics = perturbation
                .apply(base)
                .and_then(|t| dc_hysteresis(&t, &sweep))
                .unwrap_or(HysteresisMetrics::NOT_BISTABLE);
            McRun {
                run,
                perturbation,
                metrics,
            }
        })
        .collect();

    let kept: Vec<&HysteresisMetrics> = out
        .iter()
        .map(|r| &r.metrics)
        .filter(|m| m.bistable)
        .collect();
    let col = |f: fn(&HysteresisMetrics) -> Option<f64>| {
        sample_std(&kept.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
    };
    let std = MetricSpread {
        i_th_high: col(|m| m.i_th_high),
        i_th_low: col(|m| m.i_th_low),
        hyst_width: col(|m| m.hyst_width),
        high_level: col(|m| m.high_level),
    };
    Ok(MismatchDistribution {
        seed,
        sigma,
        nominal,
        retention: kept.len() as f64 / runs as f64,
        runs: out,
        std,
    })
}
