use serde::Serialize;

use super::hysteresis::single_trigger_network;
use crate::device::SchmittTrigger;
use crate::error::Result;
use crate::graph::{run_transient, Stimulus};

/// Peak excursion above `settled` after the output first crosses half of it.
///
/// `None` when `settled` is not positive or the series never makes a
/// low-to-high transition.
pub fn measure_overshoot(series: &[f64], settled: f64) -> Option<f64> {
    if !(settled > 0.0) {
        return None;
    }
    let half = 0.5 * settled;
    if series.first().is_none_or(|&v| v >= half) {
        return None;
    }
    let cross = series.iter().position(|&v| v >= half)?;
    let peak = series[cross..].iter().copied().fold(f64::MIN, f64::max);
    Some(((peak - settled) / settled).max(0.0))
}

fn crossing(series: &[f64], from: usize, level: f64, dt: f64) -> Option<(usize, f64)> {
    let i = from + series[from..].iter().position(|&v| v >= level)?;
    if i == 0 {
        return Some((0, 0.0));
    }
    let (a, b) = (series[i - 1], series[i]);
    let frac = if b > a { (level - a) / (b - a) } else { 1.0 };
    Some((i, (i as f64 - 1.0 + frac) * dt))
}

/// 10 % to 90 % rise time of a step response sampled every `dt` seconds.
///
/// The step runs from the first sample to the last. `None` if the series
/// does not rise or has not settled by its final 5 %.
pub fn measure_rise_time(series: &[f64], dt: f64) -> Option<f64> {
    let (&first, &last) = (series.first()?, series.last()?);
    let amp = last - first;
    if !(amp > 0.0) || series.len() < 20 {
        return None;
    }
    let tail = &series[series.len() - series.len() / 20..];
    if tail.iter().any(|v| (v - last).abs() > 0.01 * amp) {
        return None;
    }
    let (i10, t10) = crossing(series, 0, first + 0.1 * amp, dt)?;
    let (_, t90) = crossing(series, i10, first + 0.9 * amp, dt)?;
    Some(t90 - t10)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepResponse {
    pub dt: f64,
    /// Output from the step instant on.
    pub output: Vec<f64>,
    #[serde(rename = "settled_pA")]
    pub settled: f64,
    pub overshoot: Option<f64>,
    #[serde(rename = "rise_time_s")]
    pub rise_time: Option<f64>,
}

/// Step the input of a single trigger from `from` to `to` pA and observe
/// the output for `duration` seconds.
pub fn step_response(
    trig: &SchmittTrigger,
    from: f64,
    to: f64,
    duration: f64,
    dt: f64,
) -> Result<StepResponse> {
    let net = single_trigger_network(trig);
    let lead = 20.0 * dt;
    let stim = Stimulus::Step { from, to, at: lead };
    let tr = run_transient(&net, &[("in", stim)], lead + duration, dt)?;
    let skip = (lead / dt).round() as usize;
    let output = tr.series("out").expect("probe recorded")[skip..].to_vec();
    let settled = *output.last().expect("non-empty trace");
    Ok(StepResponse {
        dt,
        overshoot: measure_overshoot(&output, settled),
        rise_time: measure_rise_time(&output, dt),
        settled,
        output,
    })
}

/// Step from low rest to 50 pA above the upper threshold.
pub fn default_step_response(trig: &SchmittTrigger) -> Result<StepResponse> {
    let to = trig.thresholds().i_th_high + 50.0;
    let duration = 60.0 * trig.dynamics.max_tau();
    let dt = (trig.dynamics.min_tau() / 200.0).min(1e-6);
    step_response(trig, 0.0, to, duration, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DynamicsConfig;

    fn with(dy: DynamicsConfig) -> SchmittTrigger {
        SchmittTrigger::baseline().with_dynamics(dy).unwrap()
    }

    #[test]
    fn synthetic_monotone_has_no_overshoot() {
        let s: Vec<f64> = (0..100)
            .map(|i| 500.0 * (1.0 - (-(i as f64) / 10.0).exp()))
            .collect();
        assert_eq!(measure_overshoot(&s, 500.0), Some(0.0));
    }

    #[test]
    fn no_transition_is_not_applicable() {
        assert_eq!(measure_overshoot(&[0.0; 50], 500.0), None);
        assert_eq!(measure_overshoot(&[500.0; 50], 500.0), None);
        assert_eq!(measure_rise_time(&[1.0; 50], 1e-6), None);
        // still rising at the end
        let ramp: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(measure_rise_time(&ramp, 1e-6), None);
    }

    #[test]
    fn first_order_rise_time() {
        // 10-90 % of 1 - exp(-t/τ) is τ ln 9
        let tau = 1e-3;
        let dt = 1e-6;
        let s: Vec<f64> = (0..20_000)
            .map(|i| 1.0 - (-(i as f64) * dt / tau).exp())
            .collect();
        let r = measure_rise_time(&s, dt).unwrap();
        assert!((r - tau * 9f64.ln()).abs() < 2e-6, "{r}");
    }

    #[test]
    fn uncoupled_trigger_is_first_order() {
        let t = with(DynamicsConfig {
            overshoot_coupling: 0.0,
            ..DynamicsConfig::default()
        });
        let r = default_step_response(&t).unwrap();
        assert!(r.overshoot.unwrap() < 0.005);
        let expect = 159e-6 * 9f64.ln();
        assert!((r.rise_time.unwrap() - expect).abs() < 0.15 * expect);
    }

    #[test]
    fn default_step_overshoots_about_ten_percent() {
        let r = default_step_response(&SchmittTrigger::baseline()).unwrap();
        let os = r.overshoot.unwrap();
        assert!((0.05..=0.15).contains(&os), "{os}");
        let rt = r.rise_time.unwrap();
        assert!((200e-6..=400e-6).contains(&rt), "{rt}");
        assert!((r.settled - 500.0).abs() < 0.5);
    }

    #[test]
    fn halving_tau_halves_rise_time() {
        let full = default_step_response(&SchmittTrigger::baseline()).unwrap();
        let half = default_step_response(&with(DynamicsConfig {
            tau_fb: 159e-6 / 2.0,
            tau_out: 159e-6 / 2.0,
            ..DynamicsConfig::default()
        }))
        .unwrap();
        let ratio = half.rise_time.unwrap() / full.rise_time.unwrap();
        assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    }
}
