//! Experiment drivers: DC hysteresis extraction, tunability sweeps,
//! Monte Carlo mismatch and step-response metrics.

mod hysteresis;
mod monte_carlo;
mod step;
mod tunability;

pub use hysteresis::{
    dc_hysteresis, dc_sweep, dc_sweep_network, single_trigger_network, DcSweep, DcSweepResult,
    HysteresisMetrics, SweepPoint, DEFAULT_TOL,
};
pub use monte_carlo::{monte_carlo, McRun, MetricSpread, MismatchDistribution, Perturbation};
pub use step::{
    default_step_response, measure_overshoot, measure_rise_time, step_response, StepResponse,
};
pub use tunability::{
    tunability_sweep, LinearityReport, TunePoint, TuneTarget, THRESH_SWEEP_WIDTH,
};
