use super::compile::{Analysis, Scenario};
use crate::analysis::{
    dc_sweep_network, monte_carlo, tunability_sweep, DcSweepResult, LinearityReport,
    MismatchDistribution,
};
use crate::error::{Error, Result};
use crate::graph::{run_transient_with, Network, Trace, TransientOptions};
use crate::logic::{run_gate, GateRun};

/// Result of running a scenario's analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    DcSweep(DcSweepResult),
    Transient(Trace),
    MonteCarlo(MismatchDistribution),
    Tunability(LinearityReport),
    Gate(GateRun),
}

fn network(sc: &Scenario) -> Result<&Network> {
    sc.network
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("analysis needs a network".into()))
}

pub fn run_scenario(sc: &Scenario) -> Result<Outcome> {
    match &sc.analysis {
        Analysis::DcSweep {
            source,
            probe,
            sweep,
        } => {
            let net = network(sc)?;
            let base: Vec<f64> = net
                .source_ids()
                .map(|id| {
                    sc.stimuli
                        .iter()
                        .find(|(s, _)| s == id)
                        .map_or(0.0, |(_, st)| st.value_at(0.0))
                })
                .collect();
            dc_sweep_network(net, source, probe, &base, sweep).map(Outcome::DcSweep)
        }
        Analysis::Transient {
            t_stop,
            dt,
            record_every,
        } => {
            let net = network(sc)?;
            let opts = TransientOptions {
                record_every: *record_every,
                probes: (!sc.probes.is_empty()).then(|| sc.probes.clone()),
                initial: None,
            };
            run_transient_with(net, &sc.stimulus_refs(), *t_stop, *dt, &opts)
                .map(Outcome::Transient)
        }
        Analysis::MonteCarlo {
            trigger,
            sigma,
            runs,
            mode,
            ..
        } => monte_carlo(trigger, *sigma, *runs, sc.seed, *mode).map(Outcome::MonteCarlo),
        Analysis::Tunability {
            target,
            lo,
            hi,
            points,
            cal,
            mode,
        } => tunability_sweep(*target, *lo, *hi, *points, *cal, *mode).map(Outcome::Tunability),
        Analysis::Gate {
            kind,
            opts,
            programs,
        } => run_gate(*kind, programs, &sc.encoding, opts).map(Outcome::Gate),
    }
}
