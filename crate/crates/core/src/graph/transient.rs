use serde::Serialize;

use super::dc::{eval_dc, EvalMode, NetworkState};
use super::{BlockKind, Network, Stimulus};
use crate::device::{smooth_rhs, Branch, SchmittState, SchmittTrigger};
use crate::error::{Error, Result};
use crate::units::logistic;

/// Largest admissible step for a network: `min τ / 20` over its triggers.
pub fn stability_bound(net: &Network) -> f64 {
    net.triggers()
        .map(|t| t.dynamics.min_tau() / 20.0)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy)]
struct TriggerSlot {
    block: usize,
    trig: SchmittTrigger,
    inverted: bool,
    th_high: f64,
    th_low: f64,
    high_level: f64,
}

/// Fixed-step RK4 integrator over a network.
///
/// Sources are sampled at the start of each step and held over it. Block
/// currents are recomputed algebraically at every stage from the trigger
/// states.
pub struct Simulator<'a> {
    net: &'a Network,
    stimuli: Vec<Stimulus>,
    dt: f64,
    steps: u64,
    slot_of: Vec<Option<usize>>,
    slots: Vec<TriggerSlot>,
    y: Vec<f64>,
    undefined: Vec<bool>,
    nodes: Vec<f64>,
    src: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a> Simulator<'a> {
    /// Start from the fresh low state settled at the `t = 0` source values.
    pub fn new(net: &'a Network, stimuli: &[(&str, Stimulus)], dt: f64) -> Result<Self> {
        Self::with_state(net, stimuli, dt, &net.initial_state())
    }

    pub fn with_state(
        net: &'a Network,
        stimuli: &[(&str, Stimulus)],
        dt: f64,
        initial: &NetworkState,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "time step {dt} must be positive"
            )));
        }
        let bound = stability_bound(net);
        if dt > bound * (1.0 + 1e-9) {
            return Err(Error::StepTooLarge { dt, bound });
        }

        let mut per_source = vec![Stimulus::constant(0.0); net.sources.len()];
        for (id, stim) in stimuli {
            let idx = net
                .position(id)
                .ok_or_else(|| Error::UnknownBlock(id.to_string()))?;
            let pos = net
                .sources
                .iter()
                .position(|&s| s == idx)
                .ok_or_else(|| Error::Stimulus(format!("`{id}` is not a source block")))?;
            stim.validate()?;
            per_source[pos] = stim.clone();
        }

        let mut slot_of = vec![None; net.blocks.len()];
        let mut slots = Vec::new();
        for (i, b) in net.blocks.iter().enumerate() {
            if let Some(trig) = b.kind.trigger() {
                let th = trig.thresholds();
                slot_of[i] = Some(slots.len());
                slots.push(TriggerSlot {
                    block: i,
                    trig: *trig,
                    inverted: matches!(b.kind, BlockKind::InvSchmitt(_)),
                    th_high: th.i_th_high,
                    th_low: th.i_th_low,
                    high_level: th.high_level,
                });
            }
        }

        // start on the equilibrium continuous with the requested state
        let src0: Vec<f64> = per_source.iter().map(|s| s.value_at(0.0)).collect();
        let (_, settled) = eval_dc(net, &src0, initial, EvalMode::Smooth)?;
        let mut y = vec![0.0; 2 * slots.len()];
        let mut undefined = vec![false; slots.len()];
        for (s, slot) in slots.iter().enumerate() {
            let st = settled
                .get(slot.block)
                .copied()
                .unwrap_or(SchmittState::LOW);
            y[2 * s] = st.i_fb;
            y[2 * s + 1] = st.i_out;
            undefined[s] = initial.get(slot.block).is_some_and(|p| p.undefined);
        }

        let n = y.len();
        let mut sim = Simulator {
            net,
            stimuli: per_source,
            dt,
            steps: 0,
            slot_of,
            slots,
            y,
            undefined,
            nodes: vec![0.0; net.blocks.len()],
            src: src0,
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
        };
        sim.refresh_nodes();
        Ok(sim)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// Block output currents at the current time, indexed by block position.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> f64 {
        self.nodes[idx]
    }

    /// True while any trigger has not yet seen a threshold crossing.
    pub fn any_undefined(&self) -> bool {
        self.undefined.iter().any(|&u| u)
    }

    /// Snapshot of the trigger states.
    pub fn state(&self) -> NetworkState {
        let mut st = self.net.initial_state();
        for (s, slot) in self.slots.iter().enumerate() {
            let i_out = self.y[2 * s + 1];
            st.set(
                slot.block,
                SchmittState {
                    branch: if i_out > 0.5 * slot.high_level {
                        Branch::High
                    } else {
                        Branch::Low
                    },
                    i_fb: self.y[2 * s],
                    i_out,
                    undefined: self.undefined[s],
                },
            );
        }
        st
    }

    fn sample_sources(&mut self, t: f64) {
        for (v, s) in self.src.iter_mut().zip(&self.stimuli) {
            *v = s.value_at(t);
        }
    }

    /// Evaluate block currents for state `y`, optionally writing derivatives.
    fn eval(
        net: &Network,
        slot_of: &[Option<usize>],
        slots: &[TriggerSlot],
        src: &[f64],
        y: &[f64],
        nodes: &mut [f64],
        mut dy: Option<&mut [f64]>,
    ) {
        for (&idx, &v) in net.sources.iter().zip(src) {
            nodes[idx] = v;
        }
        for &idx in &net.order {
            let input: f64 = net.drivers[idx].iter().map(|&d| nodes[d]).sum();
            nodes[idx] = match &net.blocks[idx].kind {
                BlockKind::Source => nodes[idx],
                BlockKind::Probe => input,
                BlockKind::Heaviside(h) => h.gain * logistic(h.k * (input - h.threshold)),
                BlockKind::Schmitt(_) | BlockKind::InvSchmitt(_) => {
                    let s = slot_of[idx].expect("trigger slot");
                    let slot = &slots[s];
                    let (i_fb, i_out) = (y[2 * s], y[2 * s + 1]);
                    if let Some(dy) = dy.as_deref_mut() {
                        let d = smooth_rhs(&slot.trig, i_fb, i_out, input);
                        dy[2 * s] = d.d_fb;
                        dy[2 * s + 1] = d.d_out;
                    }
                    let out = i_out.max(0.0);
                    if slot.inverted {
                        (slot.high_level - out).max(0.0)
                    } else {
                        out
                    }
                }
            };
        }
    }

    fn refresh_nodes(&mut self) {
        Self::eval(
            self.net,
            &self.slot_of,
            &self.slots,
            &self.src,
            &self.y,
            &mut self.nodes,
            None,
        );
        for (s, slot) in self.slots.iter().enumerate() {
            if self.undefined[s] {
                let input: f64 = self.net.drivers[slot.block]
                    .iter()
                    .map(|&d| self.nodes[d])
                    .sum();
                if input > slot.th_high || input < slot.th_low {
                    self.undefined[s] = false;
                }
            }
        }
    }

    /// Advance one step.
    #[allow(clippy::needless_range_loop)]
    pub fn step(&mut self) {
        let t = self.time();
        let h = self.dt;
        self.sample_sources(t);
        let n = self.y.len();
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = |tmp: &[f64], out: &mut [f64], nodes: &mut [f64]| {
            Self::eval(
                self.net,
                &self.slot_of,
                &self.slots,
                &self.src,
                tmp,
                nodes,
                Some(out),
            );
        };
        stage(&self.y, k1, &mut self.nodes);
        for i in 0..n {
            self.tmp[i] = self.y[i] + 0.5 * h * k1[i];
        }
        stage(&self.tmp, k2, &mut self.nodes);
        for i in 0..n {
            self.tmp[i] = self.y[i] + 0.5 * h * k2[i];
        }
        stage(&self.tmp, k3, &mut self.nodes);
        for i in 0..n {
            self.tmp[i] = self.y[i] + h * k3[i];
        }
        stage(&self.tmp, k4, &mut self.nodes);
        for i in 0..n {
            self.y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.steps += 1;
        let t1 = self.time();
        self.sample_sources(t1);
        self.refresh_nodes();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSeries {
    pub id: String,
    pub values: Vec<f64>,
}

/// Probe currents on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    /// Sample spacing (s).
    pub dt: f64,
    pub time: Vec<f64>,
    pub probes: Vec<ProbeSeries>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn series(&self, id: &str) -> Option<&[f64]> {
        self.probes
            .iter()
            .find(|p| p.id == id)
            .map(|p| p.values.as_slice())
    }
}

#[derive(Debug, Clone, Default)]
pub struct TransientOptions {
    /// Keep every n-th sample (0 and 1 keep all).
    pub record_every: usize,
    /// Block ids to record; all probe blocks when `None`.
    pub probes: Option<Vec<String>>,
    pub initial: Option<NetworkState>,
}

/// Integrate the network and record every probe block.
pub fn run_transient(
    net: &Network,
    stimuli: &[(&str, Stimulus)],
    t_stop: f64,
    dt: f64,
) -> Result<Trace> {
    run_transient_with(net, stimuli, t_stop, dt, &TransientOptions::default())
}

pub fn run_transient_with(
    net: &Network,
    stimuli: &[(&str, Stimulus)],
    t_stop: f64,
    dt: f64,
    opts: &TransientOptions,
) -> Result<Trace> {
    if !(t_stop.is_finite() && t_stop > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "t_stop {t_stop} must be positive"
        )));
    }
    let mut sim = match &opts.initial {
        Some(init) => Simulator::with_state(net, stimuli, dt, init)?,
        None => Simulator::new(net, stimuli, dt)?,
    };
    let ids: Vec<String> = match &opts.probes {
        Some(p) => p.clone(),
        None => net.probe_ids().map(String::from).collect(),
    };
    let cols = ids
        .iter()
        .map(|id| {
            net.position(id)
                .ok_or_else(|| Error::UnknownBlock(id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let steps = (t_stop / dt).round() as u64;
    let every = opts.record_every.max(1) as u64;
    let cap = (steps / every + 1) as usize;
    let mut time = Vec::with_capacity(cap);
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(cap); cols.len()];
    let mut record = |sim: &Simulator| {
        time.push(sim.time());
        for (s, &c) in series.iter_mut().zip(&cols) {
            s.push(sim.node(c).max(0.0));
        }
    };
    record(&sim);
    for n in 1..=steps {
        sim.step();
        if n % every == 0 {
            record(&sim);
        }
    }
    Ok(Trace {
        dt: dt * every as f64,
        time,
        probes: ids
            .into_iter()
            .zip(series)
            .map(|(id, values)| ProbeSeries { id, values })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::SchmittTrigger;
    use crate::graph::{build_network, Block, Net};

    fn single() -> Network {
        build_network(
            vec![
                Block::source("in"),
                Block::schmitt("st", SchmittTrigger::baseline()),
                Block::probe("out"),
            ],
            &[Net::new("in", "st"), Net::new("st", "out")],
        )
        .unwrap()
    }

    #[test]
    fn dt_guard_reports_bound() {
        let net = single();
        match run_transient(&net, &[], 1e-3, 1e-5) {
            Err(Error::StepTooLarge { bound, .. }) => {
                assert!((bound - 159e-6 / 20.0).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_stimulus_list_is_flat() {
        let net = single();
        let tr = run_transient(&net, &[], 1e-3, 5e-6).unwrap();
        assert_eq!(tr.len(), 201);
        let out = tr.series("out").unwrap();
        assert!(out.iter().all(|&v| v == out[0] && v < 1e-12));
    }

    #[test]
    fn unknown_stimulus_target() {
        let net = single();
        assert!(run_transient(&net, &[("nope", Stimulus::constant(1.0))], 1e-3, 5e-6).is_err());
        assert!(run_transient(&net, &[("st", Stimulus::constant(1.0))], 1e-3, 5e-6).is_err());
    }

    #[test]
    fn decimation_keeps_uniform_grid() {
        let net = single();
        let opts = TransientOptions {
            record_every: 10,
            ..Default::default()
        };
        let tr = run_transient_with(&net, &[], 1e-3, 5e-6, &opts).unwrap();
        assert_eq!(tr.len(), 21);
        assert!((tr.dt - 5e-5).abs() < 1e-18);
        for w in tr.time.windows(2) {
            assert!((w[1] - w[0] - tr.dt).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_rest_holds_low() {
        let net = single();
        let opts = TransientOptions {
            record_every: 1000,
            ..Default::default()
        };
        let tr = run_transient_with(
            &net,
            &[("in", Stimulus::constant(250.0))],
            10.0,
            7.5e-6,
            &opts,
        )
        .unwrap();
        assert!(tr.series("out").unwrap().iter().all(|&v| v < 1e-6));
    }
}
