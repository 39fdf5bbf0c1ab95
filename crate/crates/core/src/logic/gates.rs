use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{render_stimulus, Encoding, Logic, Polarity, SpikeProgram};
use crate::device::{Calibration, SchmittTrigger};
use crate::error::{Error, Result};
use crate::graph::ProbeSeries;
use crate::graph::{build_network, stability_bound, Block, Net, Network, Simulator, Trace};

/// Integration step for gate runs, clamped to the network's bound.
pub const GATE_DT: f64 = 7.5e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
}

impl GateKind {
    pub const ALL: [GateKind; 5] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
    ];

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a && b,
            GateKind::Or => a || b,
            GateKind::Nand => !(a && b),
            GateKind::Nor => !(a || b),
            GateKind::Xor => a != b,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
        })
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown gate `{s}` (expected and, or, nand, nor or xor)"
                ))
            })
    }
}

/// Boolean reference with `-` as 0 and `+` as 1.
pub fn truth_table(kind: GateKind) -> [(Polarity, Polarity, bool); 4] {
    let row = |a: Polarity, b: Polarity| (a, b, kind.apply(a.as_bool(), b.as_bool()));
    [
        row(Polarity::Neg, Polarity::Neg),
        row(Polarity::Neg, Polarity::Pos),
        row(Polarity::Pos, Polarity::Neg),
        row(Polarity::Pos, Polarity::Pos),
    ]
}

/// Whether the front-end triggers carry the leakage offsets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateMode {
    Ideal,
    #[default]
    Calibrated,
}

impl GateMode {
    pub fn trigger(self) -> SchmittTrigger {
        match self {
            GateMode::Ideal => SchmittTrigger::baseline()
                .with_calibration(Calibration::ideal())
                .expect("baseline is valid without offsets"),
            GateMode::Calibrated => SchmittTrigger::baseline(),
        }
    }
}

impl FromStr for GateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(GateMode::Ideal),
            "calibrated" => Ok(GateMode::Calibrated),
            _ => Err(Error::InvalidConfig(format!(
                "unknown gate mode `{s}` (expected ideal or calibrated)"
            ))),
        }
    }
}

struct Builder {
    blocks: Vec<Block>,
    nets: Vec<Net>,
    high: f64,
}

impl Builder {
    /// Two inputs, each feeding one standard and one inverted trigger.
    fn front_end(trig: SchmittTrigger, enc: &Encoding) -> Result<Self> {
        enc.validate()?;
        let th = trig.thresholds();
        if !(enc.level0 < th.i_th_low && th.i_th_low < enc.rest) {
            return Err(Error::InvalidConfig(format!(
                "encoding levels {}/{} do not straddle the lower threshold {}",
                enc.level0, enc.rest, th.i_th_low
            )));
        }
        if !(enc.rest < th.i_th_high && th.i_th_high < enc.level1) {
            return Err(Error::InvalidConfig(format!(
                "encoding levels {}/{} do not straddle the upper threshold {}",
                enc.rest, enc.level1, th.i_th_high
            )));
        }
        let mut b = Builder {
            blocks: Vec::new(),
            nets: Vec::new(),
            high: th.high_level,
        };
        for n in ["1", "2"] {
            b.blocks.push(Block::source(format!("in{n}")));
            b.blocks.push(Block::schmitt(format!("st{n}"), trig));
            b.blocks.push(Block::inv_schmitt(format!("ist{n}"), trig));
            b.nets.push(Net::new(format!("in{n}"), format!("st{n}")));
            b.nets.push(Net::new(format!("in{n}"), format!("ist{n}")));
        }
        Ok(b)
    }

    fn stage(&mut self, id: &str, from: [&str; 2], level: f64, to: &str) {
        self.blocks
            .push(Block::heaviside(id, level * self.high, self.high));
        for f in from {
            self.nets.push(Net::new(f, id));
        }
        self.nets.push(Net::new(id, to));
    }

    fn gate(&mut self, kind: GateKind, prefix: &str, out: &str) {
        self.blocks.push(Block::probe(out));
        let h = |s: &str| format!("{prefix}{s}");
        match kind {
            GateKind::And => self.stage(&h("h"), ["st1", "st2"], 1.5, out),
            GateKind::Nor => self.stage(&h("h"), ["ist1", "ist2"], 1.5, out),
            GateKind::Or => self.stage(&h("h"), ["st1", "st2"], 0.5, out),
            GateKind::Nand => self.stage(&h("h"), ["ist1", "ist2"], 0.5, out),
            GateKind::Xor => {
                self.stage(&h("h1"), ["st1", "ist2"], 1.5, out);
                self.stage(&h("h2"), ["st2", "ist1"], 1.5, out);
            }
        }
    }

    fn build(self) -> Result<Network> {
        Ok(build_network(self.blocks, &self.nets)?)
    }
}

/// Gate network with sources `in1`, `in2` and output probe `out`.
pub fn make_gate(kind: GateKind, enc: &Encoding, mode: GateMode) -> Result<Network> {
    let mut b = Builder::front_end(mode.trigger(), enc)?;
    b.gate(kind, "", "out");
    b.build()
}

fn half_adder_network(enc: &Encoding, mode: GateMode) -> Result<Network> {
    let mut b = Builder::front_end(mode.trigger(), enc)?;
    b.gate(GateKind::Xor, "sum_", "sum");
    b.gate(GateKind::And, "carry_", "carry");
    b.build()
}

/// Output read once the last event has settled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReading {
    /// Event (or start of run) this reading follows.
    #[serde(rename = "after_s")]
    pub after: f64,
    #[serde(rename = "read_s")]
    pub read: f64,
    #[serde(rename = "current_pA")]
    pub current: f64,
    pub value: Logic,
    /// Largest distance from `current` until the next event.
    #[serde(rename = "max_deviation_pA")]
    pub max_deviation: f64,
    pub held: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateRunOptions {
    pub mode: GateMode,
    /// Rest kept after the last reading, in seconds.
    pub hold: f64,
    /// Record a trace of inputs and outputs every n-th step (0 disables).
    pub record_every: usize,
}

impl Default for GateRunOptions {
    fn default() -> Self {
        GateRunOptions {
            mode: GateMode::Calibrated,
            hold: 0.05,
            record_every: 0,
        }
    }
}

/// Tolerance for an output to count as held.
const HOLD_TOL: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateRun {
    pub kind: GateKind,
    pub mode: GateMode,
    pub readings: Vec<GateReading>,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

impl GateRun {
    pub fn final_value(&self) -> Logic {
        self.readings.last().map_or(Logic::Undefined, |r| r.value)
    }

    pub fn all_held(&self) -> bool {
        self.readings.iter().all(|r| r.held)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfAdderRun {
    pub mode: GateMode,
    pub sum: Vec<GateReading>,
    pub carry: Vec<GateReading>,
}

struct Window {
    after: f64,
    read_step: u64,
    end_step: u64,
}

/// Simulate `net` and read each of `outputs` after every event.
fn read_outputs(
    net: &Network,
    programs: &[SpikeProgram; 2],
    enc: &Encoding,
    opts: &GateRunOptions,
    outputs: &[&str],
) -> Result<(Vec<Vec<GateReading>>, Option<Trace>)> {
    let max_tau = net
        .triggers()
        .map(|t| t.dynamics.max_tau())
        .fold(0.0, f64::max);
    if !(opts.hold.is_finite() && opts.hold >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "hold {} must be >= 0",
            opts.hold
        )));
    }
    let s1 = render_stimulus(&programs[0], enc, max_tau)?;
    let s2 = render_stimulus(&programs[1], enc, max_tau)?;
    let dt = GATE_DT.min(stability_bound(net));
    let mut sim = Simulator::new(net, &[("in1", s1), ("in2", s2)], dt)?;

    let settle = 20.0 * max_tau;
    let mut marks: Vec<(f64, f64)> = vec![(0.0, settle)];
    for p in programs {
        marks.extend(
            p.events
                .iter()
                .map(|e| (e.time, e.time + enc.pulse_width + settle)),
        );
    }
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    marks.dedup_by(|b, a| b.0 == a.0);
    let t_stop = marks.iter().map(|m| m.1).fold(0.0, f64::max) + opts.hold;
    let to_step = |t: f64| (t / dt - 1e-9).ceil().max(0.0) as u64;
    let total = to_step(t_stop);
    let windows: Vec<Window> = marks
        .iter()
        .enumerate()
        .map(|(i, &(after, read))| Window {
            after,
            read_step: to_step(read),
            end_step: marks.get(i + 1).map_or(total + 1, |m| to_step(m.0)),
        })
        .filter(|w| w.read_step < w.end_step)
        .collect();

    let cols = outputs
        .iter()
        .map(|id| {
            net.position(id)
                .ok_or_else(|| Error::UnknownBlock(id.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let every = opts.record_every as u64;
    let trace_ids: Vec<&str> = ["in1", "in2"]
        .into_iter()
        .chain(outputs.iter().copied())
        .collect();
    let trace_cols: Vec<usize> = trace_ids
        .iter()
        .map(|id| net.position(id).expect("gate blocks exist"))
        .collect();
    let mut time = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); trace_cols.len()];

    let mut readings: Vec<Vec<GateReading>> = vec![Vec::new(); outputs.len()];
    let mut w = 0;
    let mut open = false;
    for n in 0..=total {
        if n > 0 {
            sim.step();
        }
        if every > 0 && n % every == 0 {
            time.push(sim.time());
            for (s, &c) in series.iter_mut().zip(&trace_cols) {
                s.push(sim.node(c).max(0.0));
            }
        }
        let Some(win) = windows.get(w) else {
            continue;
        };
        if n == win.read_step {
            let undefined = sim.any_undefined();
            for (r, &c) in readings.iter_mut().zip(&cols) {
                let current = sim.node(c).max(0.0);
                r.push(GateReading {
                    after: win.after,
                    read: sim.time(),
                    current,
                    value: if undefined {
                        Logic::Undefined
                    } else {
                        enc.decode(current)
                    },
                    max_deviation: 0.0,
                    held: true,
                });
            }
            open = true;
        } else if open && n < win.end_step {
            for (r, &c) in readings.iter_mut().zip(&cols) {
                let last = r.last_mut().expect("reading open");
                let dev = (sim.node(c).max(0.0) - last.current).abs();
                if dev > last.max_deviation {
                    last.max_deviation = dev;
                    last.held = dev <= HOLD_TOL;
                }
            }
        }
        if n + 1 >= win.end_step {
            w += 1;
            open = false;
        }
    }

    let trace = (every > 0).then(|| Trace {
        dt: dt * every as f64,
        time,
        probes: trace_ids
            .into_iter()
            .zip(series)
            .map(|(id, values)| ProbeSeries {
                id: id.to_string(),
                values,
            })
            .collect(),
    });
    Ok((readings, trace))
}

/// Drive a gate with one spike program per input and read its output after
/// the start of the run and after every spike.
pub fn run_gate(
    kind: GateKind,
    programs: &[SpikeProgram; 2],
    enc: &Encoding,
    opts: &GateRunOptions,
) -> Result<GateRun> {
    let net = make_gate(kind, enc, opts.mode)?;
    let (mut r, trace) = read_outputs(&net, programs, enc, opts, &["out"])?;
    Ok(GateRun {
        kind,
        mode: opts.mode,
        readings: r.pop().expect("one output"),
        trace,
    })
}

/// XOR and AND sharing one pair of front-end triggers.
pub fn half_adder(
    programs: &[SpikeProgram; 2],
    enc: &Encoding,
    opts: &GateRunOptions,
) -> Result<HalfAdderRun> {
    let net = half_adder_network(enc, opts.mode)?;
    let (mut r, _) = read_outputs(&net, programs, enc, opts, &["sum", "carry"])?;
    let carry = r.pop().expect("carry");
    let sum = r.pop().expect("sum");
    Ok(HalfAdderRun {
        mode: opts.mode,
        sum,
        carry,
    })
}

/// One row of a simulated truth table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRow {
    pub in1: Polarity,
    pub in2: Polarity,
    pub expected: Logic,
    pub got: Logic,
    /// Output held within tolerance from the reading to the end of the run.
    pub held: bool,
    pub pass: bool,
}

/// Spike times used for truth-table runs: input 1 first, input 2 once the
/// first response has settled.
pub fn truth_table_programs(a: Polarity, b: Polarity, enc: &Encoding) -> [SpikeProgram; 2] {
    let t1 = 0.01;
    let t2 = t1 + 2.0 * (enc.pulse_width + 20.0 * crate::device::DEFAULT_TAU);
    [SpikeProgram::single(t1, a), SpikeProgram::single(t2, b)]
}

/// Simulate all four polarity combinations and compare with [`truth_table`].
pub fn verify_truth_table(
    kind: GateKind,
    enc: &Encoding,
    opts: &GateRunOptions,
) -> Result<Vec<TruthRow>> {
    truth_table(kind)
        .into_iter()
        .map(|(a, b, want)| {
            let run = run_gate(kind, &truth_table_programs(a, b, enc), enc, opts)?;
            let expected = Logic::from_bool(want);
            let got = run.final_value();
            let held = run.readings.last().is_some_and(|r| r.held);
            Ok(TruthRow {
                in1: a,
                in2: b,
                expected,
                got,
                held,
                pass: got == expected && held,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BlockKind;

    fn programs(a: Polarity, b: Polarity) -> [SpikeProgram; 2] {
        [SpikeProgram::single(0.01, a), SpikeProgram::single(0.03, b)]
    }

    fn h_thresholds(net: &Network) -> Vec<f64> {
        net.blocks()
            .iter()
            .filter_map(|b| match &b.kind {
                BlockKind::Heaviside(h) => Some(h.threshold),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn nor_topology() {
        let net = make_gate(GateKind::Nor, &Encoding::default(), GateMode::Calibrated).unwrap();
        assert_eq!(net.count_kind("schmitt"), 2);
        assert_eq!(net.count_kind("inv_schmitt"), 2);
        assert_eq!(net.count_kind("heaviside"), 1);
        assert_eq!(h_thresholds(&net), vec![750.0]);
    }

    #[test]
    fn xor_and_or_thresholds() {
        let enc = Encoding::default();
        let xor = make_gate(GateKind::Xor, &enc, GateMode::Calibrated).unwrap();
        assert_eq!(h_thresholds(&xor), vec![750.0, 750.0]);
        assert_eq!(xor.drivers_of(xor.position("out").unwrap()).len(), 2);
        let or = make_gate(GateKind::Or, &enc, GateMode::Calibrated).unwrap();
        assert_eq!(h_thresholds(&or), vec![250.0]);
    }

    #[test]
    fn truth_table_examples() {
        let lookup = |k, a, b| {
            truth_table(k)
                .into_iter()
                .find(|r| r.0 == a && r.1 == b)
                .unwrap()
                .2
        };
        use Polarity::*;
        assert!(!lookup(GateKind::Nand, Pos, Pos));
        assert!(lookup(GateKind::Nor, Neg, Neg));
        assert!(lookup(GateKind::Or, Neg, Pos));
        assert_eq!("xor".parse::<GateKind>().unwrap(), GateKind::Xor);
    }

    #[test]
    fn and_and_xor_decode() {
        use Polarity::*;
        let enc = Encoding::default();
        let opts = GateRunOptions::default();
        let run = |k, a, b| run_gate(k, &programs(a, b), &enc, &opts).unwrap();
        assert_eq!(run(GateKind::And, Pos, Pos).final_value(), Logic::One);
        assert_eq!(run(GateKind::And, Pos, Neg).final_value(), Logic::Zero);
        assert_eq!(run(GateKind::Xor, Pos, Neg).final_value(), Logic::One);
        let r = run(GateKind::Xor, Pos, Pos);
        assert_eq!(r.final_value(), Logic::Zero);
        assert!(r.all_held());
    }

    #[test]
    fn undefined_until_both_inputs_spike() {
        use Polarity::*;
        let r = run_gate(
            GateKind::Or,
            &programs(Pos, Neg),
            &Encoding::default(),
            &GateRunOptions::default(),
        )
        .unwrap();
        let v: Vec<Logic> = r.readings.iter().map(|r| r.value).collect();
        assert_eq!(v, vec![Logic::Undefined, Logic::Undefined, Logic::One]);
    }

    #[test]
    fn half_adder_rows() {
        use Polarity::*;
        let enc = Encoding::default();
        for (a, b, s, c) in [
            (Pos, Pos, Logic::Zero, Logic::One),
            (Pos, Neg, Logic::One, Logic::Zero),
            (Neg, Neg, Logic::Zero, Logic::Zero),
        ] {
            let r = half_adder(&programs(a, b), &enc, &GateRunOptions::default()).unwrap();
            assert_eq!(r.sum.last().unwrap().value, s);
            assert_eq!(r.carry.last().unwrap().value, c);
        }
    }

    #[test]
    fn trace_records_inputs() {
        let opts = GateRunOptions {
            record_every: 10,
            ..GateRunOptions::default()
        };
        let r = run_gate(
            GateKind::And,
            &programs(Polarity::Pos, Polarity::Pos),
            &Encoding::default(),
            &opts,
        )
        .unwrap();
        let tr = r.trace.unwrap();
        assert_eq!(tr.probes.len(), 3);
        assert!(tr.series("in1").unwrap().contains(&500.0));
    }
}
