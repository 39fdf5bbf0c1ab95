use serde::Serialize;

use crate::device::SchmittTrigger;
use crate::error::{Error, Result};
use crate::graph::{build_network, eval_dc, Block, EvalMode, Net, Network, NetworkState};

/// Default bisection width for switching points (pA).
pub const DEFAULT_TOL: f64 = 1e-3;

/// Up-then-down DC sweep of one source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DcSweep {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub mode: EvalMode,
    /// Switching points are bisected until the bracket is narrower than this.
    pub tol: f64,
}

impl DcSweep {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let s = DcSweep {
            lo,
            hi,
            steps,
            mode: EvalMode::Ideal,
            tol: DEFAULT_TOL,
        };
        s.validate()?;
        Ok(s)
    }

    /// A sweep from 0 comfortably past the trigger's upper threshold.
    pub fn covering(trig: &SchmittTrigger) -> Self {
        let th = trig.thresholds();
        DcSweep {
            lo: 0.0,
            hi: (1.25 * th.i_th_high + 50.0).max(500.0),
            steps: 200,
            mode: EvalMode::Ideal,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::NonFinite("sweep bound"));
        }
        if self.lo < 0.0 || self.lo >= self.hi {
            return Err(Error::InvalidConfig(format!(
                "sweep needs 0 <= lo < hi (lo={}, hi={})",
                self.lo, self.hi
            )));
        }
        if self.steps < 10 {
            return Err(Error::InvalidConfig(format!(
                "sweep needs at least 10 steps, got {}",
                self.steps
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(
                "bisection tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    fn grid(&self) -> impl DoubleEndedIterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / self.steps as f64;
        (0..=self.steps).map(move |i| {
            if i == self.steps {
                self.hi
            } else {
                self.lo + step * i as f64
            }
        })
    }
}

/// Extracted switching characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HysteresisMetrics {
    #[serde(rename = "i_th_high_pA")]
    pub i_th_high: Option<f64>,
    #[serde(rename = "i_th_low_pA")]
    pub i_th_low: Option<f64>,
    #[serde(rename = "hyst_width_pA")]
    pub hyst_width: Option<f64>,
    #[serde(rename = "high_level_pA")]
    pub high_level: Option<f64>,
    pub bistable: bool,
}

impl HysteresisMetrics {
    pub const NOT_BISTABLE: HysteresisMetrics = HysteresisMetrics {
        i_th_high: None,
        i_th_low: None,
        hyst_width: None,
        high_level: None,
        bistable: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "i_in_pA")]
    pub i_in: f64,
    #[serde(rename = "out_pA")]
    pub out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcSweepResult {
    pub metrics: HysteresisMetrics,
    pub up: Vec<SweepPoint>,
    pub down: Vec<SweepPoint>,
}

struct Probe<'a> {
    net: &'a Network,
    values: Vec<f64>,
    swept: usize,
    probe: usize,
    mode: EvalMode,
}

impl Probe<'_> {
    fn eval(&mut self, x: f64, state: &NetworkState) -> Result<(f64, NetworkState)> {
        self.values[self.swept] = x;
        let (v, s) = eval_dc(self.net, &self.values, state, self.mode)?;
        Ok((v.at(self.probe).pa(), s))
    }

    /// Narrow `[a, b]` around the point where `crossed` flips, always
    /// stepping from the state held just before the crossing.
    fn bisect(
        &mut self,
        mut a: f64,
        mut b: f64,
        from: &NetworkState,
        tol: f64,
        crossed: impl Fn(f64) -> bool,
    ) -> Result<f64> {
        while (b - a).abs() > tol {
            let m = 0.5 * (a + b);
            let (out, _) = self.eval(m, from)?;
            if crossed(out) {
                b = m;
            } else {
                a = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Hysteresis sweep of `source` observed at block `probe`, with all other
/// sources held at `base` (in [`Network::source_ids`] order).
pub fn dc_sweep_network(
    net: &Network,
    source: &str,
    probe: &str,
    base: &[f64],
    sweep: &DcSweep,
) -> Result<DcSweepResult> {
    sweep.validate()?;
    let src_idx = net
        .position(source)
        .ok_or_else(|| Error::UnknownBlock(source.into()))?;
    let swept = net
        .source_positions()
        .iter()
        .position(|&i| i == src_idx)
        .ok_or_else(|| Error::InvalidConfig(format!("`{source}` is not a source")))?;
    let probe = net
        .position(probe)
        .ok_or_else(|| Error::UnknownBlock(probe.into()))?;
    let mut values = base.to_vec();
    values.resize(net.source_positions().len(), 0.0);
    let mut p = Probe {
        net,
        values,
        swept,
        probe,
        mode: sweep.mode,
    };

    let mut state = net.initial_state();
    let mut up = Vec::with_capacity(sweep.steps + 1);
    let mut up_states = Vec::with_capacity(sweep.steps + 1);
    for x in sweep.grid() {
        let (out, s) = p.eval(x, &state)?;
        up.push(SweepPoint { i_in: x, out });
        up_states.push(s.clone());
        state = s;
    }
    let mut down = Vec::with_capacity(sweep.steps + 1);
    let mut down_states = Vec::with_capacity(sweep.steps + 1);
    for x in sweep.grid().rev() {
        let (out, s) = p.eval(x, &state)?;
        down.push(SweepPoint { i_in: x, out });
        down_states.push(s.clone());
        state = s;
    }

    let high = up.last().map(|pt| pt.out).unwrap_or(0.0);
    if !(high > 1e-9) {
        return Ok(DcSweepResult {
            metrics: HysteresisMetrics::NOT_BISTABLE,
            up,
            down,
        });
    }
    let level = 0.5 * high;

    let mut th_high = None;
    if up[0].out <= level {
        if let Some(i) = up.iter().position(|pt| pt.out > level) {
            th_high = Some(p.bisect(
                up[i - 1].i_in,
                up[i].i_in,
                &up_states[i - 1],
                sweep.tol,
                |o| o > level,
            )?);
        }
    }
    let mut th_low = None;
    if down[0].out > level {
        if let Some(i) = down.iter().position(|pt| pt.out <= level) {
            th_low = Some(p.bisect(
                down[i - 1].i_in,
                down[i].i_in,
                &down_states[i - 1],
                sweep.tol,
                |o| o <= level,
            )?);
        }
    }

    let bistable = match (th_high, th_low) {
        (Some(h), Some(l)) => h - l > 2.0 * sweep.tol,
        _ => false,
    };
    let metrics = HysteresisMetrics {
        i_th_high: th_high,
        i_th_low: th_low,
        hyst_width: th_high.zip(th_low).map(|(h, l)| h - l),
        high_level: Some(high),
        bistable,
    };
    Ok(DcSweepResult { metrics, up, down })
}

/// One source → one trigger → one probe.
pub fn single_trigger_network(trig: &SchmittTrigger) -> Network {
    build_network(
        vec![
            Block::source("in"),
            Block::schmitt("st", *trig),
            Block::probe("out"),
        ],
        &[Net::new("in", "st"), Net::new("st", "out")],
    )
    .expect("single-trigger network is valid")
}

pub fn dc_sweep(trig: &SchmittTrigger, sweep: &DcSweep) -> Result<DcSweepResult> {
    dc_sweep_network(&single_trigger_network(trig), "in", "out", &[0.0], sweep)
}

/// Switching thresholds, width and high level of a single trigger.
pub fn dc_hysteresis(trig: &SchmittTrigger, sweep: &DcSweep) -> Result<HysteresisMetrics> {
    dc_sweep(trig, sweep).map(|r| r.metrics)
}
