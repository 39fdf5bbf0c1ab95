//! Spike-polarity logic: three-level encoding, spike programs and the five
//! gates built from standard and inverted triggers.

mod gates;

pub use gates::{
    half_adder, make_gate, run_gate, truth_table, truth_table_programs, verify_truth_table,
    GateKind, GateMode, GateReading, GateRun, GateRunOptions, HalfAdderRun, TruthRow, GATE_DT,
};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::device::DEFAULT_TAU;
use crate::error::{Error, Result};
use crate::graph::Stimulus;

/// Current levels for logic 0, rest and logic 1, and the spike length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Encoding {
    #[serde(rename = "level0_pA")]
    pub level0: f64,
    #[serde(rename = "rest_pA")]
    pub rest: f64,
    #[serde(rename = "level1_pA")]
    pub level1: f64,
    #[serde(rename = "pulse_width_s")]
    pub pulse_width: f64,
}

impl Default for Encoding {
    fn default() -> Self {
        Encoding {
            level0: 0.0,
            rest: 250.0,
            level1: 500.0,
            pulse_width: 5e-3,
        }
    }
}

/// Decoded value of an output current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    Zero,
    One,
    Undefined,
}

impl Logic {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Logic::One
        } else {
            Logic::Zero
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Logic::Zero => Some(false),
            Logic::One => Some(true),
            Logic::Undefined => None,
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logic::Zero => "0",
            Logic::One => "1",
            Logic::Undefined => "x",
        })
    }
}

impl Encoding {
    pub fn validate(&self) -> Result<()> {
        let all = [self.level0, self.rest, self.level1, self.pulse_width];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("encoding"));
        }
        if !(0.0 <= self.level0 && self.level0 < self.rest && self.rest < self.level1) {
            return Err(Error::InvalidConfig(format!(
                "encoding needs 0 <= level0 < rest < level1 ({}, {}, {})",
                self.level0, self.rest, self.level1
            )));
        }
        if !(self.pulse_width > 0.0) {
            return Err(Error::InvalidConfig("pulse width must be positive".into()));
        }
        Ok(())
    }

    /// Upper edge of the logic-0 band.
    pub fn low_band(&self) -> f64 {
        0.5 * (self.level0 + self.rest)
    }

    /// Lower edge of the logic-1 band.
    pub fn high_band(&self) -> f64 {
        0.5 * (self.rest + self.level1)
    }

    pub fn decode(&self, i: f64) -> Logic {
        if i < self.low_band() {
            Logic::Zero
        } else if i > self.high_band() {
            Logic::One
        } else {
            Logic::Undefined
        }
    }

    pub fn level(&self, p: Polarity) -> f64 {
        match p {
            Polarity::Pos => self.level1,
            Polarity::Neg => self.level0,
        }
    }

    /// Smallest spacing between spikes on one input.
    pub fn min_separation(&self, max_tau: f64) -> f64 {
        self.pulse_width + 10.0 * max_tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Polarity {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
}

impl Polarity {
    pub const BOTH: [Polarity; 2] = [Polarity::Neg, Polarity::Pos];

    pub fn as_bool(self) -> bool {
        self == Polarity::Pos
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Pos => "+",
            Polarity::Neg => "-",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "pos" => Ok(Polarity::Pos),
            "-" | "neg" => Ok(Polarity::Neg),
            _ => Err(Error::InvalidConfig(format!(
                "unknown polarity `{s}` (expected + or -)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpikeEvent {
    #[serde(rename = "time_s")]
    pub time: f64,
    pub polarity: Polarity,
}

impl SpikeEvent {
    pub fn new(time: f64, polarity: Polarity) -> Self {
        SpikeEvent { time, polarity }
    }
}

/// Spikes on one input, in time order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpikeProgram {
    pub events: Vec<SpikeEvent>,
}

impl SpikeProgram {
    pub fn new(events: Vec<SpikeEvent>) -> Self {
        SpikeProgram { events }
    }

    pub fn single(time: f64, polarity: Polarity) -> Self {
        Self::new(vec![SpikeEvent::new(time, polarity)])
    }

    pub fn last_polarity(&self) -> Option<Polarity> {
        self.events.last().map(|e| e.polarity)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.events.last().map(|e| e.time)
    }

    /// Events must be non-negative, sorted and at least `min_gap` apart.
    pub fn validate(&self, min_gap: f64) -> Result<()> {
        for e in &self.events {
            if !e.time.is_finite() {
                return Err(Error::NonFinite("spike time"));
            }
            if e.time < 0.0 {
                return Err(Error::Stimulus(format!(
                    "spike at negative time {} s",
                    e.time
                )));
            }
        }
        for w in self.events.windows(2) {
            let (a, b) = (w[0].time, w[1].time);
            if b - a < min_gap * (1.0 - 1e-9) {
                return Err(Error::SpikeSeparation {
                    first: a,
                    second: b,
                    min_gap,
                });
            }
        }
        Ok(())
    }
}

/// Piecewise-constant input current: rest, with each spike held at its
/// polarity's level for one pulse width.
pub fn render_stimulus(program: &SpikeProgram, enc: &Encoding, max_tau: f64) -> Result<Stimulus> {
    enc.validate()?;
    program.validate(enc.min_separation(max_tau))?;
    let mut changes = Vec::with_capacity(2 * program.events.len());
    for e in &program.events {
        changes.push((e.time, enc.level(e.polarity)));
        changes.push((e.time + enc.pulse_width, enc.rest));
    }
    Ok(Stimulus::PiecewiseConstant {
        initial: enc.rest,
        changes,
    })
}

/// [`render_stimulus`] for triggers with the default time constants.
pub fn render_default(program: &SpikeProgram, enc: &Encoding) -> Result<Stimulus> {
    render_stimulus(program, enc, DEFAULT_TAU)
}
