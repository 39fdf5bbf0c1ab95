//! Accepted keys for every directive, in canonical order.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Current,
    Time,
    Steepness,
    Temperature,
    Drift,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Current => "a current (pA, nA, uA)",
            Dimension::Time => "a time (s, ms, us)",
            Dimension::Steepness => "a steepness (/pA)",
            Dimension::Temperature => "a temperature (C)",
            Dimension::Drift => "a drift (pA/C)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Quantity(Dimension),
    /// Bare real number.
    Number,
    /// Bare non-negative integer.
    Count,
    Ident,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub kind: ValueKind,
    pub required: bool,
}

const fn req(key: &'static str, kind: ValueKind) -> KeySpec {
    KeySpec {
        key,
        kind,
        required: true,
    }
}

const fn opt(key: &'static str, kind: ValueKind) -> KeySpec {
    KeySpec {
        key,
        kind,
        required: false,
    }
}

use Dimension::*;
use ValueKind::{Choice, Count, Ident, Number};

const fn q(d: Dimension) -> ValueKind {
    ValueKind::Quantity(d)
}

pub const CAL_CHOICES: &[&str] = &["default", "ideal"];
pub const EVAL_CHOICES: &[&str] = &["ideal", "smooth"];
pub const TARGET_CHOICES: &[&str] = &["gain", "thresh", "width"];
pub const GATE_CHOICES: &[&str] = &["and", "or", "nand", "nor", "xor"];
pub const GATE_MODE_CHOICES: &[&str] = &["ideal", "calibrated"];

pub const SCHMITT: &[KeySpec] = &[
    opt("i_gain", q(Current)),
    opt("i_thresh", q(Current)),
    opt("i_width", q(Current)),
    opt("cal", Choice(CAL_CHOICES)),
    opt("gain_offset", q(Current)),
    opt("thresh_offset", q(Current)),
    opt("width_offset", q(Current)),
    opt("tau_fb", q(Time)),
    opt("tau_out", q(Time)),
    opt("steepness_k", q(Steepness)),
    opt("overshoot_coupling", Number),
    opt("temp_thresh_drift", q(Drift)),
    opt("temperature", q(Temperature)),
];

pub const HEAVISIDE: &[KeySpec] = &[
    req("threshold", q(Current)),
    req("gain", q(Current)),
    opt("steepness_k", q(Steepness)),
];

pub const NONE: &[KeySpec] = &[];

pub const CONSTANT: &[KeySpec] = &[req("value", q(Current))];

pub const TRIANGLE: &[KeySpec] = &[
    req("lo", q(Current)),
    req("hi", q(Current)),
    req("period", q(Time)),
];

pub const STEP: &[KeySpec] = &[
    req("from", q(Current)),
    req("to", q(Current)),
    req("at", q(Time)),
];

pub const ENCODING: &[KeySpec] = &[
    opt("level0", q(Current)),
    opt("rest", q(Current)),
    opt("level1", q(Current)),
    opt("pulse_width", q(Time)),
];

pub const DC_SWEEP: &[KeySpec] = &[
    req("source", Ident),
    req("probe", Ident),
    opt("lo", q(Current)),
    req("hi", q(Current)),
    opt("steps", Count),
    opt("mode", Choice(EVAL_CHOICES)),
];

pub const TRANSIENT: &[KeySpec] = &[
    req("t_stop", q(Time)),
    opt("dt", q(Time)),
    opt("record_every", Count),
];

pub const MONTE_CARLO: &[KeySpec] = &[
    req("block", Ident),
    opt("sigma", q(Current)),
    opt("runs", Count),
    opt("mode", Choice(EVAL_CHOICES)),
];

pub const TUNABILITY: &[KeySpec] = &[
    req("target", Choice(TARGET_CHOICES)),
    opt("lo", q(Current)),
    opt("hi", q(Current)),
    opt("points", Count),
    opt("cal", Choice(CAL_CHOICES)),
    opt("mode", Choice(EVAL_CHOICES)),
];

pub const GATE: &[KeySpec] = &[
    req("kind", Choice(GATE_CHOICES)),
    opt("mode", Choice(GATE_MODE_CHOICES)),
    opt("hold", q(Time)),
];

/// Closest candidate to a misspelt word, if any is reasonably close.
pub fn suggest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(word, c), c))
        .filter(|&(d, c)| d <= (c.len().max(word.len()) / 2).max(2))
        .min_by_key(|&(d, _)| d)
        .map(|(_, c)| c)
}
