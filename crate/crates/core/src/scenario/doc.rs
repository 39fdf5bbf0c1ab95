use std::fmt;

use serde::Serialize;

use super::schema::{self, Dimension, KeySpec};
use crate::logic::Polarity;

/// Source position, 1-based. Never affects equality, so documents compare
/// by content alone.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Loc {
    pub fn new(line: usize, col: usize) -> Self {
        Loc { line, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Unit {
    #[serde(rename = "pA")]
    PicoAmp,
    #[serde(rename = "nA")]
    NanoAmp,
    #[serde(rename = "uA")]
    MicroAmp,
    #[serde(rename = "s")]
    Second,
    #[serde(rename = "ms")]
    MilliSecond,
    #[serde(rename = "us")]
    MicroSecond,
    #[serde(rename = "/pA")]
    PerPicoAmp,
    #[serde(rename = "C")]
    Celsius,
    #[serde(rename = "pA/C")]
    PicoAmpPerCelsius,
}

impl Unit {
    pub const ALL: [Unit; 9] = [
        Unit::PicoAmp,
        Unit::NanoAmp,
        Unit::MicroAmp,
        Unit::Second,
        Unit::MilliSecond,
        Unit::MicroSecond,
        Unit::PerPicoAmp,
        Unit::Celsius,
        Unit::PicoAmpPerCelsius,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::PicoAmp => "pA",
            Unit::NanoAmp => "nA",
            Unit::MicroAmp => "uA",
            Unit::Second => "s",
            Unit::MilliSecond => "ms",
            Unit::MicroSecond => "us",
            Unit::PerPicoAmp => "/pA",
            Unit::Celsius => "C",
            Unit::PicoAmpPerCelsius => "pA/C",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Unit> {
        Unit::ALL.into_iter().find(|u| u.symbol() == s)
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::PicoAmp | Unit::NanoAmp | Unit::MicroAmp => Dimension::Current,
            Unit::Second | Unit::MilliSecond | Unit::MicroSecond => Dimension::Time,
            Unit::PerPicoAmp => Dimension::Steepness,
            Unit::Celsius => Dimension::Temperature,
            Unit::PicoAmpPerCelsius => Dimension::Drift,
        }
    }

    /// Factor to pA, s, /pA, C or pA/C.
    pub fn scale(self) -> f64 {
        match self {
            Unit::NanoAmp => 1e3,
            Unit::MicroAmp => 1e6,
            Unit::MilliSecond => 1e-3,
            Unit::MicroSecond => 1e-6,
            _ => 1.0,
        }
    }
}

/// Number as written plus its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    pub fn base(&self) -> f64 {
        self.value * self.unit.scale()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, self.unit.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Quantity(Quantity),
    Number(f64),
    Count(u64),
    Word(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Quantity(q) => q.fmt(f),
            Value::Number(x) => write!(f, "{x}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Word(w) => f.write_str(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub key: String,
    pub value: Value,
    pub loc: Loc,
}

/// Typed lookups over a parameter list. Values were kind-checked on parse.
pub trait ParamsExt {
    fn param(&self, key: &str) -> Option<&Param>;

    fn quantity(&self, key: &str) -> Option<f64> {
        match self.param(key).map(|p| &p.value) {
            Some(Value::Quantity(q)) => Some(q.base()),
            _ => None,
        }
    }

    fn number(&self, key: &str) -> Option<f64> {
        match self.param(key).map(|p| &p.value) {
            Some(Value::Number(x)) => Some(*x),
            _ => None,
        }
    }

    fn count(&self, key: &str) -> Option<u64> {
        match self.param(key).map(|p| &p.value) {
            Some(Value::Count(n)) => Some(*n),
            _ => None,
        }
    }

    fn word(&self, key: &str) -> Option<&str> {
        match self.param(key).map(|p| &p.value) {
            Some(Value::Word(w)) => Some(w),
            _ => None,
        }
    }
}

impl ParamsExt for [Param] {
    fn param(&self, key: &str) -> Option<&Param> {
        self.iter().find(|p| p.key == key)
    }
}

macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($var:ident => $kw:literal, $schema:expr;)* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
        pub enum $name { $($var),* }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),*];

            pub fn keyword(self) -> &'static str {
                match self { $($name::$var => $kw),* }
            }

            pub fn from_keyword(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|k| k.keyword() == s)
            }

            pub fn schema(self) -> &'static [KeySpec] {
                match self { $($name::$var => $schema),* }
            }
        }
    };
}

keyword_enum!(BlockType {
    Source => "source", schema::NONE;
    Schmitt => "schmitt", schema::SCHMITT;
    InvSchmitt => "inv_schmitt", schema::SCHMITT;
    Heaviside => "heaviside", schema::HEAVISIDE;
    Probe => "probe", schema::NONE;
});

keyword_enum!(StimulusKind {
    Constant => "constant", schema::CONSTANT;
    Triangle => "triangle", schema::TRIANGLE;
    Step => "step", schema::STEP;
    Spikes => "spikes", schema::NONE;
});

keyword_enum!(AnalysisKind {
    DcSweep => "dc_sweep", schema::DC_SWEEP;
    Transient => "transient", schema::TRANSIENT;
    MonteCarlo => "monte_carlo", schema::MONTE_CARLO;
    Tunability => "tunability", schema::TUNABILITY;
    Gate => "gate", schema::GATE;
});

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDecl {
    pub id: String,
    pub kind: BlockType,
    pub params: Vec<Param>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetDecl {
    pub driver: String,
    pub sink: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeDecl {
    pub polarity: Polarity,
    pub time: Quantity,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StimulusDecl {
    pub target: String,
    pub kind: StimulusKind,
    pub params: Vec<Param>,
    /// Only for `spikes`.
    pub events: Vec<SpikeDecl>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodingDecl {
    pub params: Vec<Param>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisDecl {
    pub kind: AnalysisKind,
    pub params: Vec<Param>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeDecl {
    pub id: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ScenarioDoc {
    pub version: u32,
    pub blocks: Vec<BlockDecl>,
    pub nets: Vec<NetDecl>,
    pub stimuli: Vec<StimulusDecl>,
    pub encoding: Option<EncodingDecl>,
    pub probes: Vec<ProbeDecl>,
    pub analysis: Option<AnalysisDecl>,
    pub seed: Option<u64>,
}

impl ScenarioDoc {
    pub fn block(&self, id: &str) -> Option<&BlockDecl> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn stimulus(&self, target: &str) -> Option<&StimulusDecl> {
        self.stimuli.iter().find(|s| s.target == target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub line: usize,
    pub col: usize,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl Diagnostic {
    pub fn error(code: &'static str, loc: Loc, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            line: loc.line,
            col: loc.col,
            message: message.into(),
            id: None,
        }
    }

    pub fn warning(code: &'static str, loc: Loc, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Self::error(code, loc, message)
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}[{}]: {}",
            self.line, self.col, self.code, self.message
        )
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
