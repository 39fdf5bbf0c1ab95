//! Behavioral simulation of unipolar current-mode Schmitt triggers and the
//! spike-polarity logic gates built from them.
//!
//! All signals are nonnegative currents in picoamperes; time is in seconds.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod device;
pub mod error;
pub mod graph;
pub mod logic;
pub mod presets;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
pub use units::Current;

pub use device::{Calibration, DynamicsConfig, SchmittParams, SchmittTrigger};
pub use graph::{build_network, Block, EvalMode, Net, Network, Stimulus, Trace};
pub use logic::{Encoding, GateKind, Logic, Polarity, SpikeProgram};
pub use scenario::{Diagnostic, Scenario, ScenarioDoc};
