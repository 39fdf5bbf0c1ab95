//! Scenario files: a line-oriented description of blocks, nets, stimuli and
//! one analysis, with explicit units on every physical quantity.
//!
//! ```text
//! version 1
//!
//! block in source
//! block st schmitt i_gain=486pA i_thresh=368pA i_width=216pA
//! block out probe
//!
//! net in -> st
//! net st -> out
//!
//! stimulus in triangle lo=0pA hi=500pA period=200ms
//!
//! probe out
//!
//! analysis transient t_stop=400ms dt=5us
//! ```

mod compile;
mod doc;
mod exec;
mod parse;
mod results;
pub mod schema;
mod write;

pub use compile::{
    check_bytes, check_scenario, compile, validate_scenario, Analysis, Checked, Scenario,
    DEFAULT_DT,
};
pub use doc::*;
pub use exec::{run_scenario, Outcome};
pub use parse::{is_ident, parse_lenient, parse_quantity, parse_scenario, VERSION};
pub use results::{readings_csv, serialize_results, trace_csv, write_results, Format};
pub use write::serialize_scenario;
