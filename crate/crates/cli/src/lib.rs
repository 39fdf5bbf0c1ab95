//! `schmittsim` command-line front end.
//!
//! Exit status is 0 on success, 1 when a scenario has diagnostics or an
//! analysis fails, and 2 on a usage error.

mod output;
mod repro;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use schmittsim::analysis::{tunability_sweep, DcSweep, TuneTarget, DEFAULT_TOL};
use schmittsim::device::Calibration;
use schmittsim::graph::EvalMode;
use schmittsim::logic::{verify_truth_table, GateKind, GateMode};
use schmittsim::presets;
use schmittsim::scenario::schema::Dimension;
use schmittsim::scenario::{
    check_bytes, check_scenario, parse_quantity, run_scenario, Analysis, Diagnostic, Outcome,
    Scenario, DEFAULT_DT,
};

pub use output::write_atomic;
pub use repro::Figure;

/// Environment variable naming the default directory for `repro` output.
pub const OUT_DIR_ENV: &str = "SCHMITTSIM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "schmittsim",
    version,
    about = "Current-mode Schmitt trigger simulator"
)]
pub struct Cli {
    /// Print diagnostics as JSON on stderr.
    #[arg(long, global = true)]
    json_diag: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// Scenario file.
    scenario: Option<PathBuf>,

    /// Built-in scenario instead of a file.
    #[arg(long, conflicts_with = "scenario", value_parser = preset_name)]
    preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Output {
    /// Write results to this file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Ideal,
    Smooth,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ideal => EvalMode::Ideal,
            ModeArg::Smooth => EvalMode::Smooth,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Gain,
    Thresh,
    Width,
}

impl From<TargetArg> for TuneTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Gain => TuneTarget::Gain,
            TargetArg::Thresh => TuneTarget::Thresh,
            TargetArg::Width => TuneTarget::Width,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CalArg {
    Default,
    Ideal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    And,
    Or,
    Nand,
    Nor,
    Xor,
}

impl From<KindArg> for GateKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::And => GateKind::And,
            KindArg::Or => GateKind::Or,
            KindArg::Nand => GateKind::Nand,
            KindArg::Nor => GateKind::Nor,
            KindArg::Xor => GateKind::Xor,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GateModeArg {
    Ideal,
    Calibrated,
}

impl From<GateModeArg> for GateMode {
    fn from(m: GateModeArg) -> Self {
        match m {
            GateModeArg::Ideal => GateMode::Ideal,
            GateModeArg::Calibrated => GateMode::Calibrated,
        }
    }
}

fn preset_name(s: &str) -> Result<String, String> {
    if presets::preset(s).is_some() {
        Ok(s.to_string())
    } else {
        Err(format!(
            "unknown preset (valid: {})",
            presets::names().collect::<Vec<_>>().join(", ")
        ))
    }
}

fn current(s: &str) -> Result<f64, String> {
    parse_quantity(s, Dimension::Current)
}

fn time(s: &str) -> Result<f64, String> {
    parse_quantity(s, Dimension::Time)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the analysis a scenario declares.
    Run {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// DC hysteresis sweep (default preset: baseline).
    Dc {
        #[command(flatten)]
        input: Input,
        /// Swept source block.
        #[arg(long)]
        source: Option<String>,
        /// Observed block.
        #[arg(long)]
        probe: Option<String>,
        #[arg(long, value_parser = current)]
        lo: Option<f64>,
        #[arg(long, value_parser = current)]
        hi: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        output: Output,
    },
    /// Transient simulation (default preset: fig2a).
    Tran {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = time)]
        t_stop: Option<f64>,
        #[arg(long, value_parser = time)]
        dt: Option<f64>,
        /// Keep every n-th sample.
        #[arg(long)]
        record_every: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo mismatch (default preset: fig2c).
    Mc {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = current)]
        sigma: Option<f64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        output: Output,
    },
    /// Bias-current tunability sweep with a linear fit.
    Tune {
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, value_parser = current)]
        lo: Option<f64>,
        #[arg(long, value_parser = current)]
        hi: Option<f64>,
        #[arg(long, default_value_t = 16)]
        points: usize,
        #[arg(long, value_enum, default_value_t = CalArg::Default)]
        cal: CalArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Ideal)]
        mode: ModeArg,
        #[command(flatten)]
        output: Output,
    },
    /// Spike-logic gate: truth table, or the scenario's own spike program.
    Gate {
        /// Defaults to the kind the scenario declares.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, value_enum)]
        mode: Option<GateModeArg>,
        #[command(flatten)]
        input: Input,
        /// Run the scenario's spike programs instead of the truth table.
        #[arg(long)]
        program: bool,
        /// Rest kept after the last spike.
        #[arg(long, value_parser = time)]
        hold: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Check a scenario file and print its diagnostics.
    Validate { scenario: PathBuf },
    /// Reproduce a figure: plot-ready CSV plus a metrics JSON with checks.
    Repro {
        #[arg(value_enum)]
        figure: Figure,
        /// Seed for fig2c.
        #[arg(long)]
        seed: Option<u64>,
        /// Run count for fig2c.
        #[arg(long)]
        runs: Option<usize>,
        /// Output directory.
        #[arg(long, env = OUT_DIR_ENV, default_value = "schmittsim-out")]
        out_dir: PathBuf,
    },
}

#[derive(serde::Serialize)]
struct TruthTable<'a> {
    kind: GateKind,
    mode: GateMode,
    pass: bool,
    rows: &'a [schmittsim::logic::TruthRow],
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Diagnostics were already printed.
    Diagnostics,
    Message(String),
    /// Results were written but a check failed.
    Check(String),
}

impl From<schmittsim::Error> for Failure {
    fn from(e: schmittsim::Error) -> Self {
        Failure::Message(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Message(e.to_string())
    }
}

struct Ctx {
    json_diag: bool,
}

impl Ctx {
    fn print_diagnostics(&self, diags: &[Diagnostic], source: &str) {
        if diags.is_empty() {
            return;
        }
        if self.json_diag {
            let doc = serde_json::json!({ "source": source, "diagnostics": diags });
            eprintln!("{doc}");
        } else {
            for d in diags {
                eprintln!("{source}:{d}");
            }
        }
    }

    /// Load and resolve a scenario, printing warnings.
    fn load(&self, input: &Input, default_preset: &str) -> Result<Scenario, Failure> {
        let (checked, source) = match (&input.scenario, &input.preset) {
            (Some(path), _) => {
                let bytes = std::fs::read(path)
                    .map_err(|e| Failure::Message(format!("{}: {e}", path.display())))?;
                (check_bytes(&bytes), path.display().to_string())
            }
            (None, p) => {
                let name = p.as_deref().unwrap_or(default_preset);
                let text = presets::preset(name).expect("preset names are validated");
                (check_scenario(text), format!("preset:{name}"))
            }
        };
        if checked.has_errors() {
            self.print_diagnostics(&checked.diagnostics, &source);
            return Err(Failure::Diagnostics);
        }
        self.print_diagnostics(&checked.diagnostics, &source);
        Ok(checked.scenario.expect("no errors"))
    }
}

fn emit(outcome: &Outcome, output: &Output) -> Result<(), Failure> {
    let text = match output.format {
        OutFormat::Text => output::text(outcome),
        OutFormat::Csv => {
            schmittsim::scenario::serialize_results(outcome, schmittsim::scenario::Format::Csv)
        }
        OutFormat::Json => {
            schmittsim::scenario::serialize_results(outcome, schmittsim::scenario::Format::Json)
        }
    };
    write_or_print(&text, output.out.as_deref())
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => Ok(write_atomic(path, text.as_bytes())?),
        None => {
            use std::io::Write;
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            Ok(so.flush()?)
        }
    }
}

fn dispatch(cx: &Ctx, cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { input, output } => {
            if input.scenario.is_none() && input.preset.is_none() {
                return Err(Failure::Message(
                    "run needs a scenario file or --preset".into(),
                ));
            }
            let sc = cx.load(&input, "baseline")?;
            emit(&run_scenario(&sc)?, &output)
        }
        Command::Dc {
            input,
            source,
            probe,
            lo,
            hi,
            steps,
            mode,
            output,
        } => {
            let mut sc = cx.load(&input, "baseline")?;
            let net = sc
                .network
                .as_ref()
                .ok_or_else(|| Failure::Message("scenario has no network to sweep".into()))?;
            let (s0, p0, mut sweep) = match &sc.analysis {
                Analysis::DcSweep {
                    source,
                    probe,
                    sweep,
                } => (source.clone(), probe.clone(), *sweep),
                _ => (
                    net.source_ids().next().unwrap_or_default().to_string(),
                    net.probe_ids().next().unwrap_or_default().to_string(),
                    DcSweep {
                        lo: 0.0,
                        hi: 500.0,
                        steps: 200,
                        mode: EvalMode::Ideal,
                        tol: DEFAULT_TOL,
                    },
                ),
            };
            sweep.lo = lo.unwrap_or(sweep.lo);
            sweep.hi = hi.unwrap_or(sweep.hi);
            sweep.steps = steps.unwrap_or(sweep.steps);
            sweep.mode = mode.map(Into::into).unwrap_or(sweep.mode);
            sc.analysis = Analysis::DcSweep {
                source: source.unwrap_or(s0),
                probe: probe.unwrap_or(p0),
                sweep,
            };
            emit(&run_scenario(&sc)?, &output)
        }
        Command::Tran {
            input,
            t_stop,
            dt,
            record_every,
            output,
        } => {
            let mut sc = cx.load(&input, "fig2a")?;
            let (t0, dt0, r0) = match &sc.analysis {
                Analysis::Transient {
                    t_stop,
                    dt,
                    record_every,
                } => (*t_stop, *dt, *record_every),
                _ => (0.1, DEFAULT_DT, 1),
            };
            sc.analysis = Analysis::Transient {
                t_stop: t_stop.unwrap_or(t0),
                dt: dt.unwrap_or(dt0),
                record_every: record_every.unwrap_or(r0).max(1),
            };
            emit(&run_scenario(&sc)?, &output)
        }
        Command::Mc {
            input,
            sigma,
            runs,
            seed,
            mode,
            output,
        } => {
            let mut sc = cx.load(&input, "fig2c")?;
            let (block, trigger, s0, r0, m0) = match &sc.analysis {
                Analysis::MonteCarlo {
                    block,
                    trigger,
                    sigma,
                    runs,
                    mode,
                } => (block.clone(), *trigger, *sigma, *runs, *mode),
                _ => {
                    let net = sc.network.as_ref().ok_or_else(|| {
                        Failure::Message("scenario has no trigger to perturb".into())
                    })?;
                    let b = net
                        .blocks()
                        .iter()
                        .find(|b| b.kind.trigger().is_some())
                        .ok_or_else(|| Failure::Message("scenario has no trigger block".into()))?;
                    (
                        b.id.clone(),
                        *b.kind.trigger().expect("trigger"),
                        10.0,
                        500,
                        EvalMode::Ideal,
                    )
                }
            };
            sc.seed = seed.unwrap_or(sc.seed);
            sc.analysis = Analysis::MonteCarlo {
                block,
                trigger,
                sigma: sigma.unwrap_or(s0),
                runs: runs.unwrap_or(r0),
                mode: mode.map(Into::into).unwrap_or(m0),
            };
            emit(&run_scenario(&sc)?, &output)
        }
        Command::Tune {
            target,
            lo,
            hi,
            points,
            cal,
            mode,
            output,
        } => {
            let target: TuneTarget = target.into();
            let (dlo, dhi) = target.default_range();
            let cal = match cal {
                CalArg::Default => Calibration::default(),
                CalArg::Ideal => Calibration::ideal(),
            };
            let rep = tunability_sweep(
                target,
                lo.unwrap_or(dlo),
                hi.unwrap_or(dhi),
                points,
                cal,
                mode.into(),
            )?;
            emit(&Outcome::Tunability(rep), &output)
        }
        Command::Gate {
            kind,
            mode,
            input,
            program,
            hold,
            output,
        } => {
            let mut sc = cx.load(&input, "fig5")?;
            let Analysis::Gate {
                kind: declared,
                opts,
                programs,
            } = &mut sc.analysis
            else {
                return Err(Failure::Message(
                    "scenario does not declare a gate analysis".into(),
                ));
            };
            if let Some(m) = mode {
                opts.mode = m.into();
            }
            if let Some(h) = hold {
                opts.hold = h;
            }
            let kind: GateKind = kind.map_or(*declared, Into::into);
            let (opts, programs) = (*opts, programs.clone());
            if program {
                sc.analysis = Analysis::Gate {
                    kind,
                    opts,
                    programs,
                };
                return emit(&run_scenario(&sc)?, &output);
            }
            let rows = verify_truth_table(kind, &sc.encoding, &opts)?;
            let text = match output.format {
                OutFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&TruthTable {
                        kind,
                        mode: opts.mode,
                        pass: rows.iter().all(|r| r.pass),
                        rows: &rows,
                    })
                    .expect("plain data");
                    s.push('\n');
                    s
                }
                OutFormat::Csv => {
                    let mut s = String::from("in1,in2,expected,got,held,pass\n");
                    for r in &rows {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            r.in1, r.in2, r.expected, r.got, r.held, r.pass
                        );
                    }
                    s
                }
                OutFormat::Text => output::truth_text(kind, opts.mode, &rows),
            };
            write_or_print(&text, output.out.as_deref())?;
            if rows.iter().all(|r| r.pass) {
                Ok(())
            } else {
                Err(Failure::Check(format!("{kind} truth table failed")))
            }
        }
        Command::Validate { scenario } => {
            let bytes = std::fs::read(&scenario)
                .map_err(|e| Failure::Message(format!("{}: {e}", scenario.display())))?;
            let checked = check_bytes(&bytes);
            let source = scenario.display().to_string();
            cx.print_diagnostics(&checked.diagnostics, &source);
            if checked.has_errors() {
                Err(Failure::Diagnostics)
            } else {
                if !cx.json_diag {
                    println!("{source}: ok");
                }
                Ok(())
            }
        }
        Command::Repro {
            figure,
            seed,
            runs,
            out_dir,
        } => repro::run(figure, seed, runs, &out_dir),
    }
}

/// Parse `args` and run; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cx = Ctx {
        json_diag: cli.json_diag,
    };
    if let Command::Repro {
        figure, seed, runs, ..
    } = &cli.command
    {
        if *figure != Figure::Fig2c && (seed.is_some() || runs.is_some()) {
            eprintln!("error: --seed and --runs only apply to fig2c");
            return 2;
        }
    }
    match dispatch(&cx, cli.command) {
        Ok(()) => 0,
        Err(Failure::Diagnostics) => 1,
        Err(Failure::Message(m)) | Err(Failure::Check(m)) => {
            if cx.json_diag {
                eprintln!("{}", serde_json::json!({ "error": m }));
            } else {
                eprintln!("error: {m}");
            }
            1
        }
    }
}

/// Run with the process arguments, for callers that are not `main`.
pub fn run_default() -> u8 {
    main_with_args(std::env::args_os())
}
