//! Figure reproduction: plot-ready CSV plus a JSON file of metrics and
//! range checks.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use schmittsim::analysis::{default_step_response, HysteresisMetrics, TuneTarget};
use schmittsim::device::SchmittTrigger;
use schmittsim::logic::{verify_truth_table, GateKind, GateMode};
use schmittsim::presets;
use schmittsim::scenario::{
    check_scenario, run_scenario, serialize_results, trace_csv, Analysis, Format, Outcome, Scenario,
};

use crate::output::write_atomic;
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Triangle-wave transient and step response.
    Fig2a,
    /// DC hysteresis loop.
    Fig2b,
    /// Monte Carlo mismatch distribution.
    Fig2c,
    /// Gain tunability.
    Fig3a,
    /// Threshold tunability.
    Fig3b,
    /// Width tunability.
    Fig3c,
    /// Spike-logic truth tables.
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig3c => "fig3c",
            Figure::Fig5 => "fig5",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub min: f64,
    pub max: f64,
    pub pass: bool,
}

impl Check {
    fn range(name: impl Into<String>, value: Option<f64>, min: f64, max: f64) -> Self {
        let v = value.unwrap_or(f64::NAN);
        Check {
            name: name.into(),
            value: v,
            min,
            max,
            pass: v >= min && v <= max,
        }
    }

    fn near(name: impl Into<String>, value: Option<f64>, want: f64, tol: f64) -> Self {
        Self::range(name, value, want - tol, want + tol)
    }
}

#[derive(Serialize)]
struct Report<'a, M: Serialize> {
    figure: &'a str,
    pass: bool,
    checks: &'a [Check],
    metrics: M,
}

fn preset_scenario(name: &str) -> Result<Scenario, Failure> {
    let text = presets::preset(name).expect("built-in preset");
    let checked = check_scenario(text);
    checked
        .scenario
        .ok_or_else(|| Failure::Message(format!("preset {name} does not compile")))
}

fn finish<M: Serialize>(
    fig: Figure,
    dir: &Path,
    csv: &str,
    checks: Vec<Check>,
    metrics: M,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    let name = fig.name();
    write_atomic(&dir.join(format!("{name}.csv")), csv.as_bytes())?;
    let pass = checks.iter().all(|c| c.pass);
    let mut json = serde_json::to_string_pretty(&Report {
        figure: name,
        pass,
        checks: &checks,
        metrics,
    })
    .expect("plain data");
    json.push('\n');
    write_atomic(&dir.join(format!("{name}.json")), json.as_bytes())?;

    let mut out = String::new();
    for c in &checks {
        let _ = writeln!(
            out,
            "{} {name} {} = {:.6} in [{}, {}]",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.min,
            c.max
        );
    }
    let _ = writeln!(out, "wrote {}", dir.join(format!("{name}.csv")).display());
    let _ = writeln!(out, "wrote {}", dir.join(format!("{name}.json")).display());
    print!("{out}");
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("{name}: a check failed")))
    }
}

#[derive(Serialize)]
struct Fig2aMetrics {
    #[serde(rename = "switch_up_pA")]
    switch_up: Option<f64>,
    #[serde(rename = "switch_down_pA")]
    switch_down: Option<f64>,
    overshoot: Option<f64>,
    #[serde(rename = "rise_time_s")]
    rise_time: Option<f64>,
    #[serde(rename = "settled_pA")]
    settled: f64,
}

/// Input levels at the first rising and falling output crossings of half
/// the peak output.
fn switch_points(input: &[f64], output: &[f64]) -> (Option<f64>, Option<f64>) {
    let peak = output.iter().copied().fold(0.0, f64::max);
    let level = 0.5 * peak;
    let mut up = None;
    let mut down = None;
    for i in 1..output.len() {
        if up.is_none() && output[i - 1] <= level && output[i] > level {
            up = Some(input[i]);
        }
        if up.is_some() && down.is_none() && output[i - 1] > level && output[i] <= level {
            down = Some(input[i]);
        }
    }
    (up, down)
}

fn fig2a(dir: &Path) -> Result<(), Failure> {
    let sc = preset_scenario("fig2a")?;
    let Outcome::Transient(tr) = run_scenario(&sc)? else {
        unreachable!("fig2a is a transient scenario")
    };
    let (up, down) = match (tr.series("in"), tr.series("out")) {
        (Some(i), Some(o)) => switch_points(i, o),
        _ => (None, None),
    };
    let step = default_step_response(&SchmittTrigger::baseline())?;
    let mut step_csv = String::from("time_s,out_pA\n");
    for (i, v) in step.output.iter().enumerate() {
        let _ = writeln!(step_csv, "{:.9},{v:.3}", i as f64 * step.dt);
    }
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("fig2a_step.csv"), step_csv.as_bytes())?;

    let checks = vec![
        Check::range("overshoot", step.overshoot, 0.05, 0.15),
        Check::range("rise_time_s", step.rise_time, 200e-6, 400e-6),
    ];
    let metrics = Fig2aMetrics {
        switch_up: up,
        switch_down: down,
        overshoot: step.overshoot,
        rise_time: step.rise_time,
        settled: step.settled,
    };
    finish(Figure::Fig2a, dir, &trace_csv(&tr), checks, metrics)
}

fn fig2b(dir: &Path) -> Result<(), Failure> {
    let sc = preset_scenario("fig2b")?;
    let outcome = run_scenario(&sc)?;
    let Outcome::DcSweep(r) = &outcome else {
        unreachable!("fig2b is a DC sweep")
    };
    let m: HysteresisMetrics = r.metrics;
    let checks = vec![
        Check::near("i_th_high_pA", m.i_th_high, 350.0, 2.0),
        Check::near("i_th_low_pA", m.i_th_low, 150.0, 2.0),
        Check::near("hyst_width_pA", m.hyst_width, 200.0, 2.0),
        Check::near("high_level_pA", m.high_level, 500.0, 2.0),
    ];
    finish(
        Figure::Fig2b,
        dir,
        &serialize_results(&outcome, Format::Csv),
        checks,
        m,
    )
}

#[derive(Serialize)]
struct Fig2cMetrics {
    seed: u64,
    runs: usize,
    #[serde(rename = "sigma_pA")]
    sigma: f64,
    retention: f64,
    std: schmittsim::analysis::MetricSpread,
    expected_std: schmittsim::analysis::MetricSpread,
}

fn fig2c(dir: &Path, seed: Option<u64>, runs: Option<usize>) -> Result<(), Failure> {
    let mut sc = preset_scenario("fig2c")?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    if let (Some(n), Analysis::MonteCarlo { runs, .. }) = (runs, &mut sc.analysis) {
        *runs = n;
    }
    let outcome = run_scenario(&sc)?;
    let Outcome::MonteCarlo(d) = &outcome else {
        unreachable!("fig2c is a Monte Carlo scenario")
    };
    // Each metric is a sum or difference of independent N(0, σ) draws:
    // two for the upper threshold, width and level, four for the lower.
    let r2 = std::f64::consts::SQRT_2 * d.sigma;
    let expected = schmittsim::analysis::MetricSpread {
        i_th_high: r2,
        i_th_low: 2.0 * d.sigma,
        hyst_width: r2,
        high_level: r2,
    };
    let mut checks = vec![Check::near("retention", Some(d.retention), 1.0, 0.0)];
    for (name, got, want) in [
        ("std_i_th_high_pA", d.std.i_th_high, expected.i_th_high),
        ("std_i_th_low_pA", d.std.i_th_low, expected.i_th_low),
        ("std_hyst_width_pA", d.std.hyst_width, expected.hyst_width),
        ("std_high_level_pA", d.std.high_level, expected.high_level),
    ] {
        checks.push(Check::range(name, Some(got), 5.0, 25.0));
        checks.push(Check::range(
            format!("{name}_vs_expected"),
            Some(got / want),
            0.8,
            1.2,
        ));
    }
    let metrics = Fig2cMetrics {
        seed: d.seed,
        runs: d.runs.len(),
        sigma: d.sigma,
        retention: d.retention,
        std: d.std,
        expected_std: expected,
    };
    finish(
        Figure::Fig2c,
        dir,
        &serialize_results(&outcome, Format::Csv),
        checks,
        metrics,
    )
}

fn fig3(fig: Figure, dir: &Path) -> Result<(), Failure> {
    let (target, want, tol) = match fig {
        Figure::Fig3a => (TuneTarget::Gain, 0.028, 0.003),
        Figure::Fig3b => (TuneTarget::Thresh, 0.045, 0.003),
        _ => (TuneTarget::Width, 0.0525, 0.004),
    };
    let sc = preset_scenario(fig.name())?;
    let outcome = run_scenario(&sc)?;
    let Outcome::Tunability(rep) = &outcome else {
        unreachable!("{} is a tunability scenario", fig.name())
    };
    debug_assert_eq!(rep.which, target);
    let checks = vec![
        Check::near("rel_error_at_top", rep.rel_error_at_top, want, tol),
        Check::near("slope", Some(rep.slope), 1.0, 0.005),
    ];
    finish(
        fig,
        dir,
        &serialize_results(&outcome, Format::Csv),
        checks,
        rep,
    )
}

#[derive(Serialize)]
struct GateTally {
    kind: GateKind,
    mode: GateMode,
    rows_passed: usize,
}

fn fig5(dir: &Path) -> Result<(), Failure> {
    let sc = preset_scenario("fig5")?;
    let Analysis::Gate { opts, .. } = sc.analysis else {
        unreachable!("fig5 is a gate scenario")
    };
    let mut csv = String::from("kind,mode,in1,in2,expected,got,held,pass\n");
    let mut checks = Vec::new();
    let mut tally = Vec::new();
    for mode in [GateMode::Ideal, GateMode::Calibrated] {
        for kind in GateKind::ALL {
            let o = schmittsim::logic::GateRunOptions { mode, ..opts };
            let rows = verify_truth_table(kind, &sc.encoding, &o)?;
            let mname = crate::output::mode_label(mode);
            for r in &rows {
                let _ = writeln!(
                    csv,
                    "{kind},{mname},{},{},{},{},{},{}",
                    r.in1, r.in2, r.expected, r.got, r.held, r.pass
                );
            }
            let passed = rows.iter().filter(|r| r.pass).count();
            checks.push(Check::near(
                format!("{kind}_{mname}_rows"),
                Some(passed as f64),
                4.0,
                0.0,
            ));
            tally.push(GateTally {
                kind,
                mode,
                rows_passed: passed,
            });
        }
    }
    finish(Figure::Fig5, dir, &csv, checks, tally)
}

pub fn run(fig: Figure, seed: Option<u64>, runs: Option<usize>, dir: &Path) -> Result<(), Failure> {
    match fig {
        Figure::Fig2a => fig2a(dir),
        Figure::Fig2b => fig2b(dir),
        Figure::Fig2c => fig2c(dir, seed, runs),
        Figure::Fig3a | Figure::Fig3b | Figure::Fig3c => fig3(fig, dir),
        Figure::Fig5 => fig5(dir),
    }
}
