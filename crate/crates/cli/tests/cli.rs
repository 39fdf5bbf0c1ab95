use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_schmittsim"));
    c.env_remove("SCHMITTSIM_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn schmittsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn dc_baseline_reports_calibrated_loop() {
    let o = run(&["dc", "--preset", "baseline"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    for want in ["350.00 pA", "150.00 pA", "200.00 pA", "500.00 pA"] {
        assert!(s.contains(want), "missing {want} in\n{s}");
    }
}

#[test]
fn dc_flags_override_the_scenario() {
    let o = run(&[
        "dc", "--preset", "baseline", "--hi", "300pA", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bistable"], false);
    assert!(v["i_th_high_pA"].is_null());
}

#[test]
fn quantity_flag_without_unit_is_a_usage_error() {
    let o = run(&["dc", "--preset", "baseline", "--hi", "300"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn xor_truth_table_passes() {
    let o = run(&["gate", "--kind", "xor", "--preset", "fig5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("4/4 rows pass"));
}

#[test]
fn gate_program_runs_scenario_spikes() {
    let o = run(&["gate", "--kind", "and", "--program", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.starts_with("after_s,read_s,current_pA,value,held,max_deviation_pA\n"));
    // start + 6 spikes
    assert_eq!(s.lines().count(), 1 + 7);
}

#[test]
fn gate_kind_defaults_to_scenario() {
    let scn = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/tests/data/golden/28_gate_nor.scn"
    );
    let args = |kind: Option<&str>| {
        let mut a = vec!["gate", scn, "--program", "--format", "csv"];
        if let Some(k) = kind {
            a.extend(["--kind", k]);
        }
        stdout(&run(&a))
    };
    let declared = args(None);
    assert_eq!(declared, args(Some("nor")));
    assert_ne!(declared, args(Some("or")));
}

#[test]
fn validate_reports_each_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.scn");
    std::fs::write(
        &p,
        "version 1\nblock in source\nblock st schmitt i_gain=500 i_thresh=350pA i_width=200pA\n\
         net in -> st\nnet st -> nowhere\nanalysis dc_sweep source=in probe=st lo=0pA hi=500pA steps=100\n",
    )
    .unwrap();
    let o = bin()
        .args(["--json-diag", "validate"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    let diags = v["diagnostics"].as_array().unwrap();
    let errors: Vec<_> = diags.iter().filter(|d| d["severity"] == "error").collect();
    assert_eq!(errors.len(), 2, "{diags:?}");
    assert_eq!(errors[0]["line"], 3);
    assert_eq!(errors[0]["code"], "unit");
    assert_eq!(errors[1]["line"], 5);
    assert_eq!(errors[1]["code"], "unknown-id");
}

#[test]
fn validate_clean_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ok.scn");
    std::fs::write(&p, schmittsim::presets::preset("baseline").unwrap()).unwrap();
    let o = bin().arg("validate").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with(": ok\n"));
}

#[test]
fn unknown_figure_is_usage_error() {
    let o = run(&["repro", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig5"));
}

#[test]
fn seed_only_applies_to_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["repro", "fig3a", "--seed", "3", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repro_gain_tunability() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["repro", "fig3a", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("fig3a.json"));
    assert_eq!(v["pass"], true);
    let e = v["metrics"]["rel_error_at_top"].as_f64().unwrap();
    assert!((e - 0.028).abs() < 1e-3, "{e}");
    assert!(dir.path().join("fig3a.csv").exists());
}

#[test]
fn repro_out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["repro", "fig2b"])
        .env("SCHMITTSIM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("fig2b.json").exists());
}

#[test]
fn repro_monte_carlo_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = bin()
            .args([
                "repro",
                "fig2c",
                "--seed",
                "7",
                "--runs",
                "500",
                "--out-dir",
            ])
            .arg(d.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let v = json(&a.path().join("fig2c.json"));
    assert_eq!(v["metrics"]["retention"], 1.0);
    assert_eq!(v["metrics"]["runs"], 500);
    for f in ["fig2c.csv", "fig2c.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tune.csv");
    let o = bin()
        .args([
            "tune", "--target", "gain", "--points", "4", "--format", "csv", "--out",
        ])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let s = std::fs::read_to_string(&p).unwrap();
    assert_eq!(s.lines().count(), 5);
}

#[test]
fn run_needs_input() {
    assert_eq!(run(&["run"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--preset", "fig3b"]).status.code(), Some(0));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
