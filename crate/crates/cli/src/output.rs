use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use schmittsim::logic::{GateKind, GateMode, TruthRow};
use schmittsim::scenario::Outcome;

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        // temp files are created 0600; match what a plain create would give
        let mode = std::fs::metadata(path).map_or(0o644, |m| m.permissions().mode());
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(mode))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn pa(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2} pA"))
}

/// Short human-readable summary of an outcome.
pub fn text(outcome: &Outcome) -> String {
    let mut s = String::new();
    match outcome {
        Outcome::DcSweep(r) => {
            let m = &r.metrics;
            let _ = writeln!(s, "upper threshold  {}", pa(m.i_th_high));
            let _ = writeln!(s, "lower threshold  {}", pa(m.i_th_low));
            let _ = writeln!(s, "hysteresis width {}", pa(m.hyst_width));
            let _ = writeln!(s, "high level       {}", pa(m.high_level));
            let _ = writeln!(s, "bistable         {}", m.bistable);
        }
        Outcome::Transient(tr) => {
            let _ = writeln!(
                s,
                "{} samples, dt {:.3e} s, t_end {:.6} s",
                tr.len(),
                tr.dt,
                tr.time.last().copied().unwrap_or(0.0)
            );
            for p in &tr.probes {
                let min = p.values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let last = p.values.last().copied().unwrap_or(0.0);
                let _ = writeln!(
                    s,
                    "{:<8} min {min:>9.2}  max {max:>9.2}  final {last:>9.2} pA",
                    p.id
                );
            }
        }
        Outcome::MonteCarlo(d) => {
            let _ = writeln!(
                s,
                "{} runs, sigma {} pA, seed {}",
                d.runs.len(),
                d.sigma,
                d.seed
            );
            let _ = writeln!(s, "retention        {:.4}", d.retention);
            let _ = writeln!(s, "std upper        {:.3} pA", d.std.i_th_high);
            let _ = writeln!(s, "std lower        {:.3} pA", d.std.i_th_low);
            let _ = writeln!(s, "std width        {:.3} pA", d.std.hyst_width);
            let _ = writeln!(s, "std high level   {:.3} pA", d.std.high_level);
        }
        Outcome::Tunability(rep) => {
            let _ = writeln!(s, "target {}", rep.which);
            let _ = writeln!(s, "slope            {:.5}", rep.slope);
            let _ = writeln!(s, "intercept        {:.3} pA", rep.intercept);
            let _ = writeln!(s, "max rel error    {:.4}", rep.max_rel_error);
            match rep.rel_error_at_top {
                Some(e) => {
                    let _ = writeln!(s, "rel error at top {e:.4}");
                }
                None => {
                    let _ = writeln!(s, "rel error at top -");
                }
            }
            for p in rep.points.iter().filter(|p| p.flag.is_some()) {
                let _ = writeln!(
                    s,
                    "flagged {:.2} pA: {}",
                    p.set,
                    p.flag.as_deref().unwrap_or("")
                );
            }
        }
        Outcome::Gate(run) => {
            let _ = writeln!(s, "{} ({})", run.kind, mode_label(run.mode));
            for r in &run.readings {
                let _ = writeln!(
                    s,
                    "t={:.4} s  out {:>8.2} pA  logic {}  held {}",
                    r.read, r.current, r.value, r.held
                );
            }
            let _ = writeln!(s, "final {}", run.final_value());
        }
    }
    s
}

pub fn mode_label(m: GateMode) -> &'static str {
    match m {
        GateMode::Ideal => "ideal",
        GateMode::Calibrated => "calibrated",
    }
}

pub fn truth_text(kind: GateKind, mode: GateMode, rows: &[TruthRow]) -> String {
    let mut s = format!("{kind} ({})\nin1 in2  want got  held\n", mode_label(mode));
    for r in rows {
        let _ = writeln!(
            s,
            " {}   {}     {}    {}   {}  {}",
            r.in1,
            r.in2,
            r.expected,
            r.got,
            r.held,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let ok = rows.iter().filter(|r| r.pass).count();
    let _ = writeln!(s, "{ok}/{} rows pass", rows.len());
    s
}
