use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::Serialize;

use super::exec::Outcome;
use crate::analysis::{HysteresisMetrics, MetricSpread};
use crate::error::Error;
use crate::graph::Trace;
use crate::logic::{GateKind, GateMode, GateReading, Logic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidConfig(format!(
                "unknown format `{s}` (csv or json)"
            ))),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `time_s,<probe ids>` then one row per sample, currents to 0.01 pA.
pub fn trace_csv(tr: &Trace) -> String {
    let mut out = String::from("time_s");
    for p in &tr.probes {
        out.push(',');
        out.push_str(&quote(&p.id));
    }
    out.push('\n');
    for (i, t) in tr.time.iter().enumerate() {
        let _ = write!(out, "{t:.9}");
        for p in &tr.probes {
            let _ = write!(out, ",{:.2}", p.values[i]);
        }
        out.push('\n');
    }
    out
}

pub fn readings_csv(readings: &[GateReading]) -> String {
    let mut out = String::from("after_s,read_s,current_pA,value,held,max_deviation_pA\n");
    for r in readings {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.2},{},{},{:.2}",
            r.after, r.read, r.current, r.value, r.held, r.max_deviation
        );
    }
    out
}

fn csv(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Transient(tr) => trace_csv(tr),
        Outcome::DcSweep(r) => {
            let mut out = String::from("i_in_pA,up_pA,down_pA\n");
            for (u, d) in r.up.iter().zip(r.down.iter().rev()) {
                let _ = writeln!(out, "{:.2},{:.2},{:.2}", u.i_in, u.out, d.out);
            }
            out
        }
        Outcome::MonteCarlo(d) => {
            let mut out =
                String::from("run,i_th_high_pA,i_th_low_pA,hyst_width_pA,high_level_pA,bistable\n");
            for r in &d.runs {
                let m = &r.metrics;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.run,
                    opt(m.i_th_high),
                    opt(m.i_th_low),
                    opt(m.hyst_width),
                    opt(m.high_level),
                    m.bistable
                );
            }
            out
        }
        Outcome::Tunability(rep) => {
            let mut out = String::from("set_pA,measured_pA,rel_error,residual_pA,flag\n");
            for (p, res) in rep.points.iter().zip(&rep.residuals) {
                let _ = writeln!(
                    out,
                    "{:.2},{},{},{},{}",
                    p.set,
                    opt(p.measured),
                    p.rel_error.map(|e| format!("{e:.6}")).unwrap_or_default(),
                    opt(*res),
                    quote(p.flag.as_deref().unwrap_or(""))
                );
            }
            out
        }
        Outcome::Gate(run) => readings_csv(&run.readings),
    }
}

#[derive(Serialize)]
struct ProbeSummary<'a> {
    id: &'a str,
    #[serde(rename = "min_pA")]
    min: f64,
    #[serde(rename = "max_pA")]
    max: f64,
    #[serde(rename = "final_pA")]
    last: f64,
}

#[derive(Serialize)]
struct TransientSummary<'a> {
    dt_s: f64,
    samples: usize,
    probes: Vec<ProbeSummary<'a>>,
}

#[derive(Serialize)]
struct McSummary {
    seed: u64,
    #[serde(rename = "sigma_pA")]
    sigma: f64,
    runs: usize,
    retention: f64,
    nominal: HysteresisMetrics,
    std: MetricSpread,
}

#[derive(Serialize)]
struct GateSummary<'a> {
    kind: GateKind,
    mode: GateMode,
    #[serde(rename = "final")]
    final_value: Logic,
    all_held: bool,
    readings: &'a [GateReading],
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("results are plain data")
}

/// Fields keep their declaration order.
fn json(outcome: &Outcome) -> String {
    let mut s = match outcome {
        Outcome::DcSweep(r) => pretty(&r.metrics),
        Outcome::Transient(tr) => pretty(&TransientSummary {
            dt_s: tr.dt,
            samples: tr.len(),
            probes: tr
                .probes
                .iter()
                .map(|p| ProbeSummary {
                    id: &p.id,
                    min: p.values.iter().copied().fold(f64::INFINITY, f64::min),
                    max: p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    last: p.values.last().copied().unwrap_or(0.0),
                })
                .collect(),
        }),
        Outcome::MonteCarlo(d) => pretty(&McSummary {
            seed: d.seed,
            sigma: d.sigma,
            runs: d.runs.len(),
            retention: d.retention,
            nominal: d.nominal,
            std: d.std,
        }),
        Outcome::Tunability(rep) => pretty(rep),
        Outcome::Gate(run) => pretty(&GateSummary {
            kind: run.kind,
            mode: run.mode,
            final_value: run.final_value(),
            all_held: run.all_held(),
            readings: &run.readings,
        }),
    };
    s.push('\n');
    s
}

pub fn serialize_results(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Csv => csv(outcome),
        Format::Json => json(outcome),
    }
}

pub fn write_results(outcome: &Outcome, format: Format, w: &mut impl io::Write) -> io::Result<()> {
    w.write_all(serialize_results(outcome, format).as_bytes())?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{dc_sweep, DcSweep};
    use crate::device::SchmittTrigger;
    use crate::graph::ProbeSeries;

    #[test]
    fn trace_shapes() {
        let tr = Trace {
            dt: 1e-3,
            time: vec![0.0, 1e-3, 2e-3],
            probes: vec![ProbeSeries {
                id: "out".into(),
                values: vec![0.0, 250.004, 500.0],
            }],
        };
        let s = serialize_results(&Outcome::Transient(tr), Format::Csv);
        assert_eq!(
            s,
            "time_s,out\n0.000000000,0.00\n0.001000000,250.00\n0.002000000,500.00\n"
        );
        let empty = Trace {
            dt: 1e-3,
            time: vec![],
            probes: vec![ProbeSeries {
                id: "out".into(),
                values: vec![],
            }],
        };
        assert_eq!(trace_csv(&empty), "time_s,out\n");
    }

    #[test]
    fn metrics_json_keys() {
        let t = SchmittTrigger::baseline();
        let r = dc_sweep(&t, &DcSweep::new(0.0, 500.0, 100).unwrap()).unwrap();
        let s = serialize_results(&Outcome::DcSweep(r.clone()), Format::Json);
        assert!(s.contains("\"i_th_high_pA\": 350.0"), "{s}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["bistable"], true);
        let keys = [
            "i_th_high_pA",
            "i_th_low_pA",
            "hyst_width_pA",
            "high_level_pA",
            "bistable",
        ];
        let at: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(at.windows(2).all(|w| w[0] < w[1]));
        let csv = serialize_results(&Outcome::DcSweep(r), Format::Csv);
        assert_eq!(csv.lines().count(), 102);
        for line in csv.lines().skip(1) {
            assert!(line.split(',').all(|f| f.parse::<f64>().is_ok()));
        }
    }
}
