use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use schmittsim::analysis::{dc_hysteresis, default_step_response, monte_carlo, DcSweep};
use schmittsim::logic::{run_gate, truth_table_programs, GateRunOptions};
use schmittsim::scenario::{check_scenario, serialize_scenario};
use schmittsim::{presets, Encoding, EvalMode, GateKind, Polarity, SchmittTrigger};

fn dc(c: &mut Criterion) {
    let t = SchmittTrigger::baseline();
    let sweep = DcSweep::new(0.0, 500.0, 200).unwrap();
    c.bench_function("dc_hysteresis_ideal", |b| {
        b.iter(|| dc_hysteresis(black_box(&t), &sweep).unwrap())
    });
    let smooth = sweep.with_mode(EvalMode::Smooth);
    c.bench_function("dc_hysteresis_smooth", |b| {
        b.iter(|| dc_hysteresis(black_box(&t), &smooth).unwrap())
    });
}

fn transient(c: &mut Criterion) {
    let t = SchmittTrigger::baseline();
    c.bench_function("step_response", |b| {
        b.iter(|| default_step_response(black_box(&t)).unwrap())
    });
    let enc = Encoding::default();
    let programs = truth_table_programs(Polarity::Pos, Polarity::Neg, &enc);
    let opts = GateRunOptions::default();
    c.bench_function("xor_gate_run", |b| {
        b.iter(|| run_gate(GateKind::Xor, black_box(&programs), &enc, &opts).unwrap())
    });
}

fn mismatch(c: &mut Criterion) {
    let t = SchmittTrigger::baseline();
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    g.bench_function("100_runs", |b| {
        b.iter(|| monte_carlo(black_box(&t), 10.0, 100, 7, EvalMode::Ideal).unwrap())
    });
    g.finish();
}

fn scenario(c: &mut Criterion) {
    let text = presets::preset("fig2a").unwrap();
    c.bench_function("check_scenario", |b| {
        b.iter(|| check_scenario(black_box(text)))
    });
    let doc = check_scenario(text).doc;
    c.bench_function("serialize_scenario", |b| {
        b.iter(|| serialize_scenario(black_box(&doc)))
    });
}

criterion_group!(benches, dc, transient, mismatch, scenario);
criterion_main!(benches);
