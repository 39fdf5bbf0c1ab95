use proptest::prelude::*;

use schmittsim::device::DEFAULT_TAU;
use schmittsim::logic::{
    render_default, run_gate, truth_table, GateMode, GateRunOptions, SpikeEvent,
};
use schmittsim::{Encoding, GateKind, Logic, Polarity, SpikeProgram, Stimulus};

fn kind() -> impl Strategy<Value = GateKind> {
    prop::sample::select(GateKind::ALL.to_vec())
}

fn polarity() -> impl Strategy<Value = Polarity> {
    prop::sample::select(Polarity::BOTH.to_vec())
}

fn mode() -> impl Strategy<Value = GateMode> {
    prop::sample::select(vec![GateMode::Ideal, GateMode::Calibrated])
}

fn opts(mode: GateMode) -> GateRunOptions {
    GateRunOptions {
        mode,
        hold: 0.02,
        ..GateRunOptions::default()
    }
}

fn settled(kind: GateKind, programs: &[SpikeProgram; 2], mode: GateMode) -> Logic {
    run_gate(kind, programs, &Encoding::default(), &opts(mode))
        .unwrap()
        .final_value()
}

/// Shortest legal spacing between two spikes on one input.
fn gap() -> f64 {
    Encoding::default().min_separation(DEFAULT_TAU)
}

fn programs(a: Polarity, b: Polarity, t_b: f64) -> [SpikeProgram; 2] {
    [SpikeProgram::single(0.01, a), SpikeProgram::single(t_b, b)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn swapping_inputs_keeps_output(k in kind(), a in polarity(), b in polarity(), m in mode()) {
        let t_b = 0.01 + 2.0 * gap();
        let fwd = settled(k, &programs(a, b, t_b), m);
        let rev = settled(k, &[SpikeProgram::single(0.01, b), SpikeProgram::single(t_b, a)], m);
        prop_assert_eq!(fwd, rev);
    }

    #[test]
    fn inverted_gates_complement(a in polarity(), b in polarity(), m in mode()) {
        let p = programs(a, b, 0.03);
        for (plain, inv) in [(GateKind::And, GateKind::Nand), (GateKind::Or, GateKind::Nor)] {
            let x = settled(plain, &p, m).as_bool().unwrap();
            let y = settled(inv, &p, m).as_bool().unwrap();
            prop_assert_eq!(x, !y, "{} vs {}", plain, inv);
        }
    }

    #[test]
    fn repeated_spikes_are_idempotent(k in kind(), a in polarity(), b in polarity(), reps in 2usize..5, m in mode()) {
        let g = gap();
        let once = settled(k, &programs(a, b, 0.03), m);
        let times = (0..reps).map(|i| 0.01 + i as f64 * g);
        let in1 = SpikeProgram::new(times.map(|t| SpikeEvent::new(t, a)).collect());
        let t_b = in1.last_time().unwrap() + g;
        let many = settled(k, &[in1, SpikeProgram::single(t_b, b)], m);
        prop_assert_eq!(once, many);
    }

    #[test]
    fn one_spiked_input_is_undefined(k in kind(), a in polarity(), first in any::<bool>(), m in mode()) {
        let spiked = SpikeProgram::single(0.01, a);
        let p = if first {
            [spiked, SpikeProgram::new(Vec::new())]
        } else {
            [SpikeProgram::new(Vec::new()), spiked]
        };
        let run = run_gate(k, &p, &Encoding::default(), &opts(m)).unwrap();
        prop_assert!(run.readings.iter().all(|r| r.value == Logic::Undefined));
    }

    #[test]
    fn rendered_spikes_stay_in_band(a in polarity(), t in 0.0f64..0.5) {
        let enc = Encoding::default();
        let s = render_default(&SpikeProgram::single(t, a), &enc).unwrap();
        let want = enc.level(a);
        prop_assert_eq!(s.value_at(t + 0.5 * enc.pulse_width), want);
        prop_assert_eq!(s.value_at(t + 2.0 * enc.pulse_width), enc.rest);
        if t > 0.0 {
            prop_assert_eq!(s.value_at(0.0), enc.rest);
        }
    }
}

proptest! {
    // long rests are integrated step by step
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn extra_rest_keeps_decode(k in kind(), a in polarity(), b in polarity(), rest in 0.1f64..10.0, m in mode()) {
        let t_b = 0.01 + gap() + rest;
        let want = truth_table(k)
            .into_iter()
            .find(|&(x, y, _)| x == a && y == b)
            .map(|(_, _, v)| Logic::from_bool(v))
            .unwrap();
        prop_assert_eq!(settled(k, &programs(a, b, t_b), m), want);
    }
}

#[test]
fn empty_program_renders_rest() {
    let enc = Encoding::default();
    let s = render_default(&SpikeProgram::new(Vec::new()), &enc).unwrap();
    assert!(matches!(s, Stimulus::PiecewiseConstant { .. }));
    for t in [0.0, 0.01, 1.0] {
        assert_eq!(s.value_at(t), 250.0);
    }
}
