//! Cross-reference checks and resolution into a runnable scenario.

use std::collections::HashSet;

use super::doc::*;
use crate::analysis::{DcSweep, TuneTarget, DEFAULT_TOL};
use crate::device::{Calibration, DynamicsConfig, SchmittParams, SchmittTrigger};
use crate::graph::{
    build_network, stability_bound, Block, BlockKind, EvalMode, HeavisideParams, Net, Network,
    NetworkError, Stimulus,
};
use crate::logic::{
    render_stimulus, Encoding, GateKind, GateMode, GateRunOptions, SpikeEvent, SpikeProgram,
};
use crate::Error;

/// Step used by transient analyses that do not set `dt`.
pub const DEFAULT_DT: f64 = 5e-6;

#[derive(Debug, Clone)]
pub enum Analysis {
    DcSweep {
        source: String,
        probe: String,
        sweep: DcSweep,
    },
    Transient {
        t_stop: f64,
        dt: f64,
        record_every: usize,
    },
    MonteCarlo {
        block: String,
        trigger: SchmittTrigger,
        sigma: f64,
        runs: usize,
        mode: EvalMode,
    },
    Tunability {
        target: TuneTarget,
        lo: f64,
        hi: f64,
        points: usize,
        cal: Calibration,
        mode: EvalMode,
    },
    Gate {
        kind: GateKind,
        opts: GateRunOptions,
        programs: [SpikeProgram; 2],
    },
}

/// A validated scenario ready to execute.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Absent for analyses that build their own circuits.
    pub network: Option<Network>,
    pub stimuli: Vec<(String, Stimulus)>,
    pub encoding: Encoding,
    /// Block ids to record; empty means every probe block.
    pub probes: Vec<String>,
    pub analysis: Analysis,
    pub seed: u64,
}

impl Scenario {
    pub fn stimulus_refs(&self) -> Vec<(&str, Stimulus)> {
        self.stimuli
            .iter()
            .map(|(id, s)| (id.as_str(), s.clone()))
            .collect()
    }
}

struct Ctx {
    diags: Vec<Diagnostic>,
}

impl Ctx {
    fn err(&mut self, code: &'static str, loc: Loc, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, loc, msg));
    }

    fn err_id(&mut self, code: &'static str, loc: Loc, msg: impl Into<String>, id: &str) {
        self.diags
            .push(Diagnostic::error(code, loc, msg).with_id(id));
    }

    fn warn(&mut self, code: &'static str, loc: Loc, msg: impl Into<String>) {
        self.diags.push(Diagnostic::warning(code, loc, msg));
    }

    fn count(&self) -> usize {
        self.diags.iter().filter(|d| d.is_error()).count()
    }
}

fn loc_of(params: &[Param], key: &str, fallback: Loc) -> Loc {
    params.param(key).map_or(fallback, |p| p.loc)
}

fn trigger(b: &BlockDecl, cx: &mut Ctx) -> Option<SchmittTrigger> {
    let ps = &b.params;
    let base = SchmittParams::baseline();
    let p = SchmittParams {
        i_gain: ps.quantity("i_gain").unwrap_or(base.i_gain),
        i_thresh: ps.quantity("i_thresh").unwrap_or(base.i_thresh),
        i_width: ps.quantity("i_width").unwrap_or(base.i_width),
    };
    let mut ok = true;
    for (key, v) in [
        ("i_gain", p.i_gain),
        ("i_thresh", p.i_thresh),
        ("i_width", p.i_width),
    ] {
        if !(v > 0.0) {
            cx.err_id(
                "constraint",
                loc_of(ps, key, b.loc),
                format!(
                    "`{key}` of `{}` must be a positive current, got {v} pA",
                    b.id
                ),
                &b.id,
            );
            ok = false;
        }
    }
    if ok && p.i_width >= p.i_thresh {
        cx.err_id(
            "constraint",
            loc_of(ps, "i_width", b.loc),
            format!(
                "`{}`: i_width ({} pA) must be below i_thresh ({} pA) for the trigger to be bistable",
                b.id, p.i_width, p.i_thresh
            ),
            &b.id,
        );
        ok = false;
    }
    let mut cal = match ps.word("cal") {
        Some("ideal") => Calibration::ideal(),
        _ => Calibration::default(),
    };
    if let Some(v) = ps.quantity("gain_offset") {
        cal.gain_offset = v;
    }
    if let Some(v) = ps.quantity("thresh_offset") {
        cal.thresh_offset = v;
    }
    if let Some(v) = ps.quantity("width_offset") {
        cal.width_offset = v;
    }
    let d = DynamicsConfig::default();
    let dy = DynamicsConfig {
        tau_fb: ps.quantity("tau_fb").unwrap_or(d.tau_fb),
        tau_out: ps.quantity("tau_out").unwrap_or(d.tau_out),
        steepness_k: ps.quantity("steepness_k").unwrap_or(d.steepness_k),
        overshoot_coupling: ps
            .number("overshoot_coupling")
            .unwrap_or(d.overshoot_coupling),
        temp_thresh_drift: ps
            .quantity("temp_thresh_drift")
            .unwrap_or(d.temp_thresh_drift),
        temperature: ps.quantity("temperature").unwrap_or(d.temperature),
    };
    if let Err(e) = dy.validate() {
        cx.err_id("constraint", b.loc, format!("`{}`: {e}", b.id), &b.id);
        ok = false;
    }
    if !ok {
        return None;
    }
    match SchmittTrigger::new(p, cal, dy) {
        Ok(t) => Some(t),
        Err(e) => {
            cx.err_id("constraint", b.loc, format!("`{}`: {e}", b.id), &b.id);
            None
        }
    }
}

fn block(b: &BlockDecl, cx: &mut Ctx) -> Option<Block> {
    let kind = match b.kind {
        BlockType::Source => BlockKind::Source,
        BlockType::Probe => BlockKind::Probe,
        BlockType::Schmitt => BlockKind::Schmitt(trigger(b, cx)?),
        BlockType::InvSchmitt => BlockKind::InvSchmitt(trigger(b, cx)?),
        BlockType::Heaviside => {
            let h = HeavisideParams {
                threshold: b.params.quantity("threshold")?,
                gain: b.params.quantity("gain")?,
                k: b.params.quantity("steepness_k").unwrap_or(1.0),
            };
            if h.gain < 0.0 || h.threshold < 0.0 || h.k <= 0.0 {
                cx.err_id(
                    "constraint",
                    b.loc,
                    format!(
                        "`{}`: heaviside needs threshold, gain >= 0 and steepness_k > 0",
                        b.id
                    ),
                    &b.id,
                );
                return None;
            }
            BlockKind::Heaviside(h)
        }
    };
    Some(Block::new(b.id.clone(), kind))
}

fn network(doc: &ScenarioDoc, cx: &mut Ctx) -> Option<Network> {
    let before = cx.count();
    let blocks: Vec<Option<Block>> = doc.blocks.iter().map(|b| block(b, cx)).collect();
    let mut driven: HashSet<&str> = HashSet::new();
    for n in &doc.nets {
        let mut ends_ok = true;
        for end in [&n.driver, &n.sink] {
            if doc.block(end).is_none() {
                cx.err_id(
                    "unknown-id",
                    n.loc,
                    format!(
                        "net {} -> {} references undeclared block `{end}`",
                        n.driver, n.sink
                    ),
                    end,
                );
                ends_ok = false;
            }
        }
        if !ends_ok {
            continue;
        }
        if doc
            .block(&n.sink)
            .is_some_and(|b| b.kind == BlockType::Source)
        {
            cx.err_id(
                "topology",
                n.loc,
                format!("source `{}` cannot be driven", n.sink),
                &n.sink,
            );
        }
        if doc
            .block(&n.driver)
            .is_some_and(|b| b.kind == BlockType::Probe)
        {
            cx.err_id(
                "topology",
                n.loc,
                format!("probe `{}` cannot drive other blocks", n.driver),
                &n.driver,
            );
        }
        driven.insert(&n.sink);
    }
    for b in &doc.blocks {
        if b.kind != BlockType::Source && !driven.contains(b.id.as_str()) {
            cx.err_id(
                "topology",
                b.loc,
                format!("input of `{}` is not driven by any net", b.id),
                &b.id,
            );
        }
    }
    if cx.count() > before {
        return None;
    }
    // a block rejected during parsing has no compile diagnostic of its own
    let blocks: Vec<Block> = blocks.into_iter().collect::<Option<_>>()?;
    let nets: Vec<Net> = doc
        .nets
        .iter()
        .map(|n| Net::new(n.driver.clone(), n.sink.clone()))
        .collect();
    match build_network(blocks, &nets) {
        Ok(net) => Some(net),
        Err(e) => {
            let (loc, id) = match &e {
                NetworkError::Cycle(ids) => (
                    doc.nets
                        .iter()
                        .find(|n| ids.contains(&n.driver) && ids.contains(&n.sink))
                        .map_or(Loc::new(1, 1), |n| n.loc),
                    ids.first().cloned(),
                ),
                _ => (Loc::new(1, 1), None),
            };
            let mut d = Diagnostic::error("topology", loc, e.to_string());
            d.id = id;
            cx.diags.push(d);
            None
        }
    }
}

fn encoding(doc: &ScenarioDoc, cx: &mut Ctx) -> Encoding {
    let d = Encoding::default();
    let Some(e) = &doc.encoding else {
        return d;
    };
    let enc = Encoding {
        level0: e.params.quantity("level0").unwrap_or(d.level0),
        rest: e.params.quantity("rest").unwrap_or(d.rest),
        level1: e.params.quantity("level1").unwrap_or(d.level1),
        pulse_width: e.params.quantity("pulse_width").unwrap_or(d.pulse_width),
    };
    if let Err(err) = enc.validate() {
        cx.err("constraint", e.loc, err.to_string());
        return d;
    }
    enc
}

fn program(s: &StimulusDecl) -> SpikeProgram {
    SpikeProgram::new(
        s.events
            .iter()
            .map(|e| SpikeEvent::new(e.time.base(), e.polarity))
            .collect(),
    )
}

fn stimulus(s: &StimulusDecl, enc: &Encoding, max_tau: f64, cx: &mut Ctx) -> Option<Stimulus> {
    let q = |k: &str| s.params.quantity(k);
    let stim = match s.kind {
        StimulusKind::Constant => Stimulus::Constant { value: q("value")? },
        StimulusKind::Triangle => Stimulus::Triangle {
            lo: q("lo")?,
            hi: q("hi")?,
            period: q("period")?,
        },
        StimulusKind::Step => Stimulus::Step {
            from: q("from")?,
            to: q("to")?,
            at: q("at")?,
        },
        StimulusKind::Spikes => match render_stimulus(&program(s), enc, max_tau) {
            Ok(st) => st,
            Err(Error::SpikeSeparation {
                first,
                second,
                min_gap,
            }) => {
                let loc = s
                    .events
                    .iter()
                    .find(|e| e.time.base() == second)
                    .map_or(s.loc, |e| e.loc);
                cx.err_id(
                    "separation",
                    loc,
                    format!(
                        "spikes on `{}` at {first} s and {second} s are closer than {min_gap} s",
                        s.target
                    ),
                    &s.target,
                );
                return None;
            }
            Err(e) => {
                cx.err_id("stimulus", s.loc, e.to_string(), &s.target);
                return None;
            }
        },
    };
    if let Err(e) = stim.validate() {
        cx.err_id("stimulus", s.loc, format!("`{}`: {e}", s.target), &s.target);
        return None;
    }
    Some(stim)
}

fn eval_mode(ps: &[Param]) -> EvalMode {
    match ps.word("mode") {
        Some("smooth") => EvalMode::Smooth,
        _ => EvalMode::Ideal,
    }
}

fn analysis(
    doc: &ScenarioDoc,
    a: &AnalysisDecl,
    net: Option<&Network>,
    cx: &mut Ctx,
) -> Option<Analysis> {
    let ps = &a.params;
    let block_of = |key: &str| ps.word(key).and_then(|id| doc.block(id).map(|b| (id, b)));
    let unknown = |cx: &mut Ctx, key: &str| {
        let id = ps.word(key).unwrap_or_default();
        cx.err_id(
            "unknown-id",
            loc_of(ps, key, a.loc),
            format!("`{key}` refers to undeclared block `{id}`"),
            id,
        );
    };
    match a.kind {
        AnalysisKind::DcSweep => {
            let mut ok = true;
            match block_of("source") {
                Some((_, b)) if b.kind == BlockType::Source => {}
                Some((id, _)) => {
                    cx.err_id(
                        "analysis",
                        loc_of(ps, "source", a.loc),
                        format!("`{id}` is not a source block"),
                        id,
                    );
                    ok = false;
                }
                None => {
                    unknown(cx, "source");
                    ok = false;
                }
            }
            if block_of("probe").is_none() {
                unknown(cx, "probe");
                ok = false;
            }
            let sweep = DcSweep {
                lo: ps.quantity("lo").unwrap_or(0.0),
                hi: ps.quantity("hi")?,
                steps: ps.count("steps").unwrap_or(200) as usize,
                mode: eval_mode(ps),
                tol: DEFAULT_TOL,
            };
            if let Err(e) = sweep.validate() {
                cx.err("analysis", a.loc, e.to_string());
                ok = false;
            }
            ok.then(|| Analysis::DcSweep {
                source: ps.word("source").unwrap_or_default().to_string(),
                probe: ps.word("probe").unwrap_or_default().to_string(),
                sweep,
            })
        }
        AnalysisKind::Transient => {
            let t_stop = ps.quantity("t_stop")?;
            let dt = ps.quantity("dt").unwrap_or(DEFAULT_DT);
            let mut ok = true;
            if !(t_stop > 0.0) {
                cx.err(
                    "analysis",
                    loc_of(ps, "t_stop", a.loc),
                    "t_stop must be positive",
                );
                ok = false;
            }
            if !(dt > 0.0) {
                cx.err("analysis", loc_of(ps, "dt", a.loc), "dt must be positive");
                ok = false;
            } else if let Some(net) = net {
                let bound = stability_bound(net);
                if dt > bound * (1.0 + 1e-9) {
                    cx.err(
                        "analysis",
                        loc_of(ps, "dt", a.loc),
                        format!("dt {dt} s exceeds the stability bound {bound} s (min tau / 20)"),
                    );
                    ok = false;
                }
            }
            if ok && t_stop / dt > 5e8 {
                cx.err("analysis", a.loc, "transient needs more than 5e8 steps");
                ok = false;
            }
            ok.then(|| Analysis::Transient {
                t_stop,
                dt,
                record_every: ps.count("record_every").unwrap_or(1).max(1) as usize,
            })
        }
        AnalysisKind::MonteCarlo => {
            let sigma = ps.quantity("sigma").unwrap_or(10.0);
            let runs = ps.count("runs").unwrap_or(500) as usize;
            let mut ok = true;
            if !(sigma >= 0.0) {
                cx.err("analysis", loc_of(ps, "sigma", a.loc), "sigma must be >= 0");
                ok = false;
            }
            if runs == 0 || runs > 10_000_000 {
                cx.err(
                    "analysis",
                    loc_of(ps, "runs", a.loc),
                    "runs must be in 1..=10000000",
                );
                ok = false;
            }
            let trig = match block_of("block") {
                Some((id, b)) => match b.kind {
                    BlockType::Schmitt | BlockType::InvSchmitt => net
                        .and_then(|n| n.block(id))
                        .and_then(|b| b.kind.trigger().copied()),
                    _ => {
                        cx.err_id(
                            "analysis",
                            loc_of(ps, "block", a.loc),
                            format!("`{id}` is not a trigger block"),
                            id,
                        );
                        None
                    }
                },
                None => {
                    unknown(cx, "block");
                    None
                }
            };
            let trigger = trig?;
            ok.then(|| Analysis::MonteCarlo {
                block: ps.word("block").unwrap_or_default().to_string(),
                trigger,
                sigma,
                runs,
                mode: eval_mode(ps),
            })
        }
        AnalysisKind::Tunability => {
            let target: TuneTarget = ps.word("target")?.parse().ok()?;
            let (dlo, dhi) = target.default_range();
            let lo = ps.quantity("lo").unwrap_or(dlo);
            let hi = ps.quantity("hi").unwrap_or(dhi);
            let points = ps.count("points").unwrap_or(16) as usize;
            let mut ok = true;
            if !(lo > 0.0 && lo < hi) {
                cx.err(
                    "analysis",
                    a.loc,
                    format!("tunability needs 0 < lo < hi (lo={lo}, hi={hi})"),
                );
                ok = false;
            }
            if !(2..=100_000).contains(&points) {
                cx.err(
                    "analysis",
                    loc_of(ps, "points", a.loc),
                    "points must be in 2..=100000",
                );
                ok = false;
            }
            let cal = match ps.word("cal") {
                Some("ideal") => Calibration::ideal(),
                _ => Calibration::default(),
            };
            ok.then(|| Analysis::Tunability {
                target,
                lo,
                hi,
                points,
                cal,
                mode: eval_mode(ps),
            })
        }
        AnalysisKind::Gate => {
            let kind: GateKind = ps.word("kind")?.parse().ok()?;
            let mode = match ps.word("mode") {
                Some("ideal") => GateMode::Ideal,
                _ => GateMode::Calibrated,
            };
            let hold = ps
                .quantity("hold")
                .unwrap_or(GateRunOptions::default().hold);
            let mut ok = true;
            if !(hold >= 0.0) {
                cx.err("analysis", loc_of(ps, "hold", a.loc), "hold must be >= 0");
                ok = false;
            }
            if !doc.blocks.is_empty() {
                cx.warn(
                    "unused",
                    doc.blocks[0].loc,
                    "gate analysis builds its own circuit; declared blocks are ignored",
                );
            }
            let mut programs: [SpikeProgram; 2] = Default::default();
            for (slot, id) in ["in1", "in2"].into_iter().enumerate() {
                match doc.stimulus(id) {
                    Some(s) if s.kind == StimulusKind::Spikes => programs[slot] = program(s),
                    Some(s) => {
                        cx.err_id(
                            "analysis",
                            s.loc,
                            format!("gate input `{id}` needs a spikes stimulus"),
                            id,
                        );
                        ok = false;
                    }
                    None => {}
                }
            }
            for s in &doc.stimuli {
                if s.target != "in1" && s.target != "in2" {
                    cx.err_id(
                        "unknown-id",
                        s.loc,
                        format!("gate inputs are `in1` and `in2`, not `{}`", s.target),
                        &s.target,
                    );
                    ok = false;
                }
            }
            ok.then_some(Analysis::Gate {
                kind,
                opts: GateRunOptions {
                    mode,
                    hold,
                    record_every: 0,
                },
                programs,
            })
        }
    }
}

/// Check a parsed document and resolve it. The diagnostics are complete
/// whether or not resolution succeeds.
pub fn compile(doc: &ScenarioDoc) -> (Option<Scenario>, Vec<Diagnostic>) {
    let mut cx = Ctx { diags: Vec::new() };
    let gate = doc
        .analysis
        .as_ref()
        .is_some_and(|a| a.kind == AnalysisKind::Gate);
    let net = if gate { None } else { network(doc, &mut cx) };
    let enc = encoding(doc, &mut cx);
    let max_tau = match &net {
        Some(n) => n
            .triggers()
            .map(|t| t.dynamics.max_tau())
            .fold(DynamicsConfig::default().max_tau(), f64::max),
        None => DynamicsConfig::default().max_tau(),
    };

    let mut stimuli = Vec::new();
    for s in &doc.stimuli {
        if !gate {
            match doc.block(&s.target) {
                None => {
                    cx.err_id(
                        "unknown-id",
                        s.loc,
                        format!("stimulus targets undeclared block `{}`", s.target),
                        &s.target,
                    );
                    continue;
                }
                Some(b) if b.kind != BlockType::Source => {
                    cx.err_id(
                        "stimulus",
                        s.loc,
                        format!("stimulus target `{}` is not a source block", s.target),
                        &s.target,
                    );
                    continue;
                }
                _ => {}
            }
        }
        if let Some(st) = stimulus(s, &enc, max_tau, &mut cx) {
            stimuli.push((s.target.clone(), st));
        }
    }

    for p in &doc.probes {
        let known = if gate {
            ["in1", "in2", "out"].contains(&p.id.as_str())
        } else {
            doc.block(&p.id).is_some()
        };
        if !known {
            cx.err_id(
                "unknown-id",
                p.loc,
                format!("probe references undeclared block `{}`", p.id),
                &p.id,
            );
        }
    }

    let analysis = match &doc.analysis {
        Some(a) => {
            if doc.seed.is_some() && a.kind != AnalysisKind::MonteCarlo {
                cx.warn("unused", a.loc, "seed only affects monte_carlo analyses");
            }
            if !gate && a.kind != AnalysisKind::Tunability && net.is_none() && cx.count() == 0 {
                cx.err("analysis", a.loc, "analysis needs a network");
            }
            analysis(doc, a, net.as_ref(), &mut cx)
        }
        None => {
            cx.err(
                "analysis-count",
                Loc::new(1, 1),
                "scenario has no analysis line",
            );
            None
        }
    };

    let scenario = match analysis {
        Some(analysis) if cx.count() == 0 => Some(Scenario {
            network: net,
            stimuli,
            encoding: enc,
            probes: doc.probes.iter().map(|p| p.id.clone()).collect(),
            analysis,
            seed: doc.seed.unwrap_or(0),
        }),
        _ => None,
    };
    (scenario, cx.diags)
}

/// Cross-reference diagnostics for a parsed document.
pub fn validate_scenario(doc: &ScenarioDoc) -> Vec<Diagnostic> {
    compile(doc).1
}

/// Result of checking scenario text end to end.
#[derive(Debug, Clone)]
pub struct Checked {
    pub doc: ScenarioDoc,
    pub scenario: Option<Scenario>,
    /// Parse and validation diagnostics, in line order.
    pub diagnostics: Vec<Diagnostic>,
}

impl Checked {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }
}

/// Parse, validate and resolve in one pass, reporting every problem found.
pub fn check_scenario(text: &str) -> Checked {
    let (doc, mut diags) = super::parse::parse_lenient(text);
    let (scenario, more) = compile(&doc);
    diags.extend(more);
    diags.sort_by_key(|d| (d.line, d.col));
    let scenario = if has_errors(&diags) { None } else { scenario };
    Checked {
        doc,
        scenario,
        diagnostics: diags,
    }
}

/// [`check_scenario`] for raw bytes; invalid UTF-8 is a diagnostic.
pub fn check_bytes(bytes: &[u8]) -> Checked {
    match std::str::from_utf8(bytes) {
        Ok(s) => check_scenario(s),
        Err(e) => {
            let line = bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1;
            Checked {
                doc: ScenarioDoc::default(),
                scenario: None,
                diagnostics: vec![Diagnostic::error(
                    "encoding",
                    Loc::new(line, 1),
                    "scenario is not valid UTF-8",
                )],
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "version 1\nblock in source\nblock st schmitt\nblock out probe\nnet in -> st\nnet st -> out\n";

    fn check(extra: &str) -> Checked {
        check_scenario(&format!("{BASE}{extra}"))
    }

    #[test]
    fn block_missing_required_key_is_reported_not_fatal() {
        let c = check_scenario(
            "version 1\nblock in source\nblock h heaviside thresh=250pA gain=500pA\nblock out probe\n\
             net in -> h\nnet h -> out\nanalysis transient t_stop=1ms\n",
        );
        assert!(c.scenario.is_none());
        let codes: Vec<_> = c.diagnostics.iter().map(|d| d.code).collect();
        assert!(
            codes.contains(&"unknown-key") && codes.contains(&"missing-key"),
            "{codes:?}"
        );
    }

    #[test]
    fn valid_doc_is_clean() {
        let c = check("stimulus in triangle lo=0pA hi=500pA period=200ms\nprobe out\nanalysis transient t_stop=100ms\n");
        assert!(c.diagnostics.is_empty(), "{:?}", c.diagnostics);
        assert!(c.scenario.is_some());
    }

    #[test]
    fn width_above_threshold_cites_bistability() {
        let c = check_scenario(
            "version 1\nblock in source\nblock st schmitt i_thresh=368pA i_width=400pA\nblock out probe\nnet in -> st\nnet st -> out\nanalysis dc_sweep source=in probe=out hi=500pA\n",
        );
        assert_eq!(c.diagnostics.len(), 1);
        assert_eq!(c.diagnostics[0].code, "constraint");
        assert!(c.diagnostics[0].message.contains("bistable"));
    }

    #[test]
    fn undeclared_probe() {
        let c = check("probe nowhere\nanalysis transient t_stop=1ms\n");
        assert_eq!(c.diagnostics.len(), 1);
        assert_eq!(c.diagnostics[0].code, "unknown-id");
        assert_eq!(c.diagnostics[0].id.as_deref(), Some("nowhere"));
    }

    #[test]
    fn close_spikes() {
        let c = check("stimulus in spikes +@10ms -@11ms\nanalysis transient t_stop=50ms\n");
        assert_eq!(c.diagnostics.len(), 1);
        assert_eq!(c.diagnostics[0].code, "separation");
    }

    #[test]
    fn dt_above_bound() {
        let c = check("analysis transient t_stop=10ms dt=10us\n");
        assert_eq!(c.diagnostics[0].code, "analysis");
        assert!(c.diagnostics[0].message.contains("stability bound"));
    }

    #[test]
    fn missing_analysis_and_cycle() {
        let c = check_scenario(
            "version 1\nblock in source\nblock a heaviside threshold=1pA gain=1pA\nblock b heaviside threshold=1pA gain=1pA\nnet in -> a\nnet a -> b\nnet b -> a\n",
        );
        let codes: Vec<_> = c.diagnostics.iter().map(|d| d.code).collect();
        assert!(
            codes.contains(&"topology") && codes.contains(&"analysis-count"),
            "{codes:?}"
        );
    }

    #[test]
    fn gate_scenario_resolves() {
        let c = check_scenario(
            "version 1\nstimulus in1 spikes +@10ms\nstimulus in2 spikes -@30ms\nanalysis gate kind=xor\n",
        );
        assert!(c.diagnostics.is_empty(), "{:?}", c.diagnostics);
        assert!(matches!(
            c.scenario.unwrap().analysis,
            Analysis::Gate {
                kind: GateKind::Xor,
                ..
            }
        ));
    }

    #[test]
    fn invalid_utf8() {
        let c = check_bytes(b"version 1\n\xff\n");
        assert_eq!(c.diagnostics[0].code, "encoding");
        assert_eq!(c.diagnostics[0].line, 2);
    }
}
