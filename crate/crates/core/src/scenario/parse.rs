use super::doc::*;
use super::schema::{suggest, KeySpec, ValueKind};
use crate::logic::Polarity;

/// Longest line the parser will look at.
const MAX_LINE: usize = 4096;

pub const VERSION: u32 = 1;

const DIRECTIVES: &[&str] = &[
    "version", "block", "net", "stimulus", "encoding", "probe", "analysis", "seed",
];

struct Token<'a> {
    text: &'a str,
    loc: Loc,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    for (i, c) in line.char_indices() {
        col += 1;
        if c.is_whitespace() {
            if let Some((s, sc)) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    loc: Loc::new(line_no, sc),
                });
            }
        } else if start.is_none() {
            start = Some((i, col));
        }
    }
    if let Some((s, sc)) = start {
        out.push(Token {
            text: &line[s..],
            loc: Loc::new(line_no, sc),
        });
    }
    out
}

pub fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    c.next()
        .is_some_and(|f| f.is_ascii_alphabetic() || f == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// Split a leading decimal number off `s`.
fn scan_number(s: &str) -> Option<(f64, &str)> {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac;
    }
    if digits == 0 {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let exp = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp {
            i = j;
        }
    }
    let v: f64 = s[..i].parse().ok()?;
    Some((v, &s[i..]))
}

fn parse_value(spec: &KeySpec, raw: &str, loc: Loc, diags: &mut Vec<Diagnostic>) -> Option<Value> {
    let key = spec.key;
    let bad_number = |diags: &mut Vec<Diagnostic>| {
        diags.push(
            Diagnostic::error(
                "value",
                loc,
                format!("`{raw}` is not a valid number for `{key}`"),
            )
            .with_id(key),
        );
        None
    };
    match spec.kind {
        ValueKind::Quantity(dim) => {
            let Some((v, rest)) = scan_number(raw) else {
                return bad_number(diags);
            };
            if !v.is_finite() {
                return bad_number(diags);
            }
            if rest.is_empty() {
                diags.push(
                    Diagnostic::error(
                        "unit",
                        loc,
                        format!("`{key}` needs an explicit unit: expected {dim}"),
                    )
                    .with_id(key),
                );
                return None;
            }
            match Unit::from_symbol(rest) {
                Some(u) if u.dimension() == dim => Some(Value::Quantity(Quantity::new(v, u))),
                Some(u) => {
                    diags.push(
                        Diagnostic::error(
                            "unit",
                            loc,
                            format!(
                                "unit mismatch for `{key}`: `{}` is {}, expected {dim}",
                                u.symbol(),
                                u.dimension()
                            ),
                        )
                        .with_id(key),
                    );
                    None
                }
                None => {
                    diags.push(
                        Diagnostic::error(
                            "unit",
                            loc,
                            format!("unknown unit `{rest}` for `{key}`: expected {dim}"),
                        )
                        .with_id(key),
                    );
                    None
                }
            }
        }
        ValueKind::Number => match scan_number(raw) {
            Some((v, "")) if v.is_finite() => Some(Value::Number(v)),
            Some((_, rest)) if Unit::from_symbol(rest).is_some() => {
                diags.push(
                    Diagnostic::error(
                        "unit",
                        loc,
                        format!("`{key}` is dimensionless; drop the `{rest}` suffix"),
                    )
                    .with_id(key),
                );
                None
            }
            _ => bad_number(diags),
        },
        ValueKind::Count => {
            if !raw.is_empty() && raw.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(n) = raw.parse() {
                    return Some(Value::Count(n));
                }
            }
            diags.push(
                Diagnostic::error(
                    "value",
                    loc,
                    format!("`{key}` needs a non-negative integer, got `{raw}`"),
                )
                .with_id(key),
            );
            None
        }
        ValueKind::Ident => {
            if is_ident(raw) {
                Some(Value::Word(raw.to_string()))
            } else {
                diags.push(
                    Diagnostic::error("value", loc, format!("`{raw}` is not a block id"))
                        .with_id(key),
                );
                None
            }
        }
        ValueKind::Choice(options) => {
            if options.contains(&raw) {
                return Some(Value::Word(raw.to_string()));
            }
            let mut msg = format!(
                "`{raw}` is not a valid `{key}` (expected one of: {})",
                options.join(", ")
            );
            if let Some(s) = suggest(raw, options.iter().copied()) {
                msg.push_str(&format!("; did you mean `{s}`?"));
            }
            diags.push(Diagnostic::error("value", loc, msg).with_id(key));
            None
        }
    }
}

/// Parse `key=value` tokens against `schema`, returned in schema order.
fn parse_params(
    what: &str,
    schema: &[KeySpec],
    toks: &[Token],
    at: Loc,
    diags: &mut Vec<Diagnostic>,
) -> Vec<Param> {
    let mut out: Vec<(usize, Param)> = Vec::new();
    for t in toks {
        let Some((key, raw)) = t.text.split_once('=') else {
            diags.push(Diagnostic::error(
                "syntax",
                t.loc,
                format!("expected key=value, found `{}`", t.text),
            ));
            continue;
        };
        let Some(idx) = schema.iter().position(|s| s.key == key) else {
            let mut msg = format!("unknown key `{key}` for {what}");
            if let Some(s) = suggest(key, schema.iter().map(|s| s.key)) {
                msg.push_str(&format!("; did you mean `{s}`?"));
            }
            diags.push(Diagnostic::error("unknown-key", t.loc, msg).with_id(key));
            continue;
        };
        if out.iter().any(|(i, _)| *i == idx) {
            diags.push(
                Diagnostic::error("duplicate-key", t.loc, format!("`{key}` given twice"))
                    .with_id(key),
            );
            continue;
        }
        if let Some(value) = parse_value(&schema[idx], raw, t.loc, diags) {
            out.push((
                idx,
                Param {
                    key: key.to_string(),
                    value,
                    loc: t.loc,
                },
            ));
        }
    }
    for (i, spec) in schema.iter().enumerate() {
        if spec.required && !out.iter().any(|(j, _)| *j == i) {
            // a rejected value was already reported under its own code
            let reported = diags
                .iter()
                .any(|d| d.line == at.line && d.id.as_deref() == Some(spec.key));
            if !reported {
                diags.push(
                    Diagnostic::error("missing-key", at, format!("{what} needs `{}`", spec.key))
                        .with_id(spec.key),
                );
            }
        }
    }
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, p)| p).collect()
}

fn ident<'a>(t: &Token<'a>, what: &str, diags: &mut Vec<Diagnostic>) -> Option<&'a str> {
    if is_ident(t.text) {
        Some(t.text)
    } else {
        diags.push(Diagnostic::error(
            "syntax",
            t.loc,
            format!("`{}` is not a valid {what} id", t.text),
        ));
        None
    }
}

fn keyword<T: Copy>(
    t: &Token,
    what: &str,
    all: &[T],
    kw: impl Fn(T) -> &'static str,
    diags: &mut Vec<Diagnostic>,
) -> Option<T> {
    if let Some(k) = all.iter().copied().find(|&k| kw(k) == t.text) {
        return Some(k);
    }
    let mut msg = format!("unknown {what} `{}`", t.text);
    if let Some(s) = suggest(t.text, all.iter().map(|&k| kw(k))) {
        msg.push_str(&format!("; did you mean `{s}`?"));
    }
    diags.push(Diagnostic::error("unknown-kind", t.loc, msg).with_id(t.text));
    None
}

fn spike(t: &Token, diags: &mut Vec<Diagnostic>) -> Option<SpikeDecl> {
    let parsed = t.text.split_once('@').and_then(|(p, time)| {
        let polarity = match p {
            "+" => Polarity::Pos,
            "-" => Polarity::Neg,
            _ => return None,
        };
        Some((polarity, time))
    });
    let Some((polarity, time)) = parsed else {
        diags.push(Diagnostic::error(
            "syntax",
            t.loc,
            format!("expected a spike like +@10ms or -@30ms, found `{}`", t.text),
        ));
        return None;
    };
    const TIME: KeySpec = KeySpec {
        key: "spike time",
        kind: ValueKind::Quantity(super::schema::Dimension::Time),
        required: true,
    };
    match parse_value(&TIME, time, t.loc, diags)? {
        Value::Quantity(q) => Some(SpikeDecl {
            polarity,
            time: q,
            loc: t.loc,
        }),
        _ => None,
    }
}

struct Parser {
    doc: ScenarioDoc,
    diags: Vec<Diagnostic>,
    version_seen: bool,
    seed_seen: bool,
}

impl Parser {
    fn arity(&mut self, toks: &[Token], min: usize, usage: &str) -> bool {
        if toks.len() < min {
            self.diags.push(Diagnostic::error(
                "syntax",
                toks[0].loc,
                format!("expected `{usage}`"),
            ));
            false
        } else {
            true
        }
    }

    fn line(&mut self, toks: &[Token]) {
        let head = &toks[0];
        let d = &mut self.diags;
        match head.text {
            "version" => {
                if toks.len() != 2 {
                    d.push(Diagnostic::error(
                        "syntax",
                        head.loc,
                        "expected `version 1`",
                    ));
                    return;
                }
                if self.version_seen {
                    d.push(Diagnostic::error(
                        "duplicate",
                        head.loc,
                        "version given twice",
                    ));
                    return;
                }
                self.version_seen = true;
                match toks[1].text.parse::<u32>() {
                    Ok(VERSION) => self.doc.version = VERSION,
                    _ => d.push(Diagnostic::error(
                        "version",
                        toks[1].loc,
                        format!(
                            "unsupported version `{}` (expected {VERSION})",
                            toks[1].text
                        ),
                    )),
                }
            }
            "block" => {
                if !self.arity(toks, 3, "block <id> <kind> [key=value ...]") {
                    return;
                }
                let d = &mut self.diags;
                let id = ident(&toks[1], "block", d);
                let kind = keyword(
                    &toks[2],
                    "block kind",
                    BlockType::ALL,
                    BlockType::keyword,
                    d,
                );
                let (Some(id), Some(kind)) = (id, kind) else {
                    return;
                };
                let params = parse_params(kind.keyword(), kind.schema(), &toks[3..], head.loc, d);
                if self.doc.block(id).is_some() {
                    d.push(
                        Diagnostic::error(
                            "duplicate-id",
                            toks[1].loc,
                            format!("block `{id}` declared twice"),
                        )
                        .with_id(id),
                    );
                    return;
                }
                self.doc.blocks.push(BlockDecl {
                    id: id.to_string(),
                    kind,
                    params,
                    loc: head.loc,
                });
            }
            "net" => {
                if toks.len() != 4 || toks[2].text != "->" {
                    d.push(Diagnostic::error(
                        "syntax",
                        head.loc,
                        "expected `net <driver> -> <sink>`",
                    ));
                    return;
                }
                let a = ident(&toks[1], "block", d);
                let b = ident(&toks[3], "block", d);
                if let (Some(a), Some(b)) = (a, b) {
                    self.doc.nets.push(NetDecl {
                        driver: a.to_string(),
                        sink: b.to_string(),
                        loc: head.loc,
                    });
                }
            }
            "stimulus" => {
                if !self.arity(toks, 3, "stimulus <source> <kind> ...") {
                    return;
                }
                let d = &mut self.diags;
                let target = ident(&toks[1], "source", d);
                let kind = keyword(
                    &toks[2],
                    "stimulus kind",
                    StimulusKind::ALL,
                    StimulusKind::keyword,
                    d,
                );
                let (Some(target), Some(kind)) = (target, kind) else {
                    return;
                };
                let (params, events) = if kind == StimulusKind::Spikes {
                    (
                        Vec::new(),
                        toks[3..].iter().filter_map(|t| spike(t, d)).collect(),
                    )
                } else {
                    let what = format!("{} stimulus", kind.keyword());
                    (
                        parse_params(&what, kind.schema(), &toks[3..], head.loc, d),
                        Vec::new(),
                    )
                };
                if self.doc.stimulus(target).is_some() {
                    d.push(
                        Diagnostic::error(
                            "duplicate-id",
                            toks[1].loc,
                            format!("source `{target}` already has a stimulus"),
                        )
                        .with_id(target),
                    );
                    return;
                }
                self.doc.stimuli.push(StimulusDecl {
                    target: target.to_string(),
                    kind,
                    params,
                    events,
                    loc: head.loc,
                });
            }
            "encoding" => {
                let params =
                    parse_params("encoding", super::schema::ENCODING, &toks[1..], head.loc, d);
                if self.doc.encoding.is_some() {
                    d.push(Diagnostic::error(
                        "duplicate",
                        head.loc,
                        "encoding given twice",
                    ));
                    return;
                }
                self.doc.encoding = Some(EncodingDecl {
                    params,
                    loc: head.loc,
                });
            }
            "probe" => {
                if !self.arity(toks, 2, "probe <block> ...") {
                    return;
                }
                for t in &toks[1..] {
                    let Some(id) = ident(t, "block", &mut self.diags) else {
                        continue;
                    };
                    if self.doc.probes.iter().any(|p| p.id == id) {
                        self.diags.push(
                            Diagnostic::warning(
                                "duplicate-probe",
                                t.loc,
                                format!("`{id}` is already probed"),
                            )
                            .with_id(id),
                        );
                        continue;
                    }
                    self.doc.probes.push(ProbeDecl {
                        id: id.to_string(),
                        loc: t.loc,
                    });
                }
            }
            "analysis" => {
                if !self.arity(toks, 2, "analysis <kind> [key=value ...]") {
                    return;
                }
                let d = &mut self.diags;
                let Some(kind) = keyword(
                    &toks[1],
                    "analysis",
                    AnalysisKind::ALL,
                    AnalysisKind::keyword,
                    d,
                ) else {
                    return;
                };
                let what = format!("{} analysis", kind.keyword());
                let params = parse_params(&what, kind.schema(), &toks[2..], head.loc, d);
                if self.doc.analysis.is_some() {
                    d.push(Diagnostic::error(
                        "analysis-count",
                        head.loc,
                        "only one analysis per scenario",
                    ));
                    return;
                }
                self.doc.analysis = Some(AnalysisDecl {
                    kind,
                    params,
                    loc: head.loc,
                });
            }
            "seed" => {
                if toks.len() != 2 {
                    d.push(Diagnostic::error(
                        "syntax",
                        head.loc,
                        "expected `seed <integer>`",
                    ));
                    return;
                }
                if self.seed_seen {
                    d.push(Diagnostic::error("duplicate", head.loc, "seed given twice"));
                    return;
                }
                self.seed_seen = true;
                match toks[1].text.parse::<u64>() {
                    Ok(s) if toks[1].text.bytes().all(|b| b.is_ascii_digit()) => {
                        self.doc.seed = Some(s)
                    }
                    _ => d.push(Diagnostic::error(
                        "value",
                        toks[1].loc,
                        format!(
                            "seed must be a non-negative integer, got `{}`",
                            toks[1].text
                        ),
                    )),
                }
            }
            other => {
                let mut msg = format!("unknown directive `{other}`");
                if let Some(s) = suggest(other, DIRECTIVES.iter().copied()) {
                    msg.push_str(&format!("; did you mean `{s}`?"));
                }
                d.push(Diagnostic::error("unknown-directive", head.loc, msg).with_id(other));
            }
        }
    }
}

/// Read one quantity such as `350pA` or `5ms` into base units, with the
/// same strictness as scenario files.
pub fn parse_quantity(raw: &str, dim: super::schema::Dimension) -> Result<f64, String> {
    let spec = KeySpec {
        key: "value",
        kind: ValueKind::Quantity(dim),
        required: true,
    };
    let mut diags = Vec::new();
    match parse_value(&spec, raw, Loc::default(), &mut diags) {
        Some(Value::Quantity(q)) => Ok(q.base()),
        _ => Err(diags
            .pop()
            .map_or_else(|| format!("invalid quantity `{raw}`"), |d| d.message)),
    }
}

/// Parse as much as possible, keeping every well-formed declaration.
pub fn parse_lenient(text: &str) -> (ScenarioDoc, Vec<Diagnostic>) {
    let mut p = Parser {
        doc: ScenarioDoc::default(),
        diags: Vec::new(),
        version_seen: false,
        seed_seen: false,
    };
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.len() > MAX_LINE {
            p.diags.push(Diagnostic::error(
                "syntax",
                Loc::new(n, 1),
                format!("line longer than {MAX_LINE} bytes"),
            ));
            continue;
        }
        let toks = tokenize(line, n);
        if !toks.is_empty() {
            p.line(&toks);
        }
    }
    if !p.version_seen {
        p.diags.push(Diagnostic::error(
            "version",
            Loc::new(1, 1),
            format!("missing `version {VERSION}` line"),
        ));
    }
    (p.doc, p.diags)
}

/// Parse a scenario, failing on any syntax, key or unit error.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, Vec<Diagnostic>> {
    let (doc, diags) = parse_lenient(text);
    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(scan_number("486pA"), Some((486.0, "pA")));
        assert_eq!(scan_number("-18pA"), Some((-18.0, "pA")));
        assert_eq!(scan_number("1.5e-3s"), Some((1.5e-3, "s")));
        assert_eq!(scan_number(".5"), Some((0.5, "")));
        assert_eq!(scan_number("1e"), Some((1.0, "e")));
        assert_eq!(scan_number("pA"), None);
        assert_eq!(scan_number("inf"), None);
        assert_eq!(scan_number("-"), None);
    }

    #[test]
    fn tokens_and_comments() {
        let t = tokenize("  block  st schmitt # trailing", 3);
        let v: Vec<_> = t.iter().map(|t| (t.text, t.loc.col)).collect();
        assert_eq!(v, vec![("block", 3), ("st", 10), ("schmitt", 13)]);
    }

    #[test]
    fn minimal_document() {
        let doc = parse_scenario(
            "version 1\nblock in source\nblock st schmitt\nblock out probe\nnet in -> st\nnet st -> out\nanalysis transient t_stop=100ms\n",
        )
        .unwrap();
        assert_eq!(doc.blocks.len(), 3);
        assert_eq!(doc.analysis.unwrap().kind, AnalysisKind::Transient);
    }

    #[test]
    fn unknown_key_suggests() {
        let e = parse_scenario("version 1\nblock st schmitt ithreshold=368pA\n").unwrap_err();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].code, "unknown-key");
        assert!(
            e[0].message.contains("did you mean `i_thresh`"),
            "{}",
            e[0].message
        );
        assert_eq!((e[0].line, e[0].col), (2, 18));
    }

    #[test]
    fn units_are_mandatory_and_checked() {
        let e =
            parse_scenario("version 1\nblock st schmitt i_gain=486 i_thresh=3ms\n").unwrap_err();
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|d| d.code == "unit"));
        let e =
            parse_scenario("version 1\nblock st schmitt overshoot_coupling=0.5pA\n").unwrap_err();
        assert_eq!(e[0].code, "unit");
        let ok = parse_scenario("version 1\nblock st schmitt i_gain=0.486nA\n").unwrap();
        assert!((ok.blocks[0].params.quantity("i_gain").unwrap() - 486.0).abs() < 1e-9);
    }

    #[test]
    fn collects_every_error() {
        let text = "version 2\nblok x source\nblock a source\nblock a probe\nnet a to b\nanalysis gate\nseed -1\n";
        let e = parse_scenario(text).unwrap_err();
        let codes: Vec<_> = e.iter().map(|d| (d.code, d.line)).collect();
        assert_eq!(
            codes,
            vec![
                ("version", 1),
                ("unknown-directive", 2),
                ("duplicate-id", 4),
                ("syntax", 5),
                ("missing-key", 6),
                ("value", 7)
            ]
        );
    }

    #[test]
    fn spikes_parse() {
        let doc = parse_scenario("version 1\nstimulus in1 spikes +@10ms -@30ms\n").unwrap();
        let ev = &doc.stimuli[0].events;
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[1].polarity, Polarity::Neg);
        assert!((ev[1].time.base() - 0.03).abs() < 1e-15);
        assert!(parse_scenario("version 1\nstimulus in1 spikes *@10ms\n").is_err());
    }

    #[test]
    fn garbage_never_panics() {
        for s in [
            "",
            "\u{0}",
            "version",
            "net -> ->",
            "block",
            "stimulus a spikes @",
            "probe",
            "x=y",
            "block a heaviside threshold==",
            "analysis dc_sweep hi=1e999pA",
        ] {
            let _ = parse_lenient(s);
        }
    }
}
