use std::fmt::Write;

use super::doc::{Param, ScenarioDoc};

fn params(out: &mut String, ps: &[Param]) {
    for p in ps {
        let _ = write!(out, " {}={}", p.key, p.value);
    }
}

/// Canonical text form: fixed group order, one declaration per line, groups
/// separated by a blank line, comments dropped.
pub fn serialize_scenario(doc: &ScenarioDoc) -> String {
    let mut groups: Vec<String> = Vec::new();
    groups.push(format!("version {}\n", doc.version));

    let mut g = String::new();
    for b in &doc.blocks {
        let _ = write!(g, "block {} {}", b.id, b.kind.keyword());
        params(&mut g, &b.params);
        g.push('\n');
    }
    groups.push(g);

    let mut g = String::new();
    for n in &doc.nets {
        let _ = writeln!(g, "net {} -> {}", n.driver, n.sink);
    }
    groups.push(g);

    let mut g = String::new();
    for s in &doc.stimuli {
        let _ = write!(g, "stimulus {} {}", s.target, s.kind.keyword());
        params(&mut g, &s.params);
        for e in &s.events {
            let _ = write!(g, " {}@{}", e.polarity, e.time);
        }
        g.push('\n');
    }
    groups.push(g);

    if let Some(e) = &doc.encoding {
        let mut g = String::from("encoding");
        params(&mut g, &e.params);
        g.push('\n');
        groups.push(g);
    }

    let mut g = String::new();
    for p in &doc.probes {
        let _ = writeln!(g, "probe {}", p.id);
    }
    groups.push(g);

    let mut g = String::new();
    if let Some(a) = &doc.analysis {
        let _ = write!(g, "analysis {}", a.kind.keyword());
        params(&mut g, &a.params);
        g.push('\n');
    }
    if let Some(s) = doc.seed {
        let _ = writeln!(g, "seed {s}");
    }
    groups.push(g);

    groups.retain(|g| !g.is_empty());
    groups.join("\n")
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_scenario;
    use super::*;

    const CANON: &str = "version 1

block in source
block st schmitt i_gain=486pA i_thresh=368pA i_width=216pA gain_offset=-18pA tau_fb=0.5ms
block out probe

net in -> st
net st -> out

stimulus in spikes +@10ms -@0.03s

encoding rest=250pA pulse_width=5ms

probe out

analysis monte_carlo block=st sigma=10pA runs=500
seed 7
";

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let doc = parse_scenario(CANON).unwrap();
        assert_eq!(serialize_scenario(&doc), CANON);
    }

    #[test]
    fn reordered_keys_are_normalised() {
        let doc = parse_scenario("version 1\n# c\nblock st schmitt i_width=216pA i_gain=486pA\n")
            .unwrap();
        let s = serialize_scenario(&doc);
        assert_eq!(
            s,
            "version 1\n\nblock st schmitt i_gain=486pA i_width=216pA\n"
        );
        assert_eq!(parse_scenario(&s).unwrap(), doc);
    }
}
