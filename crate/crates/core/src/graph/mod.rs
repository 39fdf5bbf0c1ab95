//! Block networks with current-summing nets.
//!
//! Every net adds one driver's output current into one sink's input, so a
//! sink with several drivers sees their sum. The block graph must be acyclic;
//! the only feedback allowed is the one inside a trigger block.

mod dc;
mod stimulus;
mod transient;

pub use dc::{eval_dc, EvalMode, NetworkState, NodeCurrents};
pub use stimulus::Stimulus;
pub use transient::{
    run_transient, run_transient_with, stability_bound, ProbeSeries, Simulator, Trace,
    TransientOptions,
};

use std::collections::HashMap;

use petgraph::algo::{tarjan_scc, toposort};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use thiserror::Error;

use crate::device::SchmittTrigger;

/// A plain thresholding stage: `gain` when the summed input exceeds `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeavisideParams {
    pub threshold: f64,
    pub gain: f64,
    /// Logistic steepness used by smooth and transient evaluation (1/pA).
    pub k: f64,
}

impl HeavisideParams {
    pub fn new(threshold: f64, gain: f64) -> Self {
        HeavisideParams {
            threshold,
            gain,
            k: 1.0,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.threshold.is_finite() && self.gain.is_finite() && self.k.is_finite()) {
            return Err("non-finite heaviside parameter".into());
        }
        if self.gain < 0.0 {
            return Err(format!("heaviside gain {} pA is negative", self.gain));
        }
        if self.k <= 0.0 {
            return Err(format!("heaviside steepness {} is not positive", self.k));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    Source,
    Schmitt(SchmittTrigger),
    InvSchmitt(SchmittTrigger),
    Heaviside(HeavisideParams),
    Probe,
}

impl BlockKind {
    pub fn name(&self) -> &'static str {
        match self {
            BlockKind::Source => "source",
            BlockKind::Schmitt(_) => "schmitt",
            BlockKind::InvSchmitt(_) => "inv_schmitt",
            BlockKind::Heaviside(_) => "heaviside",
            BlockKind::Probe => "probe",
        }
    }

    pub fn trigger(&self) -> Option<&SchmittTrigger> {
        match self {
            BlockKind::Schmitt(t) | BlockKind::InvSchmitt(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: String,
    pub kind: BlockKind,
}

impl Block {
    pub fn new(id: impl Into<String>, kind: BlockKind) -> Self {
        Block {
            id: id.into(),
            kind,
        }
    }

    pub fn source(id: impl Into<String>) -> Self {
        Self::new(id, BlockKind::Source)
    }

    pub fn schmitt(id: impl Into<String>, trig: SchmittTrigger) -> Self {
        Self::new(id, BlockKind::Schmitt(trig))
    }

    pub fn inv_schmitt(id: impl Into<String>, trig: SchmittTrigger) -> Self {
        Self::new(id, BlockKind::InvSchmitt(trig))
    }

    pub fn heaviside(id: impl Into<String>, threshold: f64, gain: f64) -> Self {
        Self::new(
            id,
            BlockKind::Heaviside(HeavisideParams::new(threshold, gain)),
        )
    }

    pub fn probe(id: impl Into<String>) -> Self {
        Self::new(id, BlockKind::Probe)
    }
}

/// One driver output summed into one sink input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub driver: String,
    pub sink: String,
}

impl Net {
    pub fn new(driver: impl Into<String>, sink: impl Into<String>) -> Self {
        Net {
            driver: driver.into(),
            sink: sink.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("duplicate block id `{0}`")]
    DuplicateId(String),
    #[error("net {driver} -> {sink} references unknown block `{missing}`")]
    DanglingNet {
        driver: String,
        sink: String,
        missing: String,
    },
    #[error("feedback loop between blocks {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("block `{id}`: {reason}")]
    InvalidBlock { id: String, reason: String },
    #[error("input of `{0}` is not driven")]
    UndrivenInput(String),
    #[error("source `{0}` cannot have a driven input")]
    DrivenSource(String),
    #[error("probe `{0}` has no output to drive other blocks")]
    ProbeAsDriver(String),
}

/// Validated, topologically ordered network. Immutable after build.
#[derive(Debug, Clone)]
pub struct Network {
    blocks: Vec<Block>,
    index: HashMap<String, usize>,
    drivers: Vec<Vec<usize>>,
    order: Vec<usize>,
    sources: Vec<usize>,
    probes: Vec<usize>,
}

/// Validate blocks and nets and compute an evaluation order.
pub fn build_network(blocks: Vec<Block>, nets: &[Net]) -> Result<Network, NetworkError> {
    let mut index = HashMap::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        if index.insert(b.id.clone(), i).is_some() {
            return Err(NetworkError::DuplicateId(b.id.clone()));
        }
        if let BlockKind::Heaviside(h) = &b.kind {
            h.validate().map_err(|reason| NetworkError::InvalidBlock {
                id: b.id.clone(),
                reason,
            })?;
        }
    }

    let mut drivers = vec![Vec::new(); blocks.len()];
    let mut graph = DiGraph::<usize, ()>::with_capacity(blocks.len(), nets.len());
    let nodes: Vec<NodeIndex> = (0..blocks.len()).map(|i| graph.add_node(i)).collect();
    for net in nets {
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| NetworkError::DanglingNet {
                    driver: net.driver.clone(),
                    sink: net.sink.clone(),
                    missing: id.to_string(),
                })
        };
        let d = lookup(&net.driver)?;
        let s = lookup(&net.sink)?;
        if matches!(blocks[s].kind, BlockKind::Source) {
            return Err(NetworkError::DrivenSource(blocks[s].id.clone()));
        }
        if matches!(blocks[d].kind, BlockKind::Probe) {
            return Err(NetworkError::ProbeAsDriver(blocks[d].id.clone()));
        }
        drivers[s].push(d);
        graph.add_edge(nodes[d], nodes[s], ());
    }

    let order = match toposort(&graph, None) {
        Ok(order) => order.into_iter().map(|n| graph[n]).collect::<Vec<_>>(),
        Err(cycle) => {
            let at = cycle.node_id();
            let scc = tarjan_scc(&graph)
                .into_iter()
                .find(|c| c.contains(&at))
                .unwrap_or_else(|| vec![at]);
            let mut ids: Vec<String> = scc.iter().map(|&n| blocks[graph[n]].id.clone()).collect();
            ids.sort();
            return Err(NetworkError::Cycle(ids));
        }
    };

    for (i, b) in blocks.iter().enumerate() {
        if !matches!(b.kind, BlockKind::Source) && drivers[i].is_empty() {
            return Err(NetworkError::UndrivenInput(b.id.clone()));
        }
    }

    let sources = (0..blocks.len())
        .filter(|&i| matches!(blocks[i].kind, BlockKind::Source))
        .collect();
    let probes = (0..blocks.len())
        .filter(|&i| matches!(blocks[i].kind, BlockKind::Probe))
        .collect();

    Ok(Network {
        blocks,
        index,
        drivers,
        order,
        sources,
        probes,
    })
}

impl Network {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: &str) -> Option<&Block> {
        self.index.get(id).map(|&i| &self.blocks[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn drivers_of(&self, idx: usize) -> &[usize] {
        &self.drivers[idx]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Source block ids in declaration order; `eval_dc` takes values in this order.
    pub fn source_ids(&self) -> impl Iterator<Item = &str> {
        self.sources.iter().map(|&i| self.blocks[i].id.as_str())
    }

    pub fn source_positions(&self) -> &[usize] {
        &self.sources
    }

    pub fn probe_ids(&self) -> impl Iterator<Item = &str> {
        self.probes.iter().map(|&i| self.blocks[i].id.as_str())
    }

    /// Order named source values to match [`Network::source_ids`].
    pub fn source_values(&self, named: &[(&str, f64)]) -> crate::Result<Vec<f64>> {
        self.source_ids()
            .map(|id| {
                named
                    .iter()
                    .find(|(n, _)| *n == id)
                    .map(|&(_, v)| v)
                    .ok_or_else(|| crate::Error::MissingSource(id.to_string()))
            })
            .collect()
    }

    pub fn triggers(&self) -> impl Iterator<Item = &SchmittTrigger> {
        self.blocks.iter().filter_map(|b| b.kind.trigger())
    }

    pub fn count_kind(&self, name: &str) -> usize {
        self.blocks.iter().filter(|b| b.kind.name() == name).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> (Vec<Block>, Vec<Net>) {
        (
            vec![
                Block::source("in"),
                Block::schmitt("st", SchmittTrigger::baseline()),
                Block::probe("out"),
            ],
            vec![Net::new("in", "st"), Net::new("st", "out")],
        )
    }

    #[test]
    fn minimal_chain_builds() {
        let (b, n) = chain();
        let net = build_network(b, &n).unwrap();
        assert_eq!(net.blocks().len(), 3);
        let pos: Vec<usize> = ["in", "st", "out"]
            .iter()
            .map(|id| {
                net.order()
                    .iter()
                    .position(|&i| i == net.position(id).unwrap())
                    .unwrap()
            })
            .collect();
        assert!(pos[0] < pos[1] && pos[1] < pos[2]);
    }

    #[test]
    fn dangling_net_names_missing_block() {
        let (b, mut n) = chain();
        n.push(Net::new("stX", "out"));
        match build_network(b, &n) {
            Err(NetworkError::DanglingNet { missing, .. }) => assert_eq!(missing, "stX"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let (b, mut n) = chain();
        n.push(Net::new("st", "st"));
        assert_eq!(
            build_network(b, &n).unwrap_err(),
            NetworkError::Cycle(vec!["st".into()])
        );
    }

    #[test]
    fn two_block_loop_reports_both() {
        let t = SchmittTrigger::baseline();
        let blocks = vec![
            Block::source("in"),
            Block::schmitt("a", t),
            Block::schmitt("b", t),
        ];
        let nets = [Net::new("in", "a"), Net::new("a", "b"), Net::new("b", "a")];
        assert_eq!(
            build_network(blocks, &nets).unwrap_err(),
            NetworkError::Cycle(vec!["a".into(), "b".into()])
        );
    }

    #[test]
    fn structural_errors() {
        let (mut b, n) = chain();
        b.push(Block::probe("st"));
        assert_eq!(
            build_network(b, &n).unwrap_err(),
            NetworkError::DuplicateId("st".into())
        );

        let (mut b, n) = chain();
        b.push(Block::probe("lonely"));
        assert_eq!(
            build_network(b, &n).unwrap_err(),
            NetworkError::UndrivenInput("lonely".into())
        );

        let (b, mut n) = chain();
        n.push(Net::new("st", "in"));
        assert_eq!(
            build_network(b, &n).unwrap_err(),
            NetworkError::DrivenSource("in".into())
        );

        let (mut b, mut n) = chain();
        b.push(Block::heaviside("h", 10.0, -1.0));
        n.push(Net::new("st", "h"));
        assert!(matches!(
            build_network(b, &n),
            Err(NetworkError::InvalidBlock { .. })
        ));
    }
}
