use serde::{Deserialize, Serialize};

use super::{BlockKind, Network};
use crate::device::{inverted_output, settle_smooth, SchmittState};
use crate::error::{Error, Result};
use crate::units::{logistic, Current};

/// How trigger and threshold blocks are evaluated at DC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Discrete-state triggers and sharp thresholds.
    #[default]
    Ideal,
    /// Logistic comparators; triggers settle on the equilibrium branch
    /// continuous with their prior state.
    Smooth,
}

/// Per-block trigger memory. Non-trigger slots are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub(crate) triggers: Vec<Option<SchmittState>>,
}

impl NetworkState {
    pub fn get(&self, idx: usize) -> Option<&SchmittState> {
        self.triggers.get(idx).and_then(|s| s.as_ref())
    }

    pub fn set(&mut self, idx: usize, state: SchmittState) {
        if let Some(slot) = self.triggers.get_mut(idx) {
            if slot.is_some() {
                *slot = Some(state);
            }
        }
    }

    pub fn any_undefined(&self) -> bool {
        self.triggers.iter().flatten().any(|s| s.undefined)
    }
}

impl Network {
    /// All triggers low and flagged undefined.
    pub fn initial_state(&self) -> NetworkState {
        NetworkState {
            triggers: self
                .blocks
                .iter()
                .map(|b| b.kind.trigger().map(|_| SchmittState::fresh()))
                .collect(),
        }
    }
}

/// Output current of every block, indexed by block position.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCurrents {
    pub(crate) values: Vec<f64>,
}

impl NodeCurrents {
    pub fn at(&self, idx: usize) -> Current {
        Current::clamped(self.values[idx])
    }

    pub fn get(&self, net: &Network, id: &str) -> Option<Current> {
        net.position(id).map(|i| self.at(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

fn check_source(id: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite("source value"));
    }
    if v < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "source `{id}` is negative ({v} pA) in a unipolar domain"
        )));
    }
    Ok(())
}

/// Evaluate the network at constant source values.
///
/// `sources` follows [`Network::source_ids`]. Returns the block currents and
/// the updated trigger states; the input state is left untouched.
pub fn eval_dc(
    net: &Network,
    sources: &[f64],
    state: &NetworkState,
    mode: EvalMode,
) -> Result<(NodeCurrents, NetworkState)> {
    if let Some(&missing) = net.sources.get(sources.len()) {
        return Err(Error::MissingSource(net.blocks[missing].id.clone()));
    }
    let mut values = vec![0.0; net.blocks.len()];
    let mut next = state.clone();
    for (&idx, &v) in net.sources.iter().zip(sources) {
        check_source(&net.blocks[idx].id, v)?;
        values[idx] = v;
    }
    for &idx in &net.order {
        let input: f64 = net.drivers[idx].iter().map(|&d| values[d]).sum();
        values[idx] = match &net.blocks[idx].kind {
            BlockKind::Source => values[idx],
            BlockKind::Probe => input,
            BlockKind::Heaviside(h) => match mode {
                EvalMode::Ideal => {
                    if input > h.threshold {
                        h.gain
                    } else {
                        0.0
                    }
                }
                EvalMode::Smooth => h.gain * logistic(h.k * (input - h.threshold)),
            },
            kind @ (BlockKind::Schmitt(trig) | BlockKind::InvSchmitt(trig)) => {
                let prior = state.triggers[idx].unwrap_or_else(SchmittState::fresh);
                let th = trig.thresholds();
                let (s, out) = match mode {
                    EvalMode::Ideal => th.step(input, &prior),
                    EvalMode::Smooth => {
                        let crossed = input > th.i_th_high || input < th.i_th_low;
                        let eq = settle_smooth(trig, input, prior.i_fb);
                        (
                            eq.state(trig, prior.undefined && !crossed),
                            Current::clamped(eq.i_out),
                        )
                    }
                };
                next.triggers[idx] = Some(s);
                match kind {
                    BlockKind::InvSchmitt(_) => inverted_output(out, th.high_level).0.pa(),
                    _ => out.pa(),
                }
            }
        };
    }
    Ok((NodeCurrents { values }, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{Branch, SchmittTrigger};
    use crate::graph::{build_network, Block, Net};

    fn single() -> Network {
        build_network(
            vec![
                Block::source("in"),
                Block::schmitt("st", SchmittTrigger::baseline()),
                Block::inv_schmitt("ist", SchmittTrigger::baseline()),
                Block::probe("p"),
                Block::probe("q"),
            ],
            &[
                Net::new("in", "st"),
                Net::new("in", "ist"),
                Net::new("st", "p"),
                Net::new("ist", "q"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hysteresis_through_the_network() {
        let net = single();
        for mode in [EvalMode::Ideal, EvalMode::Smooth] {
            let s0 = net.initial_state();
            let (v, s1) = eval_dc(&net, &[250.0], &s0, mode).unwrap();
            assert!(v.get(&net, "p").unwrap().pa() < 1e-6);
            assert!((v.get(&net, "q").unwrap().pa() - 500.0).abs() < 1e-6);
            assert!(s1.any_undefined());
            let (_, s2) = eval_dc(&net, &[400.0], &s1, mode).unwrap();
            assert!(!s2.any_undefined());
            let (v, s3) = eval_dc(&net, &[250.0], &s2, mode).unwrap();
            assert!((v.get(&net, "p").unwrap().pa() - 500.0).abs() < 1e-6);
            assert!(v.get(&net, "q").unwrap().pa() < 1e-6);
            assert_eq!(s3.get(1).unwrap().branch, Branch::High);
        }
    }

    #[test]
    fn missing_and_negative_sources() {
        let net = single();
        let s = net.initial_state();
        assert_eq!(
            eval_dc(&net, &[], &s, EvalMode::Ideal).unwrap_err(),
            Error::MissingSource("in".into())
        );
        assert!(eval_dc(&net, &[-1.0], &s, EvalMode::Ideal).is_err());
    }

    #[test]
    fn quiescent_network_is_zero() {
        let t = SchmittTrigger::baseline();
        let net = build_network(
            vec![
                Block::source("a"),
                Block::source("b"),
                Block::schmitt("sa", t),
                Block::schmitt("sb", t),
                Block::heaviside("h", 250.0, 500.0),
                Block::probe("out"),
            ],
            &[
                Net::new("a", "sa"),
                Net::new("b", "sb"),
                Net::new("sa", "h"),
                Net::new("sb", "h"),
                Net::new("h", "out"),
            ],
        )
        .unwrap();
        for mode in [EvalMode::Ideal, EvalMode::Smooth] {
            let (v, _) = eval_dc(&net, &[0.0, 0.0], &net.initial_state(), mode).unwrap();
            assert!(v.as_slice().iter().all(|&x| x.abs() < 1e-9));
        }
    }
}
