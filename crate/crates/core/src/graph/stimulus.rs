use serde::Serialize;

use crate::error::{Error, Result};

/// Source waveform, in pA as a function of time in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stimulus {
    Constant {
        value: f64,
    },
    /// Periodic triangle starting at `lo`, reaching `hi` at `period / 2`.
    Triangle {
        lo: f64,
        hi: f64,
        period: f64,
    },
    Step {
        from: f64,
        to: f64,
        at: f64,
    },
    /// `initial` until the first change; each `(t, v)` holds `v` from `t` on.
    PiecewiseConstant {
        initial: f64,
        changes: Vec<(f64, f64)>,
    },
    /// Linear interpolation through `(t, v)` points, held flat outside them.
    PiecewiseLinear {
        points: Vec<(f64, f64)>,
    },
}

fn level(v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite("stimulus level"));
    }
    if v < 0.0 {
        return Err(Error::Stimulus(format!("negative level {v} pA")));
    }
    Ok(())
}

fn sorted_times(ts: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for t in ts {
        if !t.is_finite() {
            return Err(Error::NonFinite("stimulus time"));
        }
        if t < prev {
            return Err(Error::Stimulus("breakpoints are not time-sorted".into()));
        }
        prev = t;
    }
    Ok(())
}

impl Stimulus {
    pub fn constant(value: f64) -> Self {
        Stimulus::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Stimulus::Constant { value } => level(*value),
            Stimulus::Triangle { lo, hi, period } => {
                level(*lo)?;
                level(*hi)?;
                if !(period.is_finite() && *period > 0.0) {
                    return Err(Error::Stimulus("triangle period must be positive".into()));
                }
                Ok(())
            }
            Stimulus::Step { from, to, at } => {
                level(*from)?;
                level(*to)?;
                if !at.is_finite() {
                    return Err(Error::NonFinite("step time"));
                }
                Ok(())
            }
            Stimulus::PiecewiseConstant { initial, changes } => {
                level(*initial)?;
                changes.iter().try_for_each(|&(_, v)| level(v))?;
                sorted_times(changes.iter().map(|c| c.0))
            }
            Stimulus::PiecewiseLinear { points } => {
                if points.is_empty() {
                    return Err(Error::Stimulus("piecewise-linear needs a point".into()));
                }
                points.iter().try_for_each(|&(_, v)| level(v))?;
                sorted_times(points.iter().map(|c| c.0))
            }
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Stimulus::Constant { value } => *value,
            Stimulus::Triangle { lo, hi, period } => {
                let phase = (t / period).rem_euclid(1.0);
                let frac = if phase < 0.5 {
                    2.0 * phase
                } else {
                    2.0 * (1.0 - phase)
                };
                lo + (hi - lo) * frac
            }
            Stimulus::Step { from, to, at } => {
                if t >= *at {
                    *to
                } else {
                    *from
                }
            }
            Stimulus::PiecewiseConstant { initial, changes } => {
                let n = changes.partition_point(|&(tc, _)| tc <= t);
                if n == 0 {
                    *initial
                } else {
                    changes[n - 1].1
                }
            }
            Stimulus::PiecewiseLinear { points } => {
                let n = points.partition_point(|&(tp, _)| tp <= t);
                if n == 0 {
                    points[0].1
                } else if n == points.len() {
                    points[n - 1].1
                } else {
                    let (t0, v0) = points[n - 1];
                    let (t1, v1) = points[n];
                    if t1 == t0 {
                        v1
                    } else {
                        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                    }
                }
            }
        }
    }
}
