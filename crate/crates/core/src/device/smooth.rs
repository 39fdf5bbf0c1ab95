//! Continuous-dynamics form of the trigger.
//!
//! State is the feedback current `i_fb` and the output current `i_out`.
//! The forward element sees `i_in + i_fb` through a logistic of steepness
//! `k` centred on the effective upper threshold:
//!
//! ```text
//! a          = σ(k · (i_in + i_fb − T))
//! τ_fb  i_fb'  = W · i_out / G − i_fb
//! τ_out i_out' = G · a − i_out + c · (G / W) · τ_fb · i_fb'
//! ```
//!
//! The feedback branch is driven by the output, and its rate of change
//! drives the output branch with strength `c`. With `c = 0` the output is a
//! first-order lag of the forward element. With `c > 0` the pair has complex
//! poles and a step overshoots. At rest `i_fb = W·a` and `i_out = G·a`, so the
//! equilibria are the roots of the scalar map `f = W · σ(k(i_in + f − T))`.

use serde::Serialize;

use super::params::SchmittTrigger;
use super::Branch;
use super::SchmittState;
use crate::units::logistic;

/// Bisection stops once the bracket is narrower than this (pA).
const ROOT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothDerivatives {
    /// d(i_fb)/dt in pA/s.
    pub d_fb: f64,
    /// d(i_out)/dt in pA/s.
    pub d_out: f64,
}

/// Time derivatives of the smooth trigger state.
#[inline]
pub fn smooth_rhs(trig: &SchmittTrigger, i_fb: f64, i_out: f64, i_in: f64) -> SmoothDerivatives {
    let eff = trig.effective();
    let dy = &trig.dynamics;
    let a = logistic(dy.steepness_k * (i_in + i_fb - eff.thresh));
    let d_fb = (eff.width * i_out / eff.gain - i_fb) / dy.tau_fb;
    let drive = dy.overshoot_coupling * (eff.gain / eff.width) * dy.tau_fb * d_fb;
    let d_out = (eff.gain * a - i_out + drive) / dy.tau_out;
    SmoothDerivatives { d_fb, d_out }
}

/// A root of the scalar feedback map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub i_fb: f64,
    pub i_out: f64,
    pub stable: bool,
}

/// A stable equilibrium of the smooth trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub i_fb: f64,
    pub i_out: f64,
}

impl Equilibrium {
    pub fn state(&self, trig: &SchmittTrigger, undefined: bool) -> SchmittState {
        let branch = if self.i_out > 0.5 * trig.high_level() {
            Branch::High
        } else {
            Branch::Low
        };
        SchmittState {
            branch,
            i_fb: self.i_fb,
            i_out: self.i_out,
            undefined,
        }
    }
}

struct FeedbackMap {
    width: f64,
    gain: f64,
    k: f64,
    offset: f64,
}

impl FeedbackMap {
    fn new(trig: &SchmittTrigger, i_in: f64) -> Self {
        let eff = trig.effective();
        FeedbackMap {
            width: eff.width,
            gain: eff.gain,
            k: trig.dynamics.steepness_k,
            offset: i_in - eff.thresh,
        }
    }

    #[inline]
    fn g(&self, f: f64) -> f64 {
        self.width * logistic(self.k * (self.offset + f)) - f
    }

    #[inline]
    fn slope(&self, f: f64) -> f64 {
        let s = logistic(self.k * (self.offset + f));
        self.width * self.k * s * (1.0 - s) - 1.0
    }

    /// Points where `g` changes monotonicity: `W k σ(1-σ) = 1`.
    fn turning_points(&self) -> Vec<f64> {
        let wk = self.width * self.k;
        if wk <= 4.0 {
            return Vec::new();
        }
        let disc = (1.0 - 4.0 / wk).sqrt();
        let mut out = Vec::with_capacity(2);
        for s in [(1.0 - disc) / 2.0, (1.0 + disc) / 2.0] {
            let x = (s / (1.0 - s)).ln() / self.k;
            let f = x - self.offset;
            if f > 0.0 && f < self.width {
                out.push(f);
            }
        }
        out
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        let glo = self.g(lo);
        for _ in 0..200 {
            if hi - lo <= ROOT_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let gm = self.g(mid);
            if gm == 0.0 {
                return mid;
            }
            if (gm > 0.0) == (glo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Stable roots are attracting for `f <- W σ(...)`; a few passes remove
    /// the bisection residue, which matters for roots near zero.
    fn polish(&self, mut f: f64) -> f64 {
        for _ in 0..4 {
            let next = self.width * logistic(self.k * (self.offset + f));
            if (next - f).abs() > ROOT_TOL {
                break;
            }
            f = next;
        }
        f
    }

    fn roots(&self) -> Vec<FixedPoint> {
        // σ ∈ (0, 1) keeps every root inside [0, W]; `g` is monotone between
        // consecutive breakpoints so each piece holds at most one root.
        let mut edges = vec![0.0];
        edges.extend(self.turning_points());
        edges.push(self.width);
        let mut roots: Vec<f64> = Vec::with_capacity(3);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ga, gb) = (self.g(a), self.g(b));
            let r = if ga == 0.0 {
                Some(a)
            } else if gb == 0.0 {
                Some(b)
            } else if (ga > 0.0) != (gb > 0.0) {
                Some(self.bisect(a, b))
            } else {
                None
            };
            if let Some(r) = r {
                if roots
                    .last()
                    .is_none_or(|&p| (r - p).abs() > 10.0 * ROOT_TOL)
                {
                    roots.push(r);
                }
            }
        }
        roots
            .into_iter()
            .map(|f| {
                let stable = self.slope(f) < 0.0;
                let f = if stable { self.polish(f) } else { f };
                FixedPoint {
                    i_fb: f,
                    i_out: self.gain * f / self.width,
                    stable,
                }
            })
            .collect()
    }
}

/// All fixed points (stable and unstable), ascending in `i_fb`.
pub fn fixed_points(trig: &SchmittTrigger, i_in: f64) -> Vec<FixedPoint> {
    FeedbackMap::new(trig, i_in).roots()
}

/// Stable equilibria at a constant input, ascending in `i_fb`.
///
/// Inside the hysteresis band there are two for a steep enough comparator;
/// outside there is one.
pub fn smooth_equilibria(trig: &SchmittTrigger, i_in: f64) -> Vec<Equilibrium> {
    fixed_points(trig, i_in)
        .into_iter()
        .filter(|p| p.stable)
        .map(|p| Equilibrium {
            i_fb: p.i_fb,
            i_out: p.i_out,
        })
        .collect()
}

/// Equilibrium reached from a prior feedback current.
///
/// Follows the scalar flow `f' = g(f)`: upward to the next root if `g > 0`,
/// downward otherwise. This is the branch that is continuous with the prior
/// state in a quasi-static sweep.
pub fn settle_smooth(trig: &SchmittTrigger, i_in: f64, prior_fb: f64) -> Equilibrium {
    let map = FeedbackMap::new(trig, i_in);
    let roots = map.roots();
    let f0 = prior_fb.clamp(0.0, map.width);
    let g0 = map.g(f0);
    let pick = if g0 > 0.0 {
        roots.iter().find(|r| r.i_fb >= f0)
    } else if g0 < 0.0 {
        roots.iter().rev().find(|r| r.i_fb <= f0)
    } else {
        roots
            .iter()
            .min_by(|a, b| (a.i_fb - f0).abs().total_cmp(&(b.i_fb - f0).abs()))
    };
    // An unstable pick only happens when f0 sits exactly on it; fall to the
    // nearest stable neighbour on the side of the prior branch.
    let pick = match pick {
        Some(p) if p.stable => *p,
        Some(p) => {
            let upper = roots.iter().find(|r| r.stable && r.i_fb > p.i_fb);
            let lower = roots.iter().rev().find(|r| r.stable && r.i_fb < p.i_fb);
            if f0 >= 0.5 * map.width {
                *upper.or(lower).unwrap_or(p)
            } else {
                *lower.or(upper).unwrap_or(p)
            }
        }
        None => roots[0],
    };
    Equilibrium {
        i_fb: pick.i_fb,
        i_out: pick.i_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{Calibration, DynamicsConfig, SchmittParams};

    fn with_k(k: f64) -> SchmittTrigger {
        SchmittTrigger::baseline()
            .with_dynamics(DynamicsConfig {
                steepness_k: k,
                ..DynamicsConfig::default()
            })
            .unwrap()
    }

    #[test]
    fn fixed_point_derivatives_vanish() {
        let t = SchmittTrigger::baseline();
        let d = smooth_rhs(&t, 0.0, 0.0, -200.0);
        assert!(d.d_fb.abs() < 1e-9 && d.d_out.abs() < 1e-9);
        let d = smooth_rhs(&t, 200.0, 500.0, 800.0);
        assert!(d.d_fb.abs() < 1e-9 && d.d_out.abs() < 1e-9);
    }

    #[test]
    fn equilibria_counts_at_baseline() {
        let t = SchmittTrigger::baseline();
        let two = smooth_equilibria(&t, 250.0);
        assert_eq!(two.len(), 2);
        assert!(two[0].i_out < 1e-6);
        assert!((two[1].i_out - 500.0).abs() < 1e-6);

        let one = smooth_equilibria(&t, 450.0);
        assert_eq!(one.len(), 1);
        assert!((one[0].i_out - 500.0).abs() < 1e-6);

        let one = smooth_equilibria(&t, 50.0);
        assert_eq!(one.len(), 1);
        assert!(one[0].i_out < 1e-6);
    }

    #[test]
    fn shallow_comparator_is_monostable() {
        // W·k <= 4 removes the fold entirely
        let t = SchmittTrigger::new(
            SchmittParams::new(100.0, 50.0, 20.0).unwrap(),
            Calibration::ideal(),
            DynamicsConfig {
                steepness_k: 0.1,
                ..DynamicsConfig::default()
            },
        )
        .unwrap();
        for i_in in [0.0, 30.0, 40.0, 60.0] {
            assert_eq!(fixed_points(&t, i_in).len(), 1);
        }
    }

    #[test]
    fn settle_follows_prior_branch() {
        let t = SchmittTrigger::baseline();
        let lo = settle_smooth(&t, 250.0, 0.0);
        let hi = settle_smooth(&t, 250.0, 200.0);
        assert!(lo.i_out < 1.0);
        assert!(hi.i_out > 499.0);
        // the low branch disappears above the fold
        let up = settle_smooth(&t, 360.0, lo.i_fb);
        assert!(up.i_out > 499.0);
        let down = settle_smooth(&t, 140.0, hi.i_fb);
        assert!(down.i_out < 1.0);
    }

    #[test]
    fn fold_points_approach_sharp_limit() {
        // fold of the low branch: smallest input at which it vanishes
        let fold = |k: f64| {
            let t = with_k(k);
            let (mut lo, mut hi) = (300.0, 350.0 + 1.0);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if smooth_equilibria(&t, m)[0].i_out < 250.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            350.0 - lo
        };
        let e: Vec<f64> = [1.0, 5.0, 10.0, 20.0].iter().map(|&k| fold(k)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
        assert!(e[3] < 1.0);
    }
}
