use std::collections::VecDeque;

use serde::Serialize;

use super::simulate::Trajectory;
use crate::error::{Error, Result};

/// `V(T)`, required to be `o(T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Growth {
    Constant(f64),
    /// `c · T^exponent` with `exponent < 1`.
    Power {
        c: f64,
        exponent: f64,
    },
}

/// `W(δ)`, required to vanish as `δ → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Modulus {
    Linear(f64),
    /// `c · δ^exponent` with `exponent > 0`.
    Power {
        c: f64,
        exponent: f64,
    },
}

/// Oscillation allowance `V(T) + W(δ)·T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationBudget {
    pub v: Growth,
    pub w: Modulus,
}

impl OscillationBudget {
    pub fn new(v: Growth, w: Modulus) -> Result<Self> {
        let ok_v = match v {
            Growth::Constant(c) => c >= 0.0 && c.is_finite(),
            Growth::Power { c, exponent } => c >= 0.0 && c.is_finite() && (0.0..1.0).contains(&exponent),
        };
        let ok_w = match w {
            Modulus::Linear(c) => c >= 0.0 && c.is_finite(),
            Modulus::Power { c, exponent } => c >= 0.0 && c.is_finite() && exponent > 0.0,
        };
        if ok_v && ok_w {
            Ok(OscillationBudget { v, w })
        } else {
            Err(Error::InvalidParameters(format!(
                "invalid oscillation budget V = {v:?}, W = {w:?}"
            )))
        }
    }

    /// `V ≡ γ0`, `W(δ) = γ1·δ`.
    pub fn almost_lipschitz(gamma0: f64, gamma1: f64) -> Result<Self> {
        Self::new(Growth::Constant(gamma0), Modulus::Linear(gamma1))
    }

    pub fn v_at(&self, horizon: f64) -> f64 {
        match self.v {
            Growth::Constant(c) => c,
            Growth::Power { c, exponent } => c * horizon.powf(exponent),
        }
    }

    pub fn w_at(&self, delta: f64) -> f64 {
        match self.w {
            Modulus::Linear(c) => c * delta,
            Modulus::Power { c, exponent } => c * delta.powf(exponent),
        }
    }

    pub fn bound(&self, horizon: f64, delta: f64) -> f64 {
        self.v_at(horizon) + self.w_at(delta) * horizon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCheck {
    pub delta: f64,
    /// Grid steps spanned by a window of length `δT`.
    pub window_steps: usize,
    pub max_oscillation: f64,
    pub bound: f64,
    pub pass: bool,
    /// Times `(u T, v T)` attaining the maximal oscillation.
    pub worst_pair: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionBReport {
    pub horizon: f64,
    pub checks: Vec<DeltaCheck>,
    pub pass: bool,
}

impl ConditionBReport {
    pub fn violations(&self) -> impl Iterator<Item = &DeltaCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Largest `max − min` over windows of `w + 1` consecutive values, with the
/// indices of the two extremes.
fn sliding_range(values: &[f64], w: usize) -> (f64, usize, usize) {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = (0.0, 0, 0);
    for j in 0..values.len() {
        while maxq.back().is_some_and(|&k| values[k] <= values[j]) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&k| values[k] >= values[j]) {
            minq.pop_back();
        }
        minq.push_back(j);
        let start = j.saturating_sub(w);
        while maxq.front().is_some_and(|&k| k < start) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&k| k < start) {
            minq.pop_front();
        }
        let (hi, lo) = (maxq[0], minq[0]);
        let range = values[hi] - values[lo];
        if range > best.0 {
            best = (range, hi.min(lo), hi.max(lo));
        }
    }
    best
}

/// Grid supremum of `|Z(uT) − Z(vT)|` over `0 ≤ u < v ≤ min(u + δ, 1)` for
/// each `δ`, against `V(T) + W(δ)T`. The trajectory grid must be uniform.
pub fn check_condition_b(traj: &Trajectory, budget: &OscillationBudget, deltas: &[f64]) -> Result<ConditionBReport> {
    if traj.len() < 2 {
        return Err(Error::InvalidParameters("trajectory needs at least two points".into()));
    }
    let step = traj.grid_step();
    let horizon = traj.horizon;
    let mut checks = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "delta must lie in (0, 1], got {delta}"
            )));
        }
        let span = delta * horizon / step;
        let w = (span + 1e-9).floor() as usize;
        if w == 0 {
            return Err(Error::GridTooCoarse { delta });
        }
        let (osc, i, j) = sliding_range(&traj.values, w);
        let bound = budget.bound(horizon, delta);
        checks.push(DeltaCheck {
            delta,
            window_steps: w,
            max_oscillation: osc,
            bound,
            pass: osc <= bound,
            worst_pair: (traj.times[i], traj.times[j]),
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ConditionBReport { horizon, checks, pass })
}
