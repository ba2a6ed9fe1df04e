use serde::Serialize;

use super::estimate::SamplingMethod;
use super::events::{estimate_segments, steps_by, SegmentEvent};
use super::fit::fit_rate;
use crate::convex::{sup_concave, Bound, Interval, MuSearch};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::process::{InitialLaw, ProcessModel, StepLaw};
use crate::rng::derive_seed;
use crate::stats::log_sum_exp;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessRow {
    /// Required decay rate `N`.
    pub target: f64,
    /// Smallest scanned `v` reaching it.
    pub v: f64,
    /// Decay rate of the Chernoff bound fitted over the horizons; `+∞` when
    /// the event is impossible at the largest horizon.
    pub fitted_rate: ExtendedReal,
    /// `ln` of the two-sided Chernoff bound on `P(|z(T)| > v)` per horizon.
    pub log_bounds: Vec<f64>,
    /// Tilted estimate of `P(|z(T)| > v)` at the largest horizon.
    pub mc_p_hat: f64,
    pub mc_std_err: f64,
    /// The estimate does not exceed the bound by more than three standard errors.
    pub bound_respected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub horizons: Vec<f64>,
    pub rows: Vec<TightnessRow>,
}

/// `ln P(x0 + S_N > x)` bounded by `−sup_{μ ≥ 0}(μ(x − x0) − N A(μ))`, and
/// the mirrored lower tail.
fn log_chernoff(law: &StepLaw, steps: usize, x0: f64, x: f64) -> f64 {
    let mgf = law.mgf_domain();
    let nf = steps as f64;
    let tail = |sign: f64| {
        let half = if sign > 0.0 {
            Interval::new(Bound::Closed(0.0), Bound::Unbounded)
        } else {
            Interval::new(Bound::Unbounded, Bound::Closed(0.0))
        };
        let dom = mgf.intersect(&half);
        let gap = sign * x - x0;
        let g = |mu: f64| {
            let a = law.log_mgf(mu);
            if dom.contains(mu) && a.is_finite() {
                mu * gap - nf * a
            } else {
                f64::NEG_INFINITY
            }
        };
        match sup_concave(&g, &dom, &MuSearch::for_domain(&dom)).value {
            ExtendedReal::Finite(v) => -v.max(0.0),
            ExtendedReal::PosInfinity => f64::NEG_INFINITY,
        }
    };
    log_sum_exp(&[tail(1.0), tail(-1.0)]).min(0.0)
}

/// For each decay target `N`, the smallest `v` in `v_grid` (default
/// `0.05, 0.10, …, 10`) whose Chernoff bound on `(1/T) ln P(|z(T)| > v)`
/// decays at rate at least `N` over the horizons, with a tilted Monte Carlo
/// check at the largest horizon.
pub fn exponential_tightness_scan(
    model: &ProcessModel,
    targets: &[f64],
    horizons: &[f64],
    n: usize,
    v_grid: Option<&[f64]>,
    seed: u64,
) -> Result<TightnessReport> {
    let law = model.step_law().ok_or_else(|| Error::NoStepLaw(model.label()))?;
    if model.noise().is_some() {
        return Err(Error::InvalidParameters(
            "tightness scan needs a model without noise".into(),
        ));
    }
    let InitialLaw::Point(z0) = model.initial else {
        return Err(Error::InvalidParameters(
            "tightness scan needs a fixed initial value".into(),
        ));
    };
    if horizons.is_empty() || horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameters("horizons must be positive".into()));
    }
    let default_grid: Vec<f64> = (1..=200).map(|i| i as f64 / 20.0).collect();
    let mut grid = v_grid.map_or(default_grid, |g| g.to_vec());
    grid.retain(|v| *v > 0.0 && v.is_finite());
    grid.sort_by(|a, b| a.total_cmp(b));
    let t_max = horizons.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut rows = Vec::with_capacity(targets.len());
    for (row, &target) in targets.iter().enumerate() {
        let mut chosen = None;
        for &v in &grid {
            let log_bounds: Vec<f64> = horizons
                .iter()
                .map(|&t| log_chernoff(&law, steps_by(t), z0, v * t))
                .collect();
            let last = horizons.iter().position(|&t| t == t_max).expect("nonempty");
            let rate = if log_bounds[last] == f64::NEG_INFINITY {
                ExtendedReal::PosInfinity
            } else {
                let (ts, ls): (Vec<f64>, Vec<f64>) = horizons
                    .iter()
                    .zip(&log_bounds)
                    .filter(|(_, l)| l.is_finite())
                    .map(|(&t, &l)| (t, l))
                    .unzip();
                match fit_rate(&ts, &ls) {
                    Ok(fit) => ExtendedReal::Finite(fit.rate),
                    Err(_) => ExtendedReal::Finite(-log_bounds[last] / t_max),
                }
            };
            if rate >= ExtendedReal::Finite(target - 1e-9) {
                chosen = Some((v, rate, log_bounds, last));
                break;
            }
        }
        let (v, fitted_rate, log_bounds, last) = chosen.ok_or(Error::ScanExhausted { target })?;

        // tilted check of both tails at the largest horizon
        let mut p = 0.0;
        let mut se = 0.0_f64;
        for (side, (lo, hi, aim)) in [
            (v - z0 / t_max, f64::INFINITY, v - z0 / t_max),
            (f64::NEG_INFINITY, -v - z0 / t_max, -v - z0 / t_max),
        ]
        .into_iter()
        .enumerate()
        {
            let event = SegmentEvent {
                cuts: vec![0.0, 1.0],
                windows: vec![(lo, hi)],
                targets: vec![aim],
            };
            let s = derive_seed(seed, (2 * row + side) as u64);
            match estimate_segments(model, &event, t_max, v, n, SamplingMethod::Tilted, s) {
                Ok(est) => {
                    p += est.p_hat;
                    // squares underflow for tails far below 1e-160
                    se = se.hypot(est.std_err);
                }
                // the tail lies beyond the support: probability zero
                Err(Error::TargetOutsideDomain { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        rows.push(TightnessRow {
            target,
            v,
            fitted_rate,
            bound_respected: p <= log_bounds[last].exp() + 3.0 * se,
            log_bounds,
            mc_p_hat: p,
            mc_std_err: se,
        });
    }
    Ok(TightnessReport {
        horizons: horizons.to_vec(),
        rows,
    })
}
