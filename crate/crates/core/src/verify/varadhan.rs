use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{Method, SamplingMethod};
use super::events::steps_by;
use super::tilt::{resolve_tilt, TiltedLaw};
use crate::convex::RateFunction;
use crate::error::{Error, Result};
use crate::process::{sample_values_at, ProcessModel};
use crate::rng::stream_rng;
use crate::stats::log_mean_exp;

/// Test functions `φ` for which `E e^{Tφ(Z(T)/T)}` stays finite on the
/// shipped models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phi {
    /// `φ(α) = slope · α`.
    Linear { slope: f64 },
    /// `φ(α) = min(coef · α², cap)`; a positive `coef` needs a finite cap.
    QuadraticCapped { coef: f64, cap: Option<f64> },
    /// Linear interpolation of the nodes, constant beyond the outer ones.
    PiecewiseLinear { nodes: Vec<(f64, f64)> },
}

impl Phi {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Phi::Linear { slope } => slope.is_finite(),
            Phi::QuadraticCapped { coef, cap } => {
                coef.is_finite() && cap.is_none_or(|c| c.is_finite()) && (*coef <= 0.0 || cap.is_some())
            }
            Phi::PiecewiseLinear { nodes } => {
                !nodes.is_empty()
                    && nodes.iter().all(|(a, v)| a.is_finite() && v.is_finite())
                    && nodes.windows(2).all(|w| w[1].0 > w[0].0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("unsupported test function {self:?}")))
        }
    }

    pub fn evaluate(&self, alpha: f64) -> f64 {
        match self {
            Phi::Linear { slope } => slope * alpha,
            Phi::QuadraticCapped { coef, cap } => {
                let q = coef * alpha * alpha;
                cap.map_or(q, |c| q.min(c))
            }
            Phi::PiecewiseLinear { nodes } => {
                let i = nodes.partition_point(|n| n.0 <= alpha);
                if i == 0 {
                    return nodes[0].1;
                }
                if i == nodes.len() {
                    return nodes[i - 1].1;
                }
                let ((a0, v0), (a1, v1)) = (nodes[i - 1], nodes[i]);
                v0 + (v1 - v0) * (alpha - a0) / (a1 - a0)
            }
        }
    }
}

fn grid_max(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let mut best = (lo, g(lo));
    for i in 1..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let v = g(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// `sup_α (φ(α) − D(α))` and a maximizer, by grid search over the domain of
/// `D` followed by two zoomed grids around the best cell.
pub fn varadhan_reference(phi: &Phi, d: &RateFunction) -> (f64, f64) {
    const POINTS: usize = 20_001;
    let g = |a: f64| {
        let r = d.evaluate(a).to_f64();
        if r.is_finite() {
            phi.evaluate(a) - r
        } else {
            f64::NEG_INFINITY
        }
    };
    let dom = d.domain();
    let mut reach = 16.0;
    let (mut x, mut v, mut lo, mut hi);
    loop {
        lo = dom.lower.value().unwrap_or(-reach);
        hi = dom.upper.value().unwrap_or(reach);
        (x, v) = grid_max(&g, lo, hi, POINTS);
        let at_open_end = (dom.lower.value().is_none() && x == lo) || (dom.upper.value().is_none() && x == hi);
        if !at_open_end || reach >= 1e4 {
            break;
        }
        reach *= 4.0;
    }
    let mut cell = (hi - lo) / (POINTS - 1) as f64;
    for _ in 0..2 {
        let (a, b) = ((x - cell).max(lo), (x + cell).min(hi));
        let (x2, v2) = grid_max(&g, a, b, 2001);
        if v2 > v {
            (x, v) = (x2, v2);
        }
        cell = (b - a) / 2000.0;
    }
    (v, x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VaradhanEstimate {
    /// `(1/T) ln` of the sample mean of `e^{Tφ(Z(T)/T)}`.
    pub value: f64,
    pub std_err: f64,
    pub n: usize,
    pub horizon: f64,
    pub method: Method,
}

/// Monte Carlo Varadhan functional.
///
/// The tilted method samples steps from the law aimed at the maximizer of
/// `φ − D` and reweights by the likelihood ratio.
pub fn varadhan_functional(
    model: &ProcessModel,
    phi: &Phi,
    horizon: f64,
    n: usize,
    method: SamplingMethod,
    seed: u64,
) -> Result<VaradhanEstimate> {
    phi.validate()?;
    if n == 0 || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameters(format!("n = {n}, T = {horizon}")));
    }
    let (exponents, method) = match method {
        SamplingMethod::Crude => {
            let xs: Vec<f64> = (0..n as u64)
                .into_par_iter()
                .map(|i| {
                    let z = sample_values_at(model, horizon, &[horizon], &mut stream_rng(seed, i))[0];
                    horizon * phi.evaluate(z / horizon)
                })
                .collect();
            (xs, Method::Crude)
        }
        SamplingMethod::Tilted => {
            let law = model.step_law().ok_or_else(|| Error::NoStepLaw(model.label()))?;
            // for linear φ the optimal tilt is the slope itself
            let mu = match phi {
                Phi::Linear { slope } if law.mgf_domain().contains(*slope) => *slope,
                _ => {
                    let (_, target) = varadhan_reference(phi, &law.rate_function());
                    resolve_tilt(&law, target, (target - 0.05, target + 0.05))?.mu
                }
            };
            let tl = TiltedLaw::new(&law, mu)?;
            let steps = steps_by(horizon);
            let noise = model.noise().copied();
            let initial = model.initial;
            let xs: Vec<f64> = (0..n as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(seed, i);
                    let z0 = initial.sample(&mut rng, horizon);
                    let mut s = 0.0;
                    for _ in 0..steps {
                        s += tl.sample(&mut rng);
                    }
                    let y = noise.map_or(0.0, |nm| nm.sample(&mut rng, horizon));
                    let log_w = -tl.mu * s + steps as f64 * tl.log_norm;
                    horizon * phi.evaluate((z0 + s + y) / horizon) + log_w
                })
                .collect();
            (xs, Method::Tilted { tilts: vec![tl.mu] })
        }
    };
    if let Some(&bad) = exponents.iter().find(|x| !x.is_finite()) {
        return Err(Error::OverflowRisk { exponent: bad });
    }
    let lm = log_mean_exp(&exponents, n);
    Ok(VaradhanEstimate {
        value: lm.log_mean / horizon,
        std_err: lm.rel_std_err / horizon,
        n,
        horizon,
        method,
    })
}
