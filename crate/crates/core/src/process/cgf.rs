use rayon::prelude::*;
use serde::Serialize;

use super::model::{Conditioning, ProcessModel};
use super::simulate::sample_values_at;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::stats::log_mean_exp;

/// `(1/T) ln` of the sample mean of `e^{μ(Z(T) − αT)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgfEstimate {
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub std_err: f64,
    pub n: usize,
    pub mu: f64,
    pub horizon: f64,
}

/// Empirical scaled CGF of `Z(T)`, optionally conditioned on `Z(0)/T ∈ (α − η, α + η)`.
///
/// The conditioning band replaces the model's initial law. Sample `i` uses
/// stream `i` of `seed`.
pub fn empirical_cgf(
    model: &ProcessModel,
    mu: f64,
    horizon: f64,
    n: usize,
    conditioning: Option<Conditioning>,
    seed: u64,
) -> Result<CgfEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameters(
            "empirical_cgf needs at least one sample".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) || !mu.is_finite() {
        return Err(Error::InvalidParameters(format!("mu = {mu}, T = {horizon}")));
    }
    let (model, alpha) = match conditioning {
        Some(c) => {
            c.validate()?;
            (model.clone().with_conditioning(c), c.alpha)
        }
        None => (model.clone(), 0.0),
    };
    let shift = alpha * horizon;
    let exponents: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let z = sample_values_at(&model, horizon, &[horizon], &mut rng)[0];
            mu * (z - shift)
        })
        .collect();
    if let Some(&bad) = exponents.iter().find(|x| !x.is_finite()) {
        return Err(Error::OverflowRisk { exponent: bad });
    }
    let lm = log_mean_exp(&exponents, n);
    Ok(CgfEstimate {
        value: lm.log_mean / horizon,
        std_err: lm.rel_std_err / horizon,
        n,
        mu,
        horizon,
    })
}
