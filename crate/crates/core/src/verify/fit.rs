use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::least_squares_line;

/// Least-squares fit `ln p(T) ≈ −rate · T + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
}

/// Fits the decay rate of `ln p_hat` over the horizons. All log-probabilities
/// must be finite.
pub fn fit_rate(horizons: &[f64], log_p: &[f64]) -> Result<RateFit> {
    if log_p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameters(
            "cannot fit a rate through zero estimates".into(),
        ));
    }
    let (slope, intercept) = least_squares_line(horizons, log_p)
        .ok_or_else(|| Error::InvalidParameters("need at least two distinct horizons".into()))?;
    Ok(RateFit {
        rate: -slope,
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let ts = [50.0, 100.0, 200.0];
        let lp: Vec<f64> = ts.iter().map(|t| -0.3 * t + 1.5).collect();
        let fit = fit_rate(&ts, &lp).unwrap();
        assert!((fit.rate - 0.3).abs() < 1e-12 && (fit.intercept - 1.5).abs() < 1e-10);
        assert!(fit_rate(&ts, &[-1.0, f64::NEG_INFINITY, -3.0]).is_err());
    }
}
