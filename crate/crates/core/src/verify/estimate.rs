use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::extended::ExtendedReal;
use crate::stats::log_mean_exp;

/// Sampling scheme requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMethod {
    Crude,
    Tilted,
}

/// Scheme actually used, with the per-segment tilts.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Crude,
    Tilted { tilts: Vec<f64> },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Crude => f.write_str("crude"),
            Method::Tilted { tilts } => {
                f.write_str("tilted(")?;
                for (i, mu) in tilts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{mu:?}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Monte Carlo estimate of an event probability at horizon `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub p_hat: f64,
    /// `ln p_hat`, accumulated in log space.
    pub log_p_hat: f64,
    /// `−ln(p_hat)/T`, `+∞` when nothing was hit.
    pub log_rate: ExtendedReal,
    pub n: usize,
    pub hits: usize,
    pub std_err: f64,
    pub method: Method,
    pub horizon: f64,
    pub eps: f64,
    /// One-sided `3/n` bound reported when `p_hat = 0`.
    pub upper_bound: Option<f64>,
    /// Some target sat on the boundary of the rate domain and was replaced
    /// by an interior proxy for tilting.
    pub proxy: bool,
}

impl MCEstimate {
    /// Aggregates per-sample log-weights of the hits (in sample order).
    pub(crate) fn from_log_weights(
        hit_log_weights: &[f64],
        n: usize,
        method: Method,
        horizon: f64,
        eps: f64,
        proxy: bool,
    ) -> MCEstimate {
        let hits = hit_log_weights.len();
        let lm = log_mean_exp(hit_log_weights, n);
        let (p_hat, log_p_hat, std_err) = if hits == 0 {
            (0.0, f64::NEG_INFINITY, 0.0)
        } else {
            let log_p = lm.log_mean.min(0.0);
            let p = log_p.exp();
            (p, log_p, lm.rel_std_err * p)
        };
        MCEstimate {
            p_hat,
            log_p_hat,
            log_rate: if hits == 0 {
                ExtendedReal::PosInfinity
            } else {
                ExtendedReal::Finite(-log_p_hat / horizon)
            },
            n,
            hits,
            std_err,
            method,
            horizon,
            eps,
            upper_bound: (hits == 0).then(|| 3.0 / n as f64),
            proxy,
        }
    }

    pub fn rel_std_err(&self) -> f64 {
        if self.p_hat > 0.0 {
            self.std_err / self.p_hat
        } else {
            f64::INFINITY
        }
    }

    /// Delta-method standard error of `log_rate`.
    pub fn log_rate_std_err(&self) -> f64 {
        self.rel_std_err() / self.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crude_aggregation_is_binomial() {
        let est = MCEstimate::from_log_weights(&[0.0; 25], 100, Method::Crude, 10.0, 0.1, false);
        assert!((est.p_hat - 0.25).abs() < 1e-15);
        assert!((est.std_err - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(est.upper_bound, None);
    }

    #[test]
    fn zero_hits_give_infinite_rate_and_rule_of_three() {
        let est = MCEstimate::from_log_weights(&[], 1000, Method::Crude, 10.0, 0.1, false);
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.log_rate, ExtendedReal::PosInfinity);
        assert_eq!(est.upper_bound, Some(0.003));
    }

    #[test]
    fn method_labels() {
        assert_eq!(Method::Crude.to_string(), "crude");
        assert_eq!(
            Method::Tilted { tilts: vec![0.5, -1.0] }.to_string(),
            "tilted(0.5;-1.0)"
        );
    }
}
