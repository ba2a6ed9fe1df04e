use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::convex::{Bound, FundamentalFunction, Interval, RateFunction};
use crate::error::{Error, Result};
use crate::stats::log_sum_exp;

/// Finitely supported step distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteLaw {
    /// Atoms are sorted by value; probabilities must sum to 1 within `1e-12`.
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidParameters(
                "discrete law needs equally many values and probabilities".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameters(
                "values must be finite, probabilities nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameters(format!("probabilities sum to {total}, not 1")));
        }
        let mut atoms: Vec<(f64, f64)> = values.into_iter().zip(probs).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameters("duplicate atoms".into()));
        }
        let (values, probs): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("nonempty") = 1.0;
        Ok(DiscreteLaw {
            values,
            probs,
            cumulative,
        })
    }

    /// `+1` with probability `p_up`, `-1` otherwise.
    pub fn rademacher(p_up: f64) -> Result<Self> {
        DiscreteLaw::new(vec![-1.0, 1.0], vec![1.0 - p_up, p_up])
    }

    pub fn constant(x: f64) -> Self {
        DiscreteLaw::new(vec![x], vec![1.0]).expect("point mass is valid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `γ = max |x|` over the support.
    pub fn support_bound(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| p * (v - m) * (v - m))
            .sum()
    }

    pub fn log_mgf(&self, mu: f64) -> f64 {
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&v, &p)| p.ln() + mu * v)
            .collect();
        log_sum_exp(&terms)
    }

    /// Probabilities proportional to `p_i e^{μ x_i}`.
    pub fn tilted(&self, mu: f64) -> DiscreteLaw {
        let norm = self.log_mgf(mu);
        let probs: Vec<f64> = self
            .values
            .iter()
            .zip(&self.probs)
            .map(|(&v, &p)| if p > 0.0 { (p.ln() + mu * v - norm).exp() } else { 0.0 })
            .collect();
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.into_iter().map(|p| p / total).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("nonempty") = 1.0;
        DiscreteLaw {
            values: self.values.clone(),
            probs,
            cumulative,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.values.len() == 1 {
            return self.values[0];
        }
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.values[i.min(self.values.len() - 1)]
    }

    pub fn log_pmf(&self, x: f64) -> f64 {
        match self.values.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => self.probs[i].ln(),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn is_symmetric_pm_one(&self) -> bool {
        self.values == [-1.0, 1.0]
    }
}

/// Law of one increment `ξ_j` of a walk, or of one jump of a renewal process.
#[derive(Debug, Clone, PartialEq)]
pub enum StepLaw {
    Discrete(DiscreteLaw),
    Gaussian { mean: f64, sd: f64 },
    Exponential { rate: f64 },
}

impl StepLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StepLaw::Discrete(_) => Ok(()),
            StepLaw::Gaussian { mean, sd } if mean.is_finite() && sd >= 0.0 && sd.is_finite() => Ok(()),
            StepLaw::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            _ => Err(Error::InvalidParameters(format!("invalid step law {self:?}"))),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            StepLaw::Discrete(d) => d.mean(),
            StepLaw::Gaussian { mean, .. } => *mean,
            StepLaw::Exponential { rate } => 1.0 / rate,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            StepLaw::Discrete(d) => d.variance(),
            StepLaw::Gaussian { sd, .. } => sd * sd,
            StepLaw::Exponential { rate } => 1.0 / (rate * rate),
        }
    }

    /// Where `ln E e^{μξ}` is finite.
    pub fn mgf_domain(&self) -> Interval {
        match self {
            StepLaw::Exponential { rate } => Interval::new(Bound::Unbounded, Bound::Open(*rate)),
            _ => Interval::real_line(),
        }
    }

    /// `ln E e^{μξ}`, `+∞` outside [`Self::mgf_domain`].
    pub fn log_mgf(&self, mu: f64) -> f64 {
        match self {
            StepLaw::Discrete(d) => d.log_mgf(mu),
            StepLaw::Gaussian { mean, sd } => mean * mu + 0.5 * sd * sd * mu * mu,
            StepLaw::Exponential { rate } => {
                if mu < *rate {
                    -(-mu / rate).ln_1p()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Mean of the law tilted by `e^{μx}`, i.e. the derivative of the log-MGF.
    pub fn tilted_mean(&self, mu: f64) -> f64 {
        self.tilted(mu).map_or(f64::NAN, |t| t.mean())
    }

    /// The law with density proportional to `e^{μx}` against this one.
    pub fn tilted(&self, mu: f64) -> Option<StepLaw> {
        if !self.mgf_domain().contains(mu) {
            return None;
        }
        Some(match self {
            StepLaw::Discrete(d) => StepLaw::Discrete(d.tilted(mu)),
            StepLaw::Gaussian { mean, sd } => StepLaw::Gaussian {
                mean: mean + sd * sd * mu,
                sd: *sd,
            },
            StepLaw::Exponential { rate } => StepLaw::Exponential { rate: rate - mu },
        })
    }

    /// Effective domain of the rate function: the closed range of the tilted mean.
    pub fn rate_domain(&self) -> Interval {
        match self {
            StepLaw::Discrete(d) => {
                let support: Vec<f64> = d
                    .values()
                    .iter()
                    .zip(d.probs())
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(&v, _)| v)
                    .collect();
                Interval::closed(support[0], support[support.len() - 1])
            }
            StepLaw::Gaussian { mean, sd } if *sd == 0.0 => Interval::point(*mean),
            StepLaw::Gaussian { .. } => Interval::real_line(),
            StepLaw::Exponential { .. } => Interval::new(Bound::Open(0.0), Bound::Unbounded),
        }
    }

    /// `A(μ) = ln E e^{μξ}` as a fundamental function.
    pub fn fundamental(&self) -> FundamentalFunction {
        match self {
            StepLaw::Discrete(d) if d.is_symmetric_pm_one() && d.probs()[1] > 0.0 && d.probs()[0] > 0.0 => {
                FundamentalFunction::rademacher(d.probs()[1])
            }
            StepLaw::Gaussian { mean, sd } => FundamentalFunction::gaussian(*mean, sd * sd),
            StepLaw::Exponential { rate } => FundamentalFunction::exponential(*rate),
            _ => {
                let law = self.clone();
                let deriv = self.clone();
                FundamentalFunction::new("discrete", self.mgf_domain(), move |mu| law.log_mgf(mu))
                    .with_derivative(move |mu| deriv.tilted_mean(mu))
            }
        }
    }

    /// Conjugate of [`Self::fundamental`], in closed form where one is known.
    pub fn rate_function(&self) -> RateFunction {
        match self {
            StepLaw::Discrete(d) if d.is_symmetric_pm_one() => RateFunction::rademacher(d.probs()[1]),
            StepLaw::Gaussian { mean, sd } if *sd > 0.0 => RateFunction::gaussian(*mean, sd * sd),
            StepLaw::Exponential { rate } => RateFunction::exponential(*rate),
            StepLaw::Discrete(d) if d.values().len() == 1 => RateFunction::indicator(d.values()[0]),
            StepLaw::Gaussian { mean, .. } => RateFunction::indicator(*mean),
            StepLaw::Discrete(_) => RateFunction::from_conjugate(self.fundamental(), self.rate_domain()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            StepLaw::Discrete(d) => d.sample(rng),
            StepLaw::Gaussian { mean, sd } => {
                if *sd == 0.0 {
                    *mean
                } else {
                    Normal::new(*mean, *sd).expect("validated").sample(rng)
                }
            }
            StepLaw::Exponential { rate } => Exp::new(*rate).expect("validated").sample(rng),
        }
    }

    /// Log of the probability mass (discrete) or density (continuous) at `x`.
    pub fn log_density(&self, x: f64) -> f64 {
        match self {
            StepLaw::Discrete(d) => d.log_pmf(x),
            StepLaw::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            StepLaw::Exponential { rate } => {
                if x >= 0.0 {
                    rate.ln() - rate * x
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn discrete_law_normalization_is_enforced() {
        assert!(DiscreteLaw::new(vec![0.0, 1.0], vec![0.5, 0.5 + 1e-9]).is_err());
        assert!(DiscreteLaw::new(vec![0.0, 1.0], vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(DiscreteLaw::new(vec![0.0, 0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn rademacher_mgf_is_log_cosh() {
        let law = StepLaw::Discrete(DiscreteLaw::rademacher(0.5).unwrap());
        assert!((law.log_mgf(1.0) - 1f64.cosh().ln()).abs() < 1e-15);
        assert!((law.tilted_mean(0.3) - 0.3f64.tanh()).abs() < 1e-15);
        assert_eq!(law.rate_domain(), Interval::closed(-1.0, 1.0));
    }

    #[test]
    fn tilted_mean_is_log_mgf_derivative() {
        let laws = [
            StepLaw::Discrete(DiscreteLaw::new(vec![-2.0, 0.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap()),
            StepLaw::Gaussian { mean: 0.5, sd: 2.0 },
            StepLaw::Exponential { rate: 2.0 },
        ];
        for law in &laws {
            for mu in [-0.7, 0.0, 0.4, 1.1] {
                let h = 1e-6;
                let fd = (law.log_mgf(mu + h) - law.log_mgf(mu - h)) / (2.0 * h);
                assert!((fd - law.tilted_mean(mu)).abs() < 1e-7, "{law:?} at {mu}");
            }
        }
    }

    #[test]
    fn empirical_frequencies_match_probabilities() {
        let law = DiscreteLaw::new(vec![-1.0, 0.0, 2.0], vec![0.25, 0.5, 0.25]).unwrap();
        let mut rng = stream_rng(11, 0);
        let n = 200_000;
        let twos = (0..n).filter(|_| law.sample(&mut rng) == 2.0).count() as f64 / n as f64;
        assert!((twos - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }

    #[test]
    fn generic_discrete_rate_function_is_conjugate() {
        let law = StepLaw::Discrete(DiscreteLaw::new(vec![0.0, 1.0, 2.0], vec![0.25, 0.5, 0.25]).unwrap());
        let d = law.rate_function();
        // Binomial(2, 1/2) steps: D(α) = 2 · D_bernoulli(α/2)
        let bern = |x: f64| x * (2.0 * x).ln() + (1.0 - x) * (2.0 * (1.0 - x)).ln();
        for a in [0.5, 1.0, 1.7] {
            assert!((d.evaluate(a).to_f64() - 2.0 * bern(a / 2.0)).abs() < 1e-9);
        }
    }
}
