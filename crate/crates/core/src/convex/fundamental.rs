use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::domain::{Bound, Interval};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

pub(crate) type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex function `A: ℝ → (-∞, ∞]` given by an evaluator on its effective
/// domain. Outside the domain it is `+∞`.
#[derive(Clone)]
pub struct FundamentalFunction {
    label: String,
    domain: Interval,
    value: RealFn,
    derivative: Option<RealFn>,
}

impl fmt::Debug for FundamentalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FundamentalFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

pub(crate) fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl FundamentalFunction {
    pub fn new(label: impl Into<String>, domain: Interval, value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FundamentalFunction {
            label: label.into(),
            domain,
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    /// `A(μ)`; `+∞` outside the domain and wherever the evaluator overflows.
    pub fn evaluate(&self, mu: f64) -> ExtendedReal {
        if !self.domain.contains(mu) {
            return ExtendedReal::PosInfinity;
        }
        let v = (self.value)(mu);
        if v.is_nan() || v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Supplied derivative, if any.
    pub fn derivative(&self, mu: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(mu))
    }

    /// `A'(μ)` from the supplied derivative, else a central difference with a
    /// step that stays inside the domain. `None` off the domain interior.
    pub fn slope(&self, mu: f64) -> Option<f64> {
        if !self.domain.contains_interior(mu) {
            return None;
        }
        if let Some(d) = self.derivative(mu) {
            return Some(d);
        }
        let h = fd_step(&self.domain, mu);
        let hi = self.evaluate(mu + h).finite()?;
        let lo = self.evaluate(mu - h).finite()?;
        Some((hi - lo) / (2.0 * h))
    }

    /// Gaussian steps with the given mean and variance: `A(μ) = mμ + σ²μ²/2`.
    pub fn gaussian(mean: f64, variance: f64) -> Self {
        FundamentalFunction::new("gaussian", Interval::real_line(), move |mu| {
            mean * mu + 0.5 * variance * mu * mu
        })
        .with_derivative(move |mu| mean + variance * mu)
    }

    /// Steps `+1` with probability `p`, `-1` otherwise.
    pub fn rademacher(p: f64) -> Self {
        let shift = 0.5 * (p / (1.0 - p)).ln();
        let offset = (2.0 * (p * (1.0 - p)).sqrt()).ln();
        FundamentalFunction::new("rademacher", Interval::real_line(), move |mu| {
            if mu.abs() <= 1.0 {
                // exact zero at the origin
                (p * mu.exp_m1() + (1.0 - p) * (-mu).exp_m1()).ln_1p()
            } else {
                offset + ln_cosh(mu + shift)
            }
        })
        .with_derivative(move |mu| (mu + shift).tanh())
    }

    /// Poisson(λ) steps: `A(μ) = λ(e^μ − 1)`.
    pub fn poisson(rate: f64) -> Self {
        FundamentalFunction::new("poisson", Interval::real_line(), move |mu| rate * mu.exp_m1())
            .with_derivative(move |mu| rate * mu.exp())
    }

    /// Exponential steps with the given rate: `A(μ) = −ln(1 − μ/λ)` on `(−∞, λ)`.
    pub fn exponential(rate: f64) -> Self {
        FundamentalFunction::new(
            "exponential",
            Interval::new(Bound::Unbounded, Bound::Open(rate)),
            move |mu| -(-mu / rate).ln_1p(),
        )
        .with_derivative(move |mu| 1.0 / (rate - mu))
    }

    /// `A ≡ 0` on the real line (degenerate zero process).
    pub fn zero() -> Self {
        FundamentalFunction::new("zero", Interval::real_line(), |_| 0.0).with_derivative(|_| 0.0)
    }

    /// Piecewise-linear interpolation of `(μ, A(μ))` pairs on the closed
    /// hull of the abscissae.
    pub fn table(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameters("table needs at least one point".into()));
        }
        if points.iter().any(|(m, a)| !m.is_finite() || !a.is_finite()) {
            return Err(Error::InvalidParameters("table entries must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameters(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        let domain = Interval::closed(points[0].0, points[points.len() - 1].0);
        let pts = Arc::new(points);
        Ok(FundamentalFunction::new(label, domain, move |mu| {
            interpolate_table(&pts, mu)
        }))
    }

    /// Restricts the effective domain, keeping the evaluator.
    pub fn restricted_to(mut self, domain: Interval) -> Self {
        self.domain = self.domain.intersect(&domain);
        self
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let positive = |name: &str, v: Option<f64>, default: Option<f64>| -> Result<f64> {
            match v.or(default) {
                Some(x) if x > 0.0 && x.is_finite() => Ok(x),
                Some(x) => Err(Error::InvalidParameters(format!("{name} must be positive, got {x}"))),
                None => Err(Error::InvalidParameters(format!("missing parameter `{name}`"))),
            }
        };
        let base = match spec.family.as_str() {
            "gaussian" => FundamentalFunction::gaussian(
                spec.mean.unwrap_or(0.0),
                positive("variance", spec.variance, Some(1.0))?,
            ),
            "rademacher" => {
                let p = spec.p.unwrap_or(0.5);
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidParameters(format!("p must lie in (0, 1), got {p}")));
                }
                FundamentalFunction::rademacher(p)
            }
            "poisson" => FundamentalFunction::poisson(positive("rate", spec.rate, None)?),
            "exponential" => FundamentalFunction::exponential(positive("rate", spec.rate, None)?),
            "zero" => FundamentalFunction::zero(),
            "table" => {
                let path = spec
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameters("table family needs a `table` CSV path".into()))?;
                let points = crate::io::read_table_csv(std::fs::File::open(path)?)?;
                FundamentalFunction::table("table", points)?
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        Ok(match spec.domain {
            Some(d) => base.restricted_to(d),
            None => base,
        })
    }
}

fn interpolate_table(pts: &[(f64, f64)], mu: f64) -> f64 {
    let i = pts.partition_point(|(m, _)| *m <= mu);
    if i == 0 {
        return pts[0].1;
    }
    if i == pts.len() {
        return pts[pts.len() - 1].1;
    }
    let (m0, a0) = pts[i - 1];
    let (m1, a1) = pts[i];
    a0 + (a1 - a0) * (mu - m0) / (m1 - m0)
}

/// Finite-difference step at `mu` that keeps `mu ± h` inside the domain.
pub(crate) fn fd_step(domain: &Interval, mu: f64) -> f64 {
    let mut h = 1e-5 * mu.abs().max(1.0);
    if let Some(a) = domain.lower.value() {
        h = h.min((mu - a) / 4.0);
    }
    if let Some(b) = domain.upper.value() {
        h = h.min((b - mu) / 4.0);
    }
    h
}

/// Declarative description of a fundamental-function family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    /// One of `gaussian`, `rademacher`, `poisson`, `exponential`, `zero`, `table`.
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// CSV file with header `mu,A` for the `table` family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Interval>,
}

impl FamilySpec {
    pub fn named(family: &str) -> Self {
        FamilySpec {
            family: family.to_string(),
            mean: None,
            variance: None,
            p: None,
            rate: None,
            table: None,
            domain: None,
        }
    }
}
