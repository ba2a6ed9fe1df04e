use std::fmt;
use std::sync::Arc;

use super::conjugate::{conjugate_point, MuSearch};
use super::domain::{Bound, Interval};
use super::fundamental::{FamilySpec, FundamentalFunction};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

pub type RateFn = Arc<dyn Fn(f64) -> ExtendedReal + Send + Sync>;

#[derive(Clone)]
pub enum Representation {
    /// Evaluable map; consulted only inside the stated domain.
    ClosedForm(RateFn),
    /// Values on a strictly increasing grid, linearly interpolated between
    /// nodes and `+∞` outside the grid.
    Grid {
        alphas: Vec<f64>,
        values: Vec<ExtendedReal>,
    },
}

/// A rate function `D: ℝ → [0, ∞]`, typically the conjugate of a
/// [`FundamentalFunction`].
#[derive(Clone)]
pub struct RateFunction {
    label: String,
    representation: Representation,
    domain: Interval,
    zero_point: Option<f64>,
}

impl fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.representation {
            Representation::ClosedForm(_) => "closed-form".to_string(),
            Representation::Grid { alphas, .. } => format!("grid({} nodes)", alphas.len()),
        };
        f.debug_struct("RateFunction")
            .field("label", &self.label)
            .field("representation", &repr)
            .field("domain", &self.domain)
            .field("zero_point", &self.zero_point)
            .finish()
    }
}

impl RateFunction {
    pub fn from_fn(
        label: impl Into<String>,
        domain: Interval,
        zero_point: Option<f64>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RateFunction {
            label: label.into(),
            representation: Representation::ClosedForm(Arc::new(move |a| ExtendedReal::from_f64(f(a)))),
            domain,
            zero_point,
        }
    }

    pub fn from_grid(alphas: Vec<f64>, values: Vec<ExtendedReal>, zero_point: Option<f64>) -> Result<Self> {
        if alphas.is_empty() || alphas.len() != values.len() {
            return Err(Error::InvalidParameters(
                "grid rate function needs equally many nodes and values".into(),
            ));
        }
        if alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameters(
                "grid nodes must be strictly increasing".into(),
            ));
        }
        let first = values.iter().position(|v| v.is_finite());
        let last = values.iter().rposition(|v| v.is_finite());
        let domain = match (first, last) {
            (Some(i), Some(j)) => Interval::closed(alphas[i], alphas[j]),
            _ => return Err(Error::InvalidRateFunction("D is identically +inf".into())),
        };
        Ok(RateFunction {
            label: "grid".into(),
            representation: Representation::Grid { alphas, values },
            domain,
            zero_point,
        })
    }

    /// `(α − m)² / (2σ²)`.
    pub fn gaussian(mean: f64, variance: f64) -> Self {
        RateFunction::from_fn("gaussian", Interval::real_line(), Some(mean), move |a| {
            (a - mean) * (a - mean) / (2.0 * variance)
        })
    }

    /// Relative entropy of `((1+α)/2, (1−α)/2)` against `(p, 1−p)` on `[−1, 1]`.
    pub fn rademacher(p: f64) -> Self {
        RateFunction::from_fn(
            "rademacher",
            Interval::closed(-1.0, 1.0),
            Some(2.0 * p - 1.0),
            move |a| {
                let up = 0.5 * (1.0 + a);
                let down = 0.5 * (1.0 - a);
                let term = |x: f64, q: f64| if x > 0.0 { x * (x / q).ln() } else { 0.0 };
                (term(up, p) + term(down, 1.0 - p)).max(0.0)
            },
        )
    }

    /// `λα − 1 − ln(λα)` on `(0, ∞)`.
    pub fn exponential(rate: f64) -> Self {
        RateFunction::from_fn(
            "exponential",
            Interval::new(Bound::Open(0.0), Bound::Unbounded),
            Some(1.0 / rate),
            move |a| {
                let x = rate * a;
                (x - 1.0 - x.ln()).max(0.0)
            },
        )
    }

    /// `α ln(α/λ) − α + λ` on `[0, ∞)`.
    pub fn poisson(rate: f64) -> Self {
        RateFunction::from_fn(
            "poisson",
            Interval::new(Bound::Closed(0.0), Bound::Unbounded),
            Some(rate),
            move |a| {
                let t = if a > 0.0 { a * (a / rate).ln() } else { 0.0 };
                (t - a + rate).max(0.0)
            },
        )
    }

    /// `0` at `x`, `+∞` elsewhere.
    pub fn indicator(x: f64) -> Self {
        RateFunction::from_fn("indicator", Interval::point(x), Some(x), |_| 0.0)
    }

    /// Lazily conjugated `A`, one bracketed maximization per evaluation.
    /// `domain` is the effective domain of the conjugate (the closed range of `A'`).
    pub fn from_conjugate(a: FundamentalFunction, domain: Interval) -> Self {
        let search = MuSearch::for_domain(a.domain());
        let zero_point = if a.domain().contains_interior(0.0) {
            a.slope(0.0)
        } else {
            None
        };
        let label = format!("conjugate({})", a.label());
        RateFunction {
            label,
            representation: Representation::ClosedForm(Arc::new(move |alpha| {
                conjugate_point(&a, alpha, &search)
                    .map(|c| c.value)
                    .unwrap_or(ExtendedReal::PosInfinity)
            })),
            domain,
            zero_point,
        }
    }

    /// Closed-form conjugate of a declared family.
    pub fn from_family(spec: &FamilySpec) -> Result<Self> {
        let a = FundamentalFunction::from_spec(spec)?;
        if spec.domain.is_some() {
            return Ok(RateFunction::from_conjugate(a, Interval::real_line()));
        }
        Ok(match spec.family.as_str() {
            "gaussian" => RateFunction::gaussian(spec.mean.unwrap_or(0.0), spec.variance.unwrap_or(1.0)),
            "rademacher" => RateFunction::rademacher(spec.p.unwrap_or(0.5)),
            "poisson" => RateFunction::poisson(spec.rate.unwrap_or(1.0)),
            "exponential" => RateFunction::exponential(spec.rate.unwrap_or(1.0)),
            "zero" => RateFunction::indicator(0.0),
            _ => RateFunction::from_conjugate(a, Interval::real_line()),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn zero_point(&self) -> Option<f64> {
        self.zero_point
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn evaluate(&self, alpha: f64) -> ExtendedReal {
        match &self.representation {
            Representation::ClosedForm(f) => {
                if self.domain.contains(alpha) {
                    f(alpha)
                } else {
                    ExtendedReal::PosInfinity
                }
            }
            Representation::Grid { alphas, values } => grid_eval(alphas, values, alpha),
        }
    }

    /// Checks nonnegativity, properness and (for grids) midpoint convexity and
    /// absence of an upward jump at the ends of the finite range.
    pub fn validate(&self) -> Result<()> {
        const TOL: f64 = 1e-9;
        match &self.representation {
            Representation::Grid { alphas, values } => {
                if let Some(i) = values.iter().position(|v| v.finite().is_some_and(|x| x < -TOL)) {
                    return Err(Error::InvalidRateFunction(format!(
                        "negative value at alpha = {}",
                        alphas[i]
                    )));
                }
                for i in 1..alphas.len().saturating_sub(1) {
                    let (Some(l), Some(m), Some(r)) =
                        (values[i - 1].finite(), values[i].finite(), values[i + 1].finite())
                    else {
                        continue;
                    };
                    let t = (alphas[i] - alphas[i - 1]) / (alphas[i + 1] - alphas[i - 1]);
                    let chord = (1.0 - t) * l + t * r;
                    if m > chord + TOL * (1.0 + l.abs() + r.abs()) {
                        return Err(Error::InvalidRateFunction(format!(
                            "convexity fails at alpha = {}",
                            alphas[i]
                        )));
                    }
                }
                let finite: Vec<(f64, f64)> = alphas
                    .iter()
                    .zip(values)
                    .filter_map(|(&a, v)| v.finite().map(|x| (a, x)))
                    .collect();
                if finite.len() >= 3 {
                    for (b, n1, n2) in [
                        (finite[0], finite[1], finite[2]),
                        (
                            finite[finite.len() - 1],
                            finite[finite.len() - 2],
                            finite[finite.len() - 3],
                        ),
                    ] {
                        let trend = (n1.1 - n2.1).abs() / (n1.0 - n2.0).abs() * (b.0 - n1.0).abs();
                        if b.1 > n1.1 + 10.0 * trend + TOL {
                            return Err(Error::InvalidRateFunction(format!(
                                "upward jump at boundary alpha = {}",
                                b.0
                            )));
                        }
                    }
                }
                Ok(())
            }
            Representation::ClosedForm(_) => {
                let probe = self
                    .zero_point
                    .or_else(|| self.domain.lower.value())
                    .or_else(|| self.domain.upper.value())
                    .unwrap_or(0.0);
                match self.evaluate(probe) {
                    ExtendedReal::Finite(v) if v < -TOL => {
                        Err(Error::InvalidRateFunction(format!("negative value at alpha = {probe}")))
                    }
                    _ => Ok(()),
                }
            }
        }
    }
}

fn grid_eval(alphas: &[f64], values: &[ExtendedReal], alpha: f64) -> ExtendedReal {
    let n = alphas.len();
    if alpha.is_nan() || alpha < alphas[0] || alpha > alphas[n - 1] {
        return ExtendedReal::PosInfinity;
    }
    let i = alphas.partition_point(|&a| a <= alpha);
    if i > 0 && alphas[i - 1] == alpha {
        return values[i - 1];
    }
    let (a0, a1) = (alphas[i - 1], alphas[i]);
    match (values[i - 1], values[i]) {
        (ExtendedReal::Finite(v0), ExtendedReal::Finite(v1)) => {
            ExtendedReal::Finite(v0 + (v1 - v0) * (alpha - a0) / (a1 - a0))
        }
        _ => ExtendedReal::PosInfinity,
    }
}
