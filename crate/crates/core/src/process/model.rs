use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::law::{DiscreteLaw, StepLaw};
use crate::convex::{Bound, FundamentalFunction, Interval, RateFunction};
use crate::error::{Error, Result};

/// The band `{|Z(0)/T − α| < η}` on which an estimate is conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub alpha: f64,
    pub eta: f64,
}

impl Conditioning {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_finite() && self.eta > 0.0 && self.eta.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("conditioning band {self:?}")))
        }
    }
}

/// Law of `Z(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLaw {
    Point(f64),
    /// Uniform on `(αT − ηT, αT + ηT)`: conditioning by construction.
    Band(Conditioning),
}

impl InitialLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, horizon: f64) -> f64 {
        match *self {
            InitialLaw::Point(z0) => z0,
            InitialLaw::Band(c) => {
                // open interval: redraw the (measure-zero) left endpoint
                loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        return (c.alpha + c.eta * (2.0 * u - 1.0)) * horizon;
                    }
                }
            }
        }
    }

    /// `Z(0)/T` is at the band centre (or `z0/T` for a point mass).
    pub fn centre(&self, horizon: f64) -> f64 {
        match *self {
            InitialLaw::Point(z0) => z0,
            InitialLaw::Band(c) => c.alpha * horizon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interarrival {
    Exponential { rate: f64 },
    Deterministic { period: f64 },
}

/// Perturbation `Y(t)` added to a base process, independent of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// `Y(t) = c · ln(2 + t) · U`, `U` uniform on `(−1, 1)`.
    LogEnvelope { c: f64 },
    /// Centered Gaussian with variance `scale² · (1 + t)^exponent`, `exponent < 1`.
    Gaussian { scale: f64, exponent: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::LogEnvelope { c } if c >= 0.0 && c.is_finite() => Ok(()),
            NoiseModel::Gaussian { scale, exponent }
                if scale >= 0.0 && scale.is_finite() && (0.0..1.0).contains(&exponent) =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidParameters(format!("invalid noise model {self:?}"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> f64 {
        match *self {
            NoiseModel::LogEnvelope { c } => {
                let u: f64 = rng.random();
                c * (2.0 + t).ln() * (2.0 * u - 1.0)
            }
            NoiseModel::Gaussian { scale, exponent } => {
                let sd = scale * (1.0 + t).powf(0.5 * exponent);
                if sd == 0.0 {
                    0.0
                } else {
                    Normal::new(0.0, sd).expect("validated").sample(rng)
                }
            }
        }
    }

    /// Almost-sure bound on `|Y(t)|`, if any.
    pub fn envelope(&self, t: f64) -> Option<f64> {
        match *self {
            NoiseModel::LogEnvelope { c } => Some(c * (2.0 + t).ln()),
            NoiseModel::Gaussian { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessFamily {
    /// `Z(t) = Z(0) + Σ_{j ≤ ⌊t⌋} ξ_j` with finitely supported steps.
    BoundedStepWalk(DiscreteLaw),
    /// Same with `N(mean, sd²)` steps.
    GaussianWalk {
        mean: f64,
        sd: f64,
    },
    /// Jumps from `jump` at renewal epochs.
    CompoundRenewal {
        interarrival: Interarrival,
        jump: StepLaw,
    },
    NoisePerturbed {
        base: Box<ProcessModel>,
        noise: NoiseModel,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    pub family: ProcessFamily,
    pub initial: InitialLaw,
}

impl ProcessModel {
    pub fn bounded_step_walk(law: DiscreteLaw) -> Self {
        ProcessModel {
            family: ProcessFamily::BoundedStepWalk(law),
            initial: InitialLaw::Point(0.0),
        }
    }

    /// Symmetric `±1` walk started at 0.
    pub fn rademacher_walk() -> Self {
        Self::bounded_step_walk(DiscreteLaw::rademacher(0.5).expect("valid"))
    }

    pub fn gaussian_walk(mean: f64, sd: f64) -> Result<Self> {
        StepLaw::Gaussian { mean, sd }.validate()?;
        Ok(ProcessModel {
            family: ProcessFamily::GaussianWalk { mean, sd },
            initial: InitialLaw::Point(0.0),
        })
    }

    pub fn compound_renewal(interarrival: Interarrival, jump: StepLaw) -> Result<Self> {
        jump.validate()?;
        let ok = match interarrival {
            Interarrival::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Interarrival::Deterministic { period } => period > 0.0 && period.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidParameters(format!(
                "invalid inter-arrival law {interarrival:?}"
            )));
        }
        Ok(ProcessModel {
            family: ProcessFamily::CompoundRenewal { interarrival, jump },
            initial: InitialLaw::Point(0.0),
        })
    }

    pub fn noise_perturbed(base: ProcessModel, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        if matches!(base.family, ProcessFamily::NoisePerturbed { .. }) {
            return Err(Error::InvalidParameters("noise may only be added once".into()));
        }
        let initial = base.initial;
        Ok(ProcessModel {
            family: ProcessFamily::NoisePerturbed {
                base: Box::new(base),
                noise,
            },
            initial,
        })
    }

    pub fn with_initial(mut self, initial: InitialLaw) -> Self {
        self.initial = initial;
        if let ProcessFamily::NoisePerturbed { base, .. } = &mut self.family {
            base.initial = initial;
        }
        self
    }

    pub fn with_z0(self, z0: f64) -> Self {
        self.with_initial(InitialLaw::Point(z0))
    }

    pub fn with_conditioning(self, band: Conditioning) -> Self {
        self.with_initial(InitialLaw::Band(band))
    }

    pub fn label(&self) -> String {
        match &self.family {
            ProcessFamily::BoundedStepWalk(law) => format!("bounded-step walk {:?}/{:?}", law.values(), law.probs()),
            ProcessFamily::GaussianWalk { mean, sd } => format!("gaussian walk N({mean}, {sd}^2)"),
            ProcessFamily::CompoundRenewal { interarrival, jump } => {
                format!("compound renewal {interarrival:?} / {jump:?}")
            }
            ProcessFamily::NoisePerturbed { base, noise } => format!("{} + {noise:?}", base.label()),
        }
    }

    /// Base model without the noise layer.
    pub fn base(&self) -> &ProcessModel {
        match &self.family {
            ProcessFamily::NoisePerturbed { base, .. } => base,
            _ => self,
        }
    }

    pub fn noise(&self) -> Option<&NoiseModel> {
        match &self.family {
            ProcessFamily::NoisePerturbed { noise, .. } => Some(noise),
            _ => None,
        }
    }

    /// Per-unit-time step law of a walk (the noise layer is ignored).
    pub fn step_law(&self) -> Option<StepLaw> {
        match &self.base().family {
            ProcessFamily::BoundedStepWalk(law) => Some(StepLaw::Discrete(law.clone())),
            ProcessFamily::GaussianWalk { mean, sd } => Some(StepLaw::Gaussian { mean: *mean, sd: *sd }),
            _ => None,
        }
    }

    /// Support bound `γ` of a bounded-step walk.
    pub fn support_bound(&self) -> Option<f64> {
        match &self.base().family {
            ProcessFamily::BoundedStepWalk(law) => Some(law.support_bound()),
            _ => None,
        }
    }

    /// Closed-form fundamental function, when the family admits one.
    pub fn analytic_a(&self) -> Option<FundamentalFunction> {
        if let Some(law) = self.step_law() {
            return Some(law.fundamental());
        }
        match &self.base().family {
            ProcessFamily::CompoundRenewal { interarrival, jump } => {
                let law = jump.clone();
                let dlaw = jump.clone();
                let domain = jump.mgf_domain();
                Some(match *interarrival {
                    Interarrival::Exponential { rate } => {
                        FundamentalFunction::new("compound poisson", domain, move |mu| rate * law.log_mgf(mu).exp_m1())
                            .with_derivative(move |mu| rate * dlaw.log_mgf(mu).exp() * dlaw.tilted_mean(mu))
                    }
                    Interarrival::Deterministic { period } => {
                        FundamentalFunction::new("periodic jumps", domain, move |mu| law.log_mgf(mu) / period)
                            .with_derivative(move |mu| dlaw.tilted_mean(mu) / period)
                    }
                })
            }
            _ => None,
        }
    }

    /// Conjugate of [`Self::analytic_a`], closed form for walks.
    pub fn rate_function(&self) -> Option<RateFunction> {
        if let Some(law) = self.step_law() {
            return Some(law.rate_function());
        }
        match &self.base().family {
            ProcessFamily::CompoundRenewal { interarrival, jump } => {
                let a = self.analytic_a()?;
                let d = jump.rate_domain();
                let domain = match *interarrival {
                    Interarrival::Deterministic { period } => {
                        Interval::new(scale_bound(d.lower, period), scale_bound(d.upper, period))
                    }
                    // unboundedly many jumps, and none with positive probability
                    Interarrival::Exponential { .. } => {
                        let side = |b: Bound, outward: fn(f64) -> bool| match b.value() {
                            Some(v) if !outward(v) => Bound::Closed(0.0),
                            _ => Bound::Unbounded,
                        };
                        Interval::new(side(d.lower, |v| v < 0.0), side(d.upper, |v| v > 0.0))
                    }
                };
                Some(RateFunction::from_conjugate(a, domain))
            }
            _ => None,
        }
    }
}

fn scale_bound(b: Bound, period: f64) -> Bound {
    match b {
        Bound::Unbounded => Bound::Unbounded,
        Bound::Closed(v) => Bound::Closed(v / period),
        Bound::Open(v) => Bound::Open(v / period),
    }
}

/// Step or jump law as written in a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    /// `rademacher`, `discrete`, `gaussian` or `exponential`.
    pub law: String,
    pub p: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub probs: Option<Vec<f64>>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub rate: Option<f64>,
}

fn need(v: Option<f64>, what: &str, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParameters(format!("{what}: missing `{name}`")))
}

impl StepSpec {
    pub fn build(&self) -> Result<StepLaw> {
        let law = match self.law.as_str() {
            "rademacher" => StepLaw::Discrete(DiscreteLaw::rademacher(self.p.unwrap_or(0.5))?),
            "discrete" => {
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| Error::InvalidParameters("discrete law: missing `values`".into()))?;
                let probs = self
                    .probs
                    .clone()
                    .ok_or_else(|| Error::InvalidParameters("discrete law: missing `probs`".into()))?;
                StepLaw::Discrete(DiscreteLaw::new(values, probs)?)
            }
            "gaussian" => StepLaw::Gaussian {
                mean: self.mean.unwrap_or(0.0),
                sd: self.sd.unwrap_or(1.0),
            },
            "exponential" => StepLaw::Exponential {
                rate: need(self.rate, "exponential law", "rate")?,
            },
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        law.validate()?;
        Ok(law)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// `log_envelope` or `gaussian`.
    pub kind: String,
    pub c: Option<f64>,
    pub scale: Option<f64>,
    pub exponent: Option<f64>,
}

impl NoiseSpec {
    pub fn build(&self) -> Result<NoiseModel> {
        let noise = match self.kind.as_str() {
            "log_envelope" => NoiseModel::LogEnvelope {
                c: self.c.unwrap_or(1.0),
            },
            "gaussian" => NoiseModel::Gaussian {
                scale: self.scale.unwrap_or(1.0),
                exponent: self.exponent.unwrap_or(0.5),
            },
            other => return Err(Error::UnknownFamily(format!("noise `{other}`"))),
        };
        noise.validate()?;
        Ok(noise)
    }
}

/// Config-file form of a [`ProcessModel`].
///
/// `family` is one of `rademacher`, `bounded_step`, `gaussian`,
/// `compound_renewal`; a `noise` table wraps the model in a noise layer.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default)]
    pub z0: f64,
    pub p: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub probs: Option<Vec<f64>>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    /// `exponential` or `deterministic`.
    pub interarrival: Option<String>,
    pub arrival_rate: Option<f64>,
    pub period: Option<f64>,
    pub jump: Option<StepSpec>,
    pub noise: Option<NoiseSpec>,
    pub conditioning: Option<Conditioning>,
}

impl ModelSpec {
    pub fn named(family: &str) -> Self {
        ModelSpec {
            family: family.to_string(),
            ..Default::default()
        }
    }

    pub fn build(&self) -> Result<ProcessModel> {
        let base = match self.family.as_str() {
            "rademacher" => ProcessModel::bounded_step_walk(DiscreteLaw::rademacher(self.p.unwrap_or(0.5))?),
            "bounded_step" => {
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| Error::InvalidParameters("bounded_step: missing `values`".into()))?;
                let probs = self
                    .probs
                    .clone()
                    .ok_or_else(|| Error::InvalidParameters("bounded_step: missing `probs`".into()))?;
                ProcessModel::bounded_step_walk(DiscreteLaw::new(values, probs)?)
            }
            "gaussian" => ProcessModel::gaussian_walk(self.mean.unwrap_or(0.0), self.sd.unwrap_or(1.0))?,
            "compound_renewal" => {
                let inter = match self.interarrival.as_deref().unwrap_or("exponential") {
                    "exponential" => Interarrival::Exponential {
                        rate: self.arrival_rate.unwrap_or(1.0),
                    },
                    "deterministic" => Interarrival::Deterministic {
                        period: self.period.unwrap_or(1.0),
                    },
                    other => return Err(Error::UnknownFamily(format!("inter-arrival `{other}`"))),
                };
                let jump = self
                    .jump
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameters("compound_renewal: missing `jump`".into()))?
                    .build()?;
                ProcessModel::compound_renewal(inter, jump)?
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        let mut model = base.with_z0(self.z0);
        if let Some(c) = self.conditioning {
            c.validate()?;
            model = model.with_conditioning(c);
        }
        if let Some(noise) = &self.noise {
            model = ProcessModel::noise_perturbed(model, noise.build()?)?;
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn unknown_family_is_rejected() {
        assert!(matches!(ModelSpec::named("levy").build(), Err(Error::UnknownFamily(_))));
        let mut spec = ModelSpec::named("compound_renewal");
        spec.jump = Some(StepSpec {
            law: "cauchy".into(),
            ..Default::default()
        });
        assert!(matches!(spec.build(), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn spec_parses_from_toml() {
        let spec: ModelSpec = toml::from_str(
            r#"
family = "compound_renewal"
interarrival = "exponential"
arrival_rate = 2.0
[jump]
law = "exponential"
rate = 1.5
[noise]
kind = "log_envelope"
c = 1.0
"#,
        )
        .unwrap();
        let model = spec.build().unwrap();
        assert!(model.noise().is_some());
        let a = model.analytic_a().unwrap();
        // 2 (1.5 / (1.5 − μ) − 1) at μ = 0.5
        assert!((a.evaluate(0.5).to_f64() - 2.0 * (1.5 / 1.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn band_initial_law_stays_inside() {
        let band = InitialLaw::Band(Conditioning { alpha: 0.3, eta: 0.01 });
        let mut rng = stream_rng(5, 0);
        for _ in 0..10_000 {
            let z0 = band.sample(&mut rng, 100.0);
            assert!(z0 > 29.0 && z0 < 31.0);
        }
    }

    #[test]
    fn compound_poisson_rate_is_conjugate() {
        let model = ProcessModel::compound_renewal(
            Interarrival::Exponential { rate: 1.0 },
            StepLaw::Discrete(DiscreteLaw::constant(1.0)),
        )
        .unwrap();
        let d = model.rate_function().unwrap();
        // Poisson(1) counting process: α ln α − α + 1
        for a in [0.5, 1.0, 2.5] {
            let exact = a * f64::ln(a) - a + 1.0;
            assert!((d.evaluate(a).to_f64() - exact).abs() < 1e-8, "{a}");
        }
    }
}
