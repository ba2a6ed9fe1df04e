//! Experiment configuration files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use ldlab_core::verify::MIN_SAMPLES;
use ldlab_core::{EpsilonSchedule, FamilySpec, ModelSpec, Phi, SamplingMethod};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Conjugate,
    DeviationIntegral,
    Simulate,
    VerifyLocal,
    VerifyFdd,
    VerifyFunctional,
    Varadhan,
    Tightness,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Conjugate => "conjugate",
            Kind::DeviationIntegral => "deviation-integral",
            Kind::Simulate => "simulate",
            Kind::VerifyLocal => "verify-local",
            Kind::VerifyFdd => "verify-fdd",
            Kind::VerifyFunctional => "verify-functional",
            Kind::Varadhan => "varadhan",
            Kind::Tightness => "tightness",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Exit with status 3 when a deviation integral diverges.
    #[serde(default)]
    pub fail_on_divergence: bool,
    pub family: Option<FamilySpec>,
    pub model: Option<ModelSpec>,
    pub conjugate: Option<ConjugateSection>,
    pub deviation_integral: Option<DeviationSection>,
    pub simulate: Option<SimulateSection>,
    pub verify: Option<VerifySection>,
    pub varadhan: Option<VaradhanSection>,
    pub tightness: Option<TightnessSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateSection {
    pub alphas: Option<Vec<f64>>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub points: Option<usize>,
    /// Golden-section iterations per grid point.
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationSection {
    pub path: PathBuf,
    /// `dyadic` (default) or `uniform`.
    pub schedule: Option<String>,
    pub max_level: Option<u32>,
    pub cells: Option<Vec<usize>>,
    pub tolerance: Option<f64>,
    pub ceiling: Option<f64>,
    /// Grid for a numeric conjugate when the family has no closed-form rate.
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub horizon: f64,
    #[serde(default = "one")]
    pub grid_step: f64,
    #[serde(default = "one_count")]
    pub count: usize,
    /// Window fractions for an almost-Lipschitz oscillation check.
    pub deltas: Option<Vec<f64>>,
    pub gamma0: Option<f64>,
    pub gamma1: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn one_count() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub horizons: Vec<f64>,
    pub n: usize,
    #[serde(default = "tilted")]
    pub method: SamplingMethod,
    #[serde(default = "EpsilonSchedule::canonical")]
    pub eps: EpsilonSchedule,
    pub beta: Option<f64>,
    pub conditioning: Option<ldlab_core::Conditioning>,
    pub partition: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub path: Option<PathBuf>,
}

fn tilted() -> SamplingMethod {
    SamplingMethod::Tilted
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaradhanSection {
    pub horizons: Vec<f64>,
    pub n: usize,
    #[serde(default = "tilted")]
    pub method: SamplingMethod,
    pub phi: Phi,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TightnessSection {
    pub targets: Vec<f64>,
    pub horizons: Vec<f64>,
    pub n: usize,
    pub v_grid: Option<Vec<f64>>,
}

/// A parsed config together with its raw bytes and location.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub raw: Vec<u8>,
    pub dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let raw = std::fs::read(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&raw).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, raw, dir })
    }

    /// Resolves a file named in the config against the config's directory
    /// and checks that it exists.
    pub fn existing_file(&self, p: &Path) -> CliResult<PathBuf> {
        let full = if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        };
        if !full.is_file() {
            return Err(CliError::config(format!(
                "referenced file {} does not exist",
                full.display()
            )));
        }
        Ok(full)
    }
}

fn need<'a, T>(section: &'a Option<T>, name: &str, kind: Kind) -> CliResult<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| CliError::config(format!("`{kind}` needs a [{name}] section")))
}

pub fn check_horizons(hs: &[f64]) -> CliResult<()> {
    if hs.is_empty() {
        return Err(CliError::config("horizons must not be empty"));
    }
    if hs.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(CliError::config(format!(
            "horizons must be positive and finite, got {hs:?}"
        )));
    }
    Ok(())
}

pub fn check_n(n: usize) -> CliResult<()> {
    if n < MIN_SAMPLES {
        return Err(CliError::config(format!("n must be at least {MIN_SAMPLES}, got {n}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Structural checks that need no numerics. Model and family specs are
    /// built (and so validated) by the experiment before it runs anything.
    pub fn validate(&self, kind: Kind) -> CliResult<()> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::config(format!(
                    "config declares kind `{k}` but `{kind}` was requested"
                )));
            }
        }
        if self.workers == Some(0) {
            return Err(CliError::config("workers must be positive"));
        }
        match kind {
            Kind::Conjugate => {
                need(&self.family, "family", kind)?;
                let c = need(&self.conjugate, "conjugate", kind)?;
                if c.alphas.is_none() && (c.alpha_min.is_none() || c.alpha_max.is_none() || c.points.is_none()) {
                    return Err(CliError::config(
                        "[conjugate] needs `alphas` or `alpha_min`, `alpha_max` and `points`",
                    ));
                }
            }
            Kind::DeviationIntegral => {
                need(&self.family, "family", kind)?;
                let d = need(&self.deviation_integral, "deviation_integral", kind)?;
                match d.schedule.as_deref().unwrap_or("dyadic") {
                    "dyadic" => {}
                    "uniform" if d.cells.as_ref().is_some_and(|c| !c.is_empty()) => {}
                    "uniform" => return Err(CliError::config("uniform schedule needs nonempty `cells`")),
                    other => return Err(CliError::config(format!("unknown schedule `{other}`"))),
                }
            }
            Kind::Simulate => {
                need(&self.model, "model", kind)?;
                let s = need(&self.simulate, "simulate", kind)?;
                check_horizons(&[s.horizon])?;
                if s.count == 0 {
                    return Err(CliError::config("count must be positive"));
                }
                if s.deltas.is_some() && (s.gamma0.is_none() || s.gamma1.is_none()) {
                    return Err(CliError::config("the oscillation check needs `gamma0` and `gamma1`"));
                }
            }
            Kind::VerifyLocal | Kind::VerifyFdd | Kind::VerifyFunctional => {
                need(&self.model, "model", kind)?;
                let v = need(&self.verify, "verify", kind)?;
                check_horizons(&v.horizons)?;
                check_n(v.n)?;
                v.eps.validate().map_err(|e| CliError::config(format!("eps: {e}")))?;
                match kind {
                    Kind::VerifyLocal if v.beta.is_none() => return Err(CliError::config("verify-local needs `beta`")),
                    Kind::VerifyFdd if v.partition.is_none() || v.betas.is_none() => {
                        return Err(CliError::config("verify-fdd needs `partition` and `betas`"))
                    }
                    Kind::VerifyFunctional if v.path.is_none() => {
                        return Err(CliError::config("verify-functional needs `path`"))
                    }
                    _ => {}
                }
            }
            Kind::Varadhan => {
                need(&self.model, "model", kind)?;
                let v = need(&self.varadhan, "varadhan", kind)?;
                check_horizons(&v.horizons)?;
                if v.n == 0 {
                    return Err(CliError::config("n must be positive"));
                }
                v.phi.validate().map_err(|e| CliError::config(format!("phi: {e}")))?;
            }
            Kind::Tightness => {
                need(&self.model, "model", kind)?;
                let t = need(&self.tightness, "tightness", kind)?;
                check_horizons(&t.horizons)?;
                check_n(t.n)?;
                if t.targets.is_empty() {
                    return Err(CliError::config("targets must not be empty"));
                }
            }
        }
        Ok(())
    }
}
