use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_abscissae(xs: &[f64], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidPath(format!("{what}: no points")));
    }
    if xs[0] != 0.0 {
        return Err(Error::InvalidPath(format!(
            "{what}: first abscissa must be 0, got {}",
            xs[0]
        )));
    }
    if xs.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
        return Err(Error::InvalidPath(format!("{what}: abscissae must lie in [0, 1]")));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidPath(format!(
            "{what}: abscissae must be strictly increasing"
        )));
    }
    Ok(())
}

/// Continuous path, linear between nodes and constant after the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    s: Vec<f64>,
    v: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self> {
        let (s, v): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();
        check_abscissae(&s, "piecewise-linear path")?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPath("node values must be finite".into()));
        }
        Ok(PiecewiseLinear { s, v })
    }

    /// `f(s) = slope · s`.
    pub fn linear(slope: f64) -> Self {
        PiecewiseLinear {
            s: vec![0.0, 1.0],
            v: vec![0.0, slope],
        }
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.s
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s.iter().copied().zip(self.v.iter().copied())
    }

    pub fn value(&self, s: f64) -> f64 {
        let i = self.s.partition_point(|&x| x <= s);
        if i == 0 {
            return self.v[0];
        }
        if i == self.s.len() {
            return self.v[i - 1];
        }
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        let (v0, v1) = (self.v[i - 1], self.v[i]);
        v0 + (v1 - v0) * ((s - s0) / (s1 - s0))
    }

    /// Linear pieces `(start, end, slope)` covering `[0, 1]`, including the
    /// constant tail after the last node.
    pub fn segments(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = self
            .s
            .windows(2)
            .zip(self.v.windows(2))
            .map(|(s, v)| (s[0], s[1], (v[1] - v[0]) / (s[1] - s[0])))
            .collect();
        let last = self.s[self.s.len() - 1];
        if last < 1.0 {
            out.push((last, 1.0, 0.0));
        }
        out
    }
}

/// Right-continuous step path: `levels[i]` holds on `[times[i], times[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    times: Vec<f64>,
    levels: Vec<f64>,
}

impl StepPath {
    pub fn new(times: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if times.len() != levels.len() {
            return Err(Error::InvalidPath("times and levels differ in length".into()));
        }
        check_abscissae(&times, "step path")?;
        if levels.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPath("levels must be finite".into()));
        }
        Ok(StepPath { times, levels })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    fn index_at(&self, s: f64) -> usize {
        self.times.partition_point(|&t| t <= s).max(1) - 1
    }

    pub fn value(&self, s: f64) -> f64 {
        self.levels[self.index_at(s)]
    }

    pub fn left_limit(&self, s: f64) -> f64 {
        let i = self.times.partition_point(|&t| t < s);
        self.levels[i.max(1) - 1]
    }
}

/// A path in `D[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum CadlagPath {
    PiecewiseLinear(PiecewiseLinear),
    Step(StepPath),
    /// Samples held constant until the next sample time.
    Sampled(StepPath),
}

impl CadlagPath {
    pub fn zero() -> Self {
        CadlagPath::PiecewiseLinear(PiecewiseLinear::linear(0.0))
    }

    pub fn linear(slope: f64) -> Self {
        CadlagPath::PiecewiseLinear(PiecewiseLinear::linear(slope))
    }

    pub fn piecewise_linear(nodes: Vec<(f64, f64)>) -> Result<Self> {
        PiecewiseLinear::new(nodes).map(CadlagPath::PiecewiseLinear)
    }

    /// Step path from jump times (the first must be `0`) and levels.
    pub fn step(times: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        StepPath::new(times, levels).map(CadlagPath::Step)
    }

    pub fn sampled(samples: Vec<(f64, f64)>) -> Result<Self> {
        let (t, v) = samples.into_iter().unzip();
        StepPath::new(t, v).map(CadlagPath::Sampled)
    }

    /// `f(s)`, with `s` clamped to `[0, 1]`.
    pub fn value(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            CadlagPath::PiecewiseLinear(p) => p.value(s),
            CadlagPath::Step(p) | CadlagPath::Sampled(p) => p.value(s),
        }
    }

    /// `f(s−)`; equals `f(0)` at `s = 0`.
    pub fn left_limit(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            CadlagPath::PiecewiseLinear(p) => p.value(s),
            CadlagPath::Step(p) | CadlagPath::Sampled(p) => p.left_limit(s),
        }
    }

    /// Node or jump abscissae of the representation.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            CadlagPath::PiecewiseLinear(p) => p.abscissae(),
            CadlagPath::Step(p) | CadlagPath::Sampled(p) => p.times(),
        }
    }

    /// Abscissae where the path actually jumps.
    pub fn jump_times(&self) -> Vec<f64> {
        match self {
            CadlagPath::PiecewiseLinear(_) => Vec::new(),
            CadlagPath::Step(p) | CadlagPath::Sampled(p) => (1..p.times.len())
                .filter(|&i| p.levels[i] != p.levels[i - 1])
                .map(|i| p.times[i])
                .collect(),
        }
    }

    pub fn has_jumps(&self) -> bool {
        !self.jump_times().is_empty()
    }

    pub fn as_piecewise_linear(&self) -> Option<&PiecewiseLinear> {
        match self {
            CadlagPath::PiecewiseLinear(p) => Some(p),
            _ => None,
        }
    }
}

/// `sup_{s ∈ [0,1]} |f(s) − g(s)|`.
///
/// Between consecutive breakpoints of either path both are affine, so the
/// supremum is attained at a breakpoint value or a left limit there.
pub fn uniform_norm_distance(f: &CadlagPath, g: &CadlagPath) -> f64 {
    let mut pts: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    pts.push(1.0);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts.iter().fold(0.0_f64, |acc, &s| {
        let at = (f.value(s) - g.value(s)).abs();
        let before = (f.left_limit(s) - g.left_limit(s)).abs();
        acc.max(at).max(before)
    })
}

/// Serialized form of a path (JSON node lists).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSpec {
    PiecewiseLinear { nodes: Vec<(f64, f64)> },
    Step { times: Vec<f64>, levels: Vec<f64> },
    Sampled { samples: Vec<(f64, f64)> },
}

impl TryFrom<PathSpec> for CadlagPath {
    type Error = Error;

    fn try_from(spec: PathSpec) -> Result<Self> {
        match spec {
            PathSpec::PiecewiseLinear { nodes } => CadlagPath::piecewise_linear(nodes),
            PathSpec::Step { times, levels } => CadlagPath::step(times, levels),
            PathSpec::Sampled { samples } => CadlagPath::sampled(samples),
        }
    }
}

impl From<&CadlagPath> for PathSpec {
    fn from(path: &CadlagPath) -> Self {
        match path {
            CadlagPath::PiecewiseLinear(p) => PathSpec::PiecewiseLinear {
                nodes: p.nodes().collect(),
            },
            CadlagPath::Step(p) => PathSpec::Step {
                times: p.times.clone(),
                levels: p.levels.clone(),
            },
            CadlagPath::Sampled(p) => PathSpec::Sampled {
                samples: p.times.iter().copied().zip(p.levels.iter().copied()).collect(),
            },
        }
    }
}
