use serde::Serialize;

use super::cadlag::{CadlagPath, PiecewiseLinear};
use super::partition::Partition;
use crate::convex::RateFunction;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::stats::compensated_sum;

/// Piecewise-linear interpolant of `f` through `(s_k, f(s_k))`.
pub fn interpolate(f: &CadlagPath, p: &Partition) -> CadlagPath {
    let nodes = p.points().iter().map(|&s| (s, f.value(s))).collect();
    CadlagPath::piecewise_linear(nodes).expect("partition points form valid abscissae")
}

/// `F(s, t) = (t − s) · D((f(t) − f(s)) / (t − s))`.
pub fn interval_function(f: &CadlagPath, d: &RateFunction, s: f64, t: f64) -> Result<ExtendedReal> {
    if !(t > s) || s < 0.0 || t > 1.0 {
        return Err(Error::DegenerateInterval { s, t });
    }
    let h = t - s;
    Ok(d.evaluate((f.value(t) - f.value(s)) / h).scale(h))
}

fn weighted_sum(terms: impl Iterator<Item = (f64, f64)>, d: &RateFunction) -> ExtendedReal {
    let mut parts = Vec::new();
    for (h, slope) in terms {
        match d.evaluate(slope) {
            ExtendedReal::Finite(v) => parts.push(h * v),
            ExtendedReal::PosInfinity => return ExtendedReal::PosInfinity,
        }
    }
    ExtendedReal::Finite(compensated_sum(parts))
}

/// `I(f) = ∫ D(f'(s)) ds`, summed exactly over the linear pieces of `f`.
pub fn integral_i(f: &PiecewiseLinear, d: &RateFunction) -> ExtendedReal {
    weighted_sum(f.segments().into_iter().map(|(a, b, slope)| (b - a, slope)), d)
}

/// `I(f^s)` for the interpolant through the given partition points, without
/// materializing the interpolant.
pub fn interpolant_integral(f: &CadlagPath, points: &[f64], d: &RateFunction) -> ExtendedReal {
    let values: Vec<f64> = points.iter().map(|&s| f.value(s)).collect();
    weighted_sum(
        points.windows(2).zip(values.windows(2)).map(|(s, v)| {
            let h = s[1] - s[0];
            (h, (v[1] - v[0]) / h)
        }),
        d,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefinementKind {
    /// `K = 2^j` for `j = 0..=max_level`.
    Dyadic { max_level: u32 },
    /// The listed uniform cell counts, in order.
    Uniform { cells: Vec<usize> },
}

/// Family of partitions used to approximate `J(f) = sup I(f^s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSchedule {
    pub kind: RefinementKind,
    /// Successive trace values closer than this count as converged.
    pub tolerance: f64,
    /// Trace values above this with growing increments count as divergence.
    pub ceiling: f64,
}

impl Default for RefinementSchedule {
    fn default() -> Self {
        RefinementSchedule {
            kind: RefinementKind::Dyadic { max_level: 22 },
            tolerance: 1e-10,
            ceiling: 1e6,
        }
    }
}

impl RefinementSchedule {
    pub fn dyadic(max_level: u32) -> Self {
        RefinementSchedule {
            kind: RefinementKind::Dyadic { max_level },
            ..Default::default()
        }
    }

    pub fn uniform(cells: Vec<usize>) -> Self {
        RefinementSchedule {
            kind: RefinementKind::Uniform { cells },
            ..Default::default()
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn partitions(&self) -> Result<Vec<Partition>> {
        match &self.kind {
            RefinementKind::Dyadic { max_level } => (0..=*max_level).map(Partition::dyadic).collect(),
            RefinementKind::Uniform { cells } => cells.iter().map(|&k| Partition::uniform(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Diverged,
    /// The trace settled but the path jumps; no limit statement covers this
    /// case, so the value is reported without a verdict.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationIntegralResult {
    pub value: ExtendedReal,
    /// `(K, I(f^{s^K}))` in schedule order; `K` counts cells after the path's
    /// own breakpoints are merged in.
    pub partition_trace: Vec<(usize, ExtendedReal)>,
    pub diverged: bool,
    pub verdict: Verdict,
}

/// Approximates `J(f)` by evaluating `I(f^{s^K})` along the schedule. Every
/// partition absorbs the path's breakpoints, so jumps are always straddled.
pub fn deviation_integral_j(
    f: &CadlagPath,
    d: &RateFunction,
    schedule: &RefinementSchedule,
) -> Result<DeviationIntegralResult> {
    let jumps = f.has_jumps();
    let mut trace: Vec<(usize, ExtendedReal)> = Vec::new();
    let mut previous_points: Option<Vec<f64>> = None;
    let finish = |trace: Vec<(usize, ExtendedReal)>, verdict: Verdict| {
        let value = match verdict {
            Verdict::Diverged => ExtendedReal::PosInfinity,
            _ => trace
                .iter()
                .map(|(_, v)| *v)
                .fold(ExtendedReal::ZERO, ExtendedReal::max),
        };
        DeviationIntegralResult {
            value,
            diverged: verdict == Verdict::Diverged,
            partition_trace: trace,
            verdict,
        }
    };
    for base in schedule.partitions()? {
        let p = base.with_points(f.breakpoints());
        if previous_points.as_deref() == Some(p.points()) {
            continue;
        }
        let value = interpolant_integral(f, p.points(), d);
        trace.push((p.cells(), value));
        previous_points = Some(p.points().to_vec());
        let Some(v) = value.finite() else {
            return Ok(finish(trace, Verdict::Diverged));
        };
        let n = trace.len();
        if n >= 3 {
            let (a, b) = (trace[n - 3].1.to_f64(), trace[n - 2].1.to_f64());
            if v > schedule.ceiling && v - b > b - a {
                return Ok(finish(trace, Verdict::Diverged));
            }
        }
        if n >= 2 && (v - trace[n - 2].1.to_f64()).abs() < schedule.tolerance {
            let verdict = if jumps {
                Verdict::Inconclusive
            } else {
                Verdict::Converged
            };
            return Ok(finish(trace, verdict));
        }
    }
    Ok(finish(trace, Verdict::Inconclusive))
}
