use serde::Serialize;

use super::conjugate::{sup_concave, MuSearch};
use super::fundamental::{fd_step, FundamentalFunction};
use super::rate::{RateFunction, Representation};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

/// Where to probe a fundamental function.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    /// Points in the domain interior for the differentiability test.
    pub interior: Vec<f64>,
    /// One sequence per finite boundary point, approaching it from inside.
    pub boundary_sequences: Vec<Vec<f64>>,
    /// `|A'|` must grow along each sequence and end above this value.
    pub min_final_slope: f64,
}

impl ProbeSpec {
    /// Nine evenly spaced interior points and eight-term geometric approach
    /// sequences (`b ∓ d·10^{-k}`) toward each finite boundary.
    pub fn auto(a: &FundamentalFunction) -> Self {
        let domain = a.domain();
        if !domain.has_nonempty_interior() {
            return ProbeSpec {
                interior: Vec::new(),
                boundary_sequences: Vec::new(),
                min_final_slope: 1e3,
            };
        }
        let s = MuSearch::for_domain(domain);
        let (lo, hi) = (s.lower, s.upper);
        let interior = (1..10).map(|k| lo + (hi - lo) * k as f64 / 10.0).collect();
        let d = ((hi - lo) / 2.0).min(1.0);
        let mut boundary_sequences = Vec::new();
        if let Some(a0) = domain.lower.value() {
            boundary_sequences.push((1..=8).map(|k| a0 + d * 10f64.powi(-k)).collect());
        }
        if let Some(b0) = domain.upper.value() {
            boundary_sequences.push((1..=8).map(|k| b0 - d * 10f64.powi(-k)).collect());
        }
        ProbeSpec {
            interior,
            boundary_sequences,
            min_final_slope: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteepnessSide {
    pub boundary: f64,
    pub slopes: Vec<f64>,
    pub steep: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub nonempty_interior: bool,
    pub differentiable: bool,
    pub steep: bool,
    /// Steepness is an asymptotic property; a finite probe can only supply
    /// evidence for it.
    pub evidence: &'static str,
    pub non_differentiable_at: Vec<f64>,
    pub sides: Vec<SteepnessSide>,
}

impl SmoothnessReport {
    pub fn essentially_smooth(&self) -> bool {
        self.nonempty_interior && self.differentiable && self.steep
    }
}

fn differentiable_at(a: &FundamentalFunction, mu: f64) -> bool {
    let h = fd_step(a.domain(), mu);
    let f = |x: f64| a.evaluate(x).finite();
    let quotients = |h: f64| -> Option<(f64, f64)> {
        let (l, m, r) = (f(mu - h)?, f(mu)?, f(mu + h)?);
        Some(((r - m) / h - (m - l) / h, (r - l) / (2.0 * h)))
    };
    let (Some((gap1, c1)), Some((gap2, c2)), Some(m)) = (quotients(h), quotients(h / 2.0), f(mu)) else {
        return false;
    };
    let roundoff = 1e3 * f64::EPSILON * (m.abs() + 1.0) / h;
    let abs_tol = 1e-7 * (1.0 + c1.abs()) + roundoff;
    let one_sided_close = gap2.abs() <= 0.55 * gap1.abs() + abs_tol;
    let symmetric_stable = (c1 - c2).abs() <= 1e-4 * (1.0 + c1.abs()) + roundoff;
    one_sided_close && symmetric_stable
}

/// Probe-level check of the three essential-smoothness conditions.
///
/// Unbounded domain directions carry no steepness requirement.
pub fn check_essential_smoothness(a: &FundamentalFunction, probes: &ProbeSpec) -> Result<SmoothnessReport> {
    let domain = a.domain();
    let nonempty_interior = domain.has_nonempty_interior();
    for &p in probes.interior.iter().chain(probes.boundary_sequences.iter().flatten()) {
        if !domain.contains_interior(p) {
            return Err(Error::ProbeOutsideDomain { probe: p });
        }
    }
    if !nonempty_interior {
        return Ok(SmoothnessReport {
            nonempty_interior,
            differentiable: false,
            steep: false,
            evidence: "probe-level evidence",
            non_differentiable_at: Vec::new(),
            sides: Vec::new(),
        });
    }
    let non_differentiable_at: Vec<f64> = probes
        .interior
        .iter()
        .copied()
        .filter(|&mu| !differentiable_at(a, mu))
        .collect();
    let sides: Vec<SteepnessSide> = probes
        .boundary_sequences
        .iter()
        .filter(|seq| !seq.is_empty())
        .map(|seq| {
            let slopes: Vec<f64> = seq.iter().map(|&mu| a.slope(mu).unwrap_or(f64::NAN).abs()).collect();
            let increasing = slopes.windows(2).all(|w| w[1] > w[0]);
            let last = slopes[slopes.len() - 1];
            let limit = seq[seq.len() - 1];
            let boundary = [domain.lower.value(), domain.upper.value()]
                .into_iter()
                .flatten()
                .min_by(|x, y| (x - limit).abs().total_cmp(&(y - limit).abs()))
                .unwrap_or(limit);
            SteepnessSide {
                boundary,
                steep: increasing && last >= probes.min_final_slope,
                slopes,
            }
        })
        .collect();
    Ok(SmoothnessReport {
        nonempty_interior,
        differentiable: non_differentiable_at.is_empty(),
        steep: sides.iter().all(|s| s.steep),
        evidence: "probe-level evidence",
        non_differentiable_at,
        sides,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodnessLevel {
    pub level: f64,
    pub empty: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodnessReport {
    pub levels: Vec<GoodnessLevel>,
}

impl GoodnessReport {
    pub fn all_bounded(&self) -> bool {
        self.levels.iter().all(|l| l.bounded)
    }
}

const LEVEL_SEARCH_LIMIT: f64 = 1e8;

fn minimizer(d: &RateFunction) -> Option<f64> {
    if let Some(z) = d.zero_point() {
        if d.evaluate(z).is_finite() {
            return Some(z);
        }
    }
    match d.representation() {
        Representation::Grid { alphas, values } => alphas
            .iter()
            .zip(values)
            .filter_map(|(&a, v)| v.finite().map(|x| (a, x)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(a, _)| a),
        Representation::ClosedForm(_) => {
            let g = |a: f64| match d.evaluate(a) {
                ExtendedReal::Finite(v) => -v,
                ExtendedReal::PosInfinity => f64::NEG_INFINITY,
            };
            sup_concave(&g, d.domain(), &MuSearch::for_domain(d.domain())).maximizer
        }
    }
}

/// Outermost point with `D ≤ level` in direction `dir`, or `None` if the
/// level set reaches the search limit.
fn level_edge(d: &RateFunction, center: f64, level: f64, dir: f64) -> Option<f64> {
    let inside = |x: f64| d.evaluate(x).finite().is_some_and(|v| v <= level);
    let mut step = 1.0;
    let mut last_in = center;
    loop {
        let x = center + dir * step;
        if !inside(x) {
            break;
        }
        last_in = x;
        if step >= LEVEL_SEARCH_LIMIT {
            return None;
        }
        step *= 2.0;
    }
    let (mut good, mut bad) = (last_in, center + dir * step);
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if inside(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

/// For each level `v`, locates `{α : D(α) ≤ v}` and reports whether it is a
/// bounded interval. Grid representations are `+∞` off their grid.
pub fn check_goodness(d: &RateFunction, levels: &[f64]) -> GoodnessReport {
    let center = minimizer(d);
    let levels = levels
        .iter()
        .map(|&level| {
            let Some(c) = center.filter(|&c| d.evaluate(c).finite().is_some_and(|v| v <= level)) else {
                return GoodnessLevel {
                    level,
                    empty: true,
                    lower: None,
                    upper: None,
                    bounded: true,
                };
            };
            let lower = level_edge(d, c, level, -1.0);
            let upper = level_edge(d, c, level, 1.0);
            GoodnessLevel {
                level,
                empty: false,
                bounded: lower.is_some() && upper.is_some(),
                lower,
                upper,
            }
        })
        .collect();
    GoodnessReport { levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Interval;

    #[test]
    fn gaussian_is_essentially_smooth() {
        let a = FundamentalFunction::gaussian(0.0, 1.0);
        let r = check_essential_smoothness(&a, &ProbeSpec::auto(&a)).unwrap();
        assert!(r.nonempty_interior && r.differentiable && r.steep);
        assert!(r.sides.is_empty());
    }

    #[test]
    fn exponential_is_steep_at_its_boundary() {
        let a = FundamentalFunction::exponential(1.0);
        let r = check_essential_smoothness(&a, &ProbeSpec::auto(&a)).unwrap();
        assert!(r.essentially_smooth(), "{r:?}");
        assert_eq!(r.sides.len(), 1);
        assert_eq!(r.sides[0].boundary, 1.0);
        // A'(μ) = 1/(1−μ) at the last probe 1 − 10^{-8}
        let last = *r.sides[0].slopes.last().unwrap();
        assert!((last / 1e8 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn point_domain_has_empty_interior() {
        let a = FundamentalFunction::new("point", Interval::point(0.0), |_| 0.0);
        let r = check_essential_smoothness(&a, &ProbeSpec::auto(&a)).unwrap();
        assert!(!r.nonempty_interior);
    }

    #[test]
    fn kink_and_flat_boundary_are_detected() {
        let kink = FundamentalFunction::new("abs", Interval::real_line(), f64::abs);
        let probes = ProbeSpec {
            interior: vec![0.0, 1.0],
            boundary_sequences: vec![],
            min_final_slope: 1e3,
        };
        let r = check_essential_smoothness(&kink, &probes).unwrap();
        assert!(!r.differentiable);
        assert_eq!(r.non_differentiable_at, vec![0.0]);

        let capped = FundamentalFunction::gaussian(0.0, 1.0).restricted_to(Interval::closed(-1.0, 1.0));
        let r = check_essential_smoothness(&capped, &ProbeSpec::auto(&capped)).unwrap();
        assert!(r.differentiable && !r.steep);
    }

    #[test]
    fn probe_outside_domain_is_an_error() {
        let a = FundamentalFunction::exponential(1.0);
        let probes = ProbeSpec {
            interior: vec![2.0],
            boundary_sequences: vec![],
            min_final_slope: 1.0,
        };
        assert!(matches!(
            check_essential_smoothness(&a, &probes),
            Err(Error::ProbeOutsideDomain { .. })
        ));
    }

    #[test]
    fn goodness_level_sets() {
        let quad = check_goodness(&RateFunction::gaussian(0.0, 1.0), &[2.0]);
        let l = &quad.levels[0];
        assert!(l.bounded);
        assert!((l.lower.unwrap() + 2.0).abs() < 1e-9 && (l.upper.unwrap() - 2.0).abs() < 1e-9);

        let ind = check_goodness(&RateFunction::indicator(0.0), &[1.0]);
        assert_eq!(ind.levels[0].lower, Some(0.0));
        assert_eq!(ind.levels[0].upper, Some(0.0));

        let rad = check_goodness(&RateFunction::rademacher(0.5), &[10.0]);
        let l = &rad.levels[0];
        assert!(l.bounded && l.lower.unwrap() >= -1.0 && l.upper.unwrap() <= 1.0);

        let flat = RateFunction::from_fn("flat", Interval::real_line(), Some(0.0), |_| 0.0);
        assert!(!check_goodness(&flat, &[1.0]).all_bounded());

        let empty = check_goodness(&RateFunction::gaussian(0.0, 1.0), &[-1.0]);
        assert!(empty.levels[0].empty);
    }
}
