use rand::Rng;

use crate::convex::{Bound, FundamentalFunction};
use crate::error::{Error, Result};
use crate::process::StepLaw;

/// Base step law reweighted by `e^{μx} / m(μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedLaw {
    pub base: StepLaw,
    pub mu: f64,
    /// `ln m(μ)`.
    pub log_norm: f64,
    tilted: StepLaw,
}

impl TiltedLaw {
    pub fn new(base: &StepLaw, mu: f64) -> Result<Self> {
        let log_norm = base.log_mgf(mu);
        let tilted = match base.tilted(mu) {
            Some(t) if log_norm.is_finite() => t,
            _ => {
                return Err(Error::InvalidParameters(format!(
                    "tilt {mu} is outside the moment generating domain"
                )))
            }
        };
        Ok(TiltedLaw {
            base: base.clone(),
            mu,
            log_norm,
            tilted,
        })
    }

    pub fn law(&self) -> &StepLaw {
        &self.tilted
    }

    pub fn mean(&self) -> f64 {
        self.tilted.mean()
    }

    /// Total tilted mass of a discrete law; `1` for the continuous families.
    pub fn total_mass(&self) -> f64 {
        match &self.tilted {
            StepLaw::Discrete(d) => d.probs().iter().sum(),
            _ => 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.tilted.sample(rng)
    }

    /// `ln` of base over tilted density at `x`: `−μx + ln m(μ)`.
    pub fn log_likelihood_ratio(&self, x: f64) -> f64 {
        -self.mu * x + self.log_norm
    }
}

/// Solves `A'(μ) = β` by bisection; the result satisfies `|A'(μ) − β| ≤ 1e−10`.
///
/// `β` must lie strictly inside the range of `A'`, i.e. in the interior of
/// the rate function's domain (or be the slope at a degenerate point).
pub fn tilt_for_target(a: &FundamentalFunction, beta: f64) -> Result<f64> {
    const TOL: f64 = 1e-10;
    let outside = || Error::TargetOutsideDomain { target: beta };
    if !beta.is_finite() {
        return Err(outside());
    }
    let dom = a.domain();
    let start = if dom.contains_interior(0.0) {
        0.0
    } else {
        match (dom.lower.value(), dom.upper.value()) {
            (Some(l), Some(u)) if u > l => 0.5 * (l + u),
            (Some(l), None) => l + 1.0,
            (None, Some(u)) => u - 1.0,
            _ => return Err(Error::EmptyDomain),
        }
    };
    let slope = |mu: f64| a.slope(mu).filter(|s| s.is_finite());
    let s0 = slope(start).ok_or_else(outside)?;
    if s0 == beta {
        return Ok(start);
    }
    let up = s0 < beta;
    // probe outward until A' passes β strictly
    let edge = if up { dom.upper } else { dom.lower };
    let dir = if up { 1.0 } else { -1.0 };
    let mut inner = start;
    let mut outer = None;
    for k in 0..64 {
        let mu = match edge {
            Bound::Unbounded => {
                if k > 20 {
                    break;
                }
                start + dir * 2f64.powi(k)
            }
            Bound::Closed(b) | Bound::Open(b) => b - (b - start) * 0.5f64.powi(k + 1),
        };
        let Some(s) = slope(mu) else { break };
        let passed = if up { s > beta } else { s < beta };
        if passed {
            outer = Some(mu);
            break;
        }
        inner = mu;
    }
    let outer = outer.ok_or_else(outside)?;
    let (mut lo, mut hi) = if up { (inner, outer) } else { (outer, inner) };
    let mut best = (f64::INFINITY, lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = slope(mid).ok_or_else(outside)?;
        let r = (s - beta).abs();
        if r < best.0 {
            best = (r, mid);
        }
        if r <= TOL {
            return Ok(mid);
        }
        if s < beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 <= TOL {
        Ok(best.1)
    } else {
        Err(Error::InvalidParameters(format!(
            "tilt equation A'(mu) = {beta} unsolved (residual {:e})",
            best.0
        )))
    }
}

/// Tilt used to aim a step law at slope `target` with acceptance window
/// `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTilt {
    pub mu: f64,
    /// Slope actually aimed at.
    pub aimed: f64,
    pub proxy: bool,
}

/// Interior targets are hit exactly. A target on or beyond the edge of the
/// rate domain is replaced by the midpoint of the window's overlap with the
/// domain (`β − ε/2` for a boundary `β`).
pub fn resolve_tilt(law: &StepLaw, target: f64, window: (f64, f64)) -> Result<ResolvedTilt> {
    let a = law.fundamental();
    let dom = law.rate_domain();
    let degenerate_hit = dom.lower.value().is_some() && dom.lower.value() == dom.upper.value() && dom.contains(target);
    if dom.contains_interior(target) || degenerate_hit {
        let mu = tilt_for_target(&a, target)?;
        return Ok(ResolvedTilt {
            mu,
            aimed: target,
            proxy: false,
        });
    }
    let lo = window.0.max(dom.lower.value().unwrap_or(f64::NEG_INFINITY));
    let hi = window.1.min(dom.upper.value().unwrap_or(f64::INFINITY));
    if !(lo < hi) {
        return Err(Error::TargetOutsideDomain { target });
    }
    let aimed = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 0.5,
        (false, true) => hi - 0.5,
        (false, false) => target,
    };
    if !dom.contains_interior(aimed) {
        return Err(Error::TargetOutsideDomain { target });
    }
    let mu = tilt_for_target(&a, aimed)?;
    Ok(ResolvedTilt { mu, aimed, proxy: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::DiscreteLaw;

    #[test]
    fn tilt_examples() {
        let g = FundamentalFunction::gaussian(0.0, 1.0);
        assert!((tilt_for_target(&g, 0.7).unwrap() - 0.7).abs() < 1e-10);
        assert_eq!(tilt_for_target(&g, 0.0).unwrap(), 0.0);
        let r = FundamentalFunction::rademacher(0.5);
        let mu = tilt_for_target(&r, 0.5).unwrap();
        assert!((mu - 0.5f64.atanh()).abs() < 1e-9);
        assert!((mu.tanh() - 0.5).abs() <= 1e-10);
        assert!((mu - 0.549306).abs() < 1e-6);
    }

    #[test]
    fn boundary_and_outside_targets_are_rejected() {
        let r = FundamentalFunction::rademacher(0.5);
        assert!(matches!(
            tilt_for_target(&r, 1.0),
            Err(Error::TargetOutsideDomain { .. })
        ));
        assert!(matches!(
            tilt_for_target(&r, -1.5),
            Err(Error::TargetOutsideDomain { .. })
        ));
    }

    #[test]
    fn steep_edge_is_bracketed() {
        let e = FundamentalFunction::exponential(2.0);
        let mu = tilt_for_target(&e, 10.0).unwrap();
        assert!((1.0 / (2.0 - mu) - 10.0).abs() <= 1e-10);
    }

    #[test]
    fn tilted_law_is_normalized_with_matching_mean() {
        let base = StepLaw::Discrete(DiscreteLaw::new(vec![-1.0, 0.0, 2.0], vec![0.3, 0.3, 0.4]).unwrap());
        for mu in [-2.0, -0.3, 0.0, 0.8, 3.0] {
            let t = TiltedLaw::new(&base, mu).unwrap();
            assert!((t.total_mass() - 1.0).abs() <= 1e-12);
            let h = 1e-5;
            let fd = (base.log_mgf(mu + h) - base.log_mgf(mu - h)) / (2.0 * h);
            assert!((t.mean() - fd).abs() <= 1e-8);
        }
    }

    #[test]
    fn boundary_target_uses_proxy() {
        let law = StepLaw::Discrete(DiscreteLaw::rademacher(0.5).unwrap());
        let t = resolve_tilt(&law, 1.0, (0.8, 1.2)).unwrap();
        assert!(t.proxy);
        assert!((t.aimed - 0.9).abs() < 1e-15);
        assert!((t.mu.tanh() - 0.9).abs() <= 1e-10);
        assert!(!resolve_tilt(&law, 0.5, (0.4, 0.6)).unwrap().proxy);
        assert!(resolve_tilt(&law, 1.5, (1.4, 1.6)).is_err());
    }

    #[test]
    fn degenerate_law_tilts_at_zero() {
        let law = StepLaw::Discrete(DiscreteLaw::constant(0.0));
        let t = resolve_tilt(&law, 0.0, (-0.1, 0.1)).unwrap();
        assert_eq!(t.mu, 0.0);
    }
}
