use rayon::prelude::*;

use super::domain::{Bound, Interval};
use super::fundamental::FundamentalFunction;
use super::rate::{RateFunction, Representation};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

/// Search budget for maximizing a concave objective over a domain.
///
/// The bracket must lie inside the domain. On sides where the domain is
/// unbounded the bracket is widened while the maximizer sits on its edge,
/// up to `max_abs`; if the objective is still rising there with slope above
/// `slope_threshold`, the supremum is declared `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSearch {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub max_abs: f64,
    pub slope_threshold: f64,
}

impl MuSearch {
    pub const DEFAULT_HALF_WIDTH: f64 = 32.0;
    pub const DEFAULT_ITERATIONS: usize = 200;

    /// Default bracket for a domain: closed finite ends are used as is, open
    /// ends are pulled inside by a relative `1e-12`, unbounded ends start at
    /// `±32` around the finite side.
    pub fn for_domain(domain: &Interval) -> Self {
        let inner = |b: Bound, dir: f64| match b {
            Bound::Closed(x) => Some(x),
            Bound::Open(x) => Some(x + dir * 1e-12 * x.abs().max(1.0)),
            Bound::Unbounded => None,
        };
        let w = Self::DEFAULT_HALF_WIDTH;
        let (lower, upper) = match (inner(domain.lower, 1.0), inner(domain.upper, -1.0)) {
            (Some(a), Some(b)) => (a, b.max(a)),
            (Some(a), None) => (a, (a + 2.0 * w).max(w)),
            (None, Some(b)) => ((b - 2.0 * w).min(-w), b),
            (None, None) => (-w, w),
        };
        MuSearch {
            lower,
            upper,
            iterations: Self::DEFAULT_ITERATIONS,
            max_abs: 1e6,
            slope_threshold: 1e-9,
        }
    }

    pub fn with_bracket(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn validate(&self, domain: &Interval) -> Result<()> {
        if !(self.lower <= self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "search bracket [{}, {}] is not a finite interval",
                self.lower, self.upper
            )));
        }
        if !domain.contains(self.lower) || !domain.contains(self.upper) {
            return Err(Error::InvalidParameters(format!(
                "search bracket [{}, {}] leaves the domain",
                self.lower, self.upper
            )));
        }
        Ok(())
    }
}

/// Supremum of a concave objective and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePoint {
    pub value: ExtendedReal,
    /// Leftmost maximizer found; `None` when the supremum diverges.
    pub maximizer: Option<f64>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization on `[a, b]`, preferring the left point on ties.
fn golden_max(g: &dyn Fn(f64) -> f64, a0: f64, b0: f64, iterations: usize) -> (f64, f64) {
    let (mut a, mut b) = (a0, b0);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..iterations {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d);
        }
    }
    let mut candidates = vec![a0, a, c, d, b, b0];
    if a0 < 0.0 && b0 > 0.0 {
        candidates.push(0.0);
    }
    candidates.sort_by(|x, y| x.total_cmp(y));
    let mut best = (candidates[0], g(candidates[0]));
    for &x in &candidates[1..] {
        let v = g(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Maximizes a concave `g` over `domain`, starting from `search`'s bracket.
///
/// `g` may return `-∞` where the underlying convex function is infinite.
pub fn sup_concave(g: &dyn Fn(f64) -> f64, domain: &Interval, search: &MuSearch) -> ConjugatePoint {
    let (mut lo, mut hi) = (search.lower, search.upper);
    let lower_open_ended = matches!(domain.lower, Bound::Unbounded);
    let upper_open_ended = matches!(domain.upper, Bound::Unbounded);
    loop {
        let (x, gx) = golden_max(g, lo, hi, search.iterations);
        let width = hi - lo;
        let edge_tol = 1e-6 * width;
        let at_hi = upper_open_ended && hi - x <= edge_tol;
        let at_lo = lower_open_ended && x - lo <= edge_tol;
        if at_hi && hi < search.max_abs {
            hi = (hi + 3.0 * width.max(1.0)).min(search.max_abs);
            continue;
        }
        if at_lo && lo > -search.max_abs {
            lo = (lo - 3.0 * width.max(1.0)).max(-search.max_abs);
            continue;
        }
        if at_hi || at_lo {
            let edge = if at_hi { hi } else { lo };
            let inward = if at_hi { -1.0 } else { 1.0 };
            let dh = 1e-3 * edge.abs().max(1.0);
            let outward_slope = (g(edge) - g(edge + inward * dh)) / dh;
            if outward_slope > search.slope_threshold {
                return ConjugatePoint {
                    value: ExtendedReal::PosInfinity,
                    maximizer: None,
                };
            }
        }
        return ConjugatePoint {
            value: ExtendedReal::from_f64(gx),
            maximizer: Some(x),
        };
    }
}

/// `D(α) = sup_μ (αμ − A(μ))` at a single slope.
pub fn conjugate_point(a: &FundamentalFunction, alpha: f64, search: &MuSearch) -> Result<ConjugatePoint> {
    if !a.domain().has_nonempty_interior() {
        return Err(Error::EmptyDomain);
    }
    search.validate(a.domain())?;
    let g = |mu: f64| match a.evaluate(mu) {
        ExtendedReal::Finite(v) => alpha * mu - v,
        ExtendedReal::PosInfinity => f64::NEG_INFINITY,
    };
    Ok(sup_concave(&g, a.domain(), search))
}

fn probe_convexity(a: &FundamentalFunction, search: &MuSearch) -> Result<()> {
    const PROBES: usize = 65;
    let (lo, hi) = (search.lower, search.upper);
    if hi <= lo {
        return Ok(());
    }
    let pts: Vec<f64> = (0..PROBES)
        .map(|i| lo + (hi - lo) * i as f64 / (PROBES - 1) as f64)
        .collect();
    for w in pts.windows(3) {
        let (Some(l), Some(m), Some(r)) = (
            a.evaluate(w[0]).finite(),
            a.evaluate(w[1]).finite(),
            a.evaluate(w[2]).finite(),
        ) else {
            continue;
        };
        let tol = 1e-9 * (1.0 + l.abs() + r.abs());
        if m > 0.5 * (l + r) + tol {
            return Err(Error::NonConvexInput { at: w[1] });
        }
    }
    Ok(())
}

/// Grid-backed conjugate of `A` on `alpha_grid`.
///
/// Each value is a bracketed golden-section maximization of the concave map
/// `μ ↦ αμ − A(μ)`. The zero point is `A'(0)` when `0` is interior to the domain.
pub fn legendre_transform(a: &FundamentalFunction, alpha_grid: &[f64], search: &MuSearch) -> Result<RateFunction> {
    if !a.domain().has_nonempty_interior() {
        return Err(Error::EmptyDomain);
    }
    if alpha_grid.is_empty() {
        return Err(Error::InvalidParameters("alpha grid is empty".into()));
    }
    if alpha_grid.iter().any(|x| !x.is_finite()) || alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameters(
            "alpha grid must be finite and strictly increasing".into(),
        ));
    }
    search.validate(a.domain())?;
    probe_convexity(a, search)?;
    let values: Vec<ExtendedReal> = alpha_grid
        .par_iter()
        .map(|&alpha| conjugate_point(a, alpha, search).map(|c| c.value))
        .collect::<Result<_>>()?;
    let zero_point = if a.domain().contains_interior(0.0) {
        a.slope(0.0)
    } else {
        None
    };
    RateFunction::from_grid(alpha_grid.to_vec(), values, zero_point)
}

/// `L_D(μ) = sup_α (μα − D(α))` at a single tilt.
///
/// Exact for the grid representation (the objective is concave and
/// piecewise linear, so the maximum sits on a grid node).
pub fn conjugate_of_rate(d: &RateFunction, mu: f64) -> ExtendedReal {
    match d.representation() {
        Representation::Grid { alphas, values } => {
            let mut best: Option<f64> = None;
            for (&alpha, v) in alphas.iter().zip(values) {
                if let Some(dv) = v.finite() {
                    let g = mu * alpha - dv;
                    if best.is_none_or(|b| g > b) {
                        best = Some(g);
                    }
                }
            }
            best.map_or(ExtendedReal::PosInfinity, ExtendedReal::from_f64)
        }
        Representation::ClosedForm(_) => {
            let g = |alpha: f64| match d.evaluate(alpha) {
                ExtendedReal::Finite(v) => mu * alpha - v,
                ExtendedReal::PosInfinity => f64::NEG_INFINITY,
            };
            let search = MuSearch::for_domain(d.domain());
            sup_concave(&g, d.domain(), &search).value
        }
    }
}

/// Conjugate of a rate function evaluated on `mu_grid`, returned as a
/// tabulated fundamental function over the finite part of the grid.
pub fn biconjugate(d: &RateFunction, mu_grid: &[f64]) -> Result<FundamentalFunction> {
    d.validate()?;
    if mu_grid.is_empty() || mu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameters(
            "mu grid must be nonempty and strictly increasing".into(),
        ));
    }
    let points: Vec<(f64, f64)> = mu_grid
        .par_iter()
        .filter_map(|&mu| conjugate_of_rate(d, mu).finite().map(|v| (mu, v)))
        .collect();
    if points.is_empty() {
        return Err(Error::InvalidRateFunction(
            "conjugate is infinite on the whole grid".into(),
        ));
    }
    FundamentalFunction::table("biconjugate", points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rademacher_entropy(alpha: f64) -> f64 {
        let (p, q) = ((1.0 + alpha) / 2.0, (1.0 - alpha) / 2.0);
        let term = |x: f64| if x > 0.0 { x * (2.0 * x).ln() } else { 0.0 };
        term(p) + term(q)
    }

    #[test]
    fn gaussian_is_self_conjugate() {
        let a = FundamentalFunction::gaussian(0.0, 1.0);
        let c = conjugate_point(&a, 1.0, &MuSearch::for_domain(a.domain())).unwrap();
        assert!((c.value.to_f64() - 0.5).abs() < 1e-12);
        assert!((c.maximizer.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_function_conjugate_is_indicator() {
        let a = FundamentalFunction::zero();
        let s = MuSearch::for_domain(a.domain());
        assert_eq!(conjugate_point(&a, 0.0, &s).unwrap().value, ExtendedReal::ZERO);
        assert_eq!(conjugate_point(&a, 0.3, &s).unwrap().value, ExtendedReal::PosInfinity);
        assert_eq!(conjugate_point(&a, -1e-3, &s).unwrap().value, ExtendedReal::PosInfinity);
    }

    #[test]
    fn rademacher_matches_dense_grid_oracle() {
        // oracle: brute-force maximization over a dense mu grid on [-10, 10]
        let oracle = |alpha: f64| {
            (0..=200_000)
                .map(|i| -10.0 + 20.0 * i as f64 / 200_000.0)
                .map(|mu| alpha * mu - mu.cosh().ln())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((oracle(0.5) - expected).abs() < 1e-9);
        let a = FundamentalFunction::rademacher(0.5);
        let got = conjugate_point(&a, 0.5, &MuSearch::for_domain(a.domain())).unwrap();
        assert!((got.value.to_f64() - expected).abs() < 1e-12);
        assert!((got.value.to_f64() - 0.130812).abs() < 1e-6);
    }

    #[test]
    fn rademacher_boundary_slope_is_finite_and_outside_is_infinite() {
        let a = FundamentalFunction::rademacher(0.5);
        let s = MuSearch::for_domain(a.domain());
        let at_one = conjugate_point(&a, 1.0, &s).unwrap().value.to_f64();
        assert!((at_one - std::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(conjugate_point(&a, 1.01, &s).unwrap().value, ExtendedReal::PosInfinity);
    }

    #[test]
    fn exponential_conjugate_closed_form() {
        let a = FundamentalFunction::exponential(1.0);
        let s = MuSearch::for_domain(a.domain());
        for alpha in [0.2_f64, 1.0, 3.0, 10.0] {
            let expect = alpha - 1.0 - alpha.ln();
            let got = conjugate_point(&a, alpha, &s).unwrap().value.to_f64();
            assert!((got - expect).abs() < 1e-9, "alpha={alpha}: {got} vs {expect}");
        }
        assert_eq!(conjugate_point(&a, -0.5, &s).unwrap().value, ExtendedReal::PosInfinity);
    }

    #[test]
    fn empty_interior_is_rejected() {
        let a = FundamentalFunction::new("point", Interval::point(0.0), |_| 0.0);
        let s = MuSearch::for_domain(a.domain());
        assert!(matches!(legendre_transform(&a, &[0.0], &s), Err(Error::EmptyDomain)));
    }

    #[test]
    fn non_convex_input_is_rejected() {
        let a = FundamentalFunction::new("sin", Interval::real_line(), f64::sin);
        let s = MuSearch::for_domain(a.domain());
        assert!(matches!(
            legendre_transform(&a, &[0.0, 1.0], &s),
            Err(Error::NonConvexInput { .. })
        ));
    }

    #[test]
    fn transform_sets_zero_point_and_entropy_values() {
        let a = FundamentalFunction::rademacher(0.5);
        let grid: Vec<f64> = (0..=20).map(|i| -1.0 + 2.0 * i as f64 / 20.0).collect();
        let d = legendre_transform(&a, &grid, &MuSearch::for_domain(a.domain())).unwrap();
        assert_eq!(d.zero_point(), Some(0.0));
        for &alpha in &grid {
            let got = d.evaluate(alpha).to_f64();
            assert!((got - rademacher_entropy(alpha)).abs() < 1e-8, "alpha={alpha}");
        }
    }

    #[test]
    fn biconjugate_examples() {
        let quad = RateFunction::gaussian(0.0, 1.0);
        assert!((conjugate_of_rate(&quad, 2.0).to_f64() - 2.0).abs() < 1e-10);
        let ind = RateFunction::indicator(0.0);
        assert_eq!(conjugate_of_rate(&ind, 5.0), ExtendedReal::ZERO);
        let rad = RateFunction::rademacher(0.5);
        // oracle: dense alpha-grid maximization
        let oracle = (0..=200_000)
            .map(|i| -1.0 + 2.0 * i as f64 / 200_000.0)
            .map(|al| al - rademacher_entropy(al))
            .fold(f64::NEG_INFINITY, f64::max);
        let got = conjugate_of_rate(&rad, 1.0).to_f64();
        assert!((got - oracle).abs() < 1e-8);
        assert!((got - 1f64.cosh().ln()).abs() < 1e-10);
        let table = biconjugate(&rad, &[-1.0, 0.0, 1.0]).unwrap();
        assert!((table.evaluate(1.0).to_f64() - 0.433781).abs() < 1e-6);
    }
}
