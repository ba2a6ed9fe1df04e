use rayon::prelude::*;
use serde::Serialize;

use super::estimate::{MCEstimate, Method, SamplingMethod};
use super::schedule::EpsilonSchedule;
use super::tilt::{resolve_tilt, TiltedLaw};
use crate::error::{Error, Result};
use crate::path::{uniform_norm_distance, CadlagPath, Partition};
use crate::process::{sample_cadlag, sample_values_at, Conditioning, InitialLaw, ProcessModel, StepLaw};
use crate::rng::{derive_seed, stream_rng};

/// Smallest sample count the event estimators accept.
pub const MIN_SAMPLES: usize = 100;

fn check_common(n: usize, horizon: f64, eps: f64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidParameters(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameters(format!("radius must be positive, got {eps}")));
    }
    Ok(())
}

fn need_step_law(model: &ProcessModel) -> Result<StepLaw> {
    model.step_law().ok_or_else(|| Error::NoStepLaw(model.label()))
}

/// Number of whole steps taken by time `t`.
pub(crate) fn steps_by(t: f64) -> usize {
    (t + 1e-9 * t.abs().max(1.0)).floor() as usize
}

/// Runs `n` samples on per-index streams; `sample` returns the log-weight of
/// a hit or `None` for a miss.
fn run<F>(n: usize, seed: u64, sample: F) -> Vec<f64>
where
    F: Fn(&mut crate::rng::StreamRng) -> Option<f64> + Sync,
{
    let outcomes: Vec<Option<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| sample(&mut stream_rng(seed, i)))
        .collect();
    outcomes.into_iter().flatten().collect()
}

fn finish(est: MCEstimate) -> Result<MCEstimate> {
    if est.hits == 0 && est.method == Method::Crude {
        Err(Error::ZeroHits(Box::new(est)))
    } else {
        Ok(est)
    }
}

/// Increments over consecutive blocks `[t_{k−1}, t_k]` of `[0, 1]` must have
/// slopes in the open windows.
pub(crate) struct SegmentEvent {
    pub cuts: Vec<f64>,
    pub windows: Vec<(f64, f64)>,
    pub targets: Vec<f64>,
}

impl SegmentEvent {
    fn times(&self, horizon: f64) -> Vec<f64> {
        let mut t: Vec<f64> = self.cuts.iter().map(|c| c * horizon).collect();
        *t.last_mut().expect("nonempty") = horizon;
        t
    }

    fn hit(&self, times: &[f64], values: &[f64]) -> bool {
        self.windows.iter().enumerate().all(|(k, &(lo, hi))| {
            let z = (values[k + 1] - values[k]) / (times[k + 1] - times[k]);
            lo < z && z < hi
        })
    }
}

pub(crate) fn estimate_segments(
    model: &ProcessModel,
    event: &SegmentEvent,
    horizon: f64,
    eps: f64,
    n: usize,
    method: SamplingMethod,
    seed: u64,
) -> Result<MCEstimate> {
    check_common(n, horizon, eps)?;
    let times = event.times(horizon);
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidPartition("segment lengths vanish at this horizon".into()));
    }
    match method {
        SamplingMethod::Crude => {
            let weights = run(n, seed, |rng| {
                let values = sample_values_at(model, horizon, &times, rng);
                event.hit(&times, &values).then_some(0.0)
            });
            finish(MCEstimate::from_log_weights(
                &weights,
                n,
                Method::Crude,
                horizon,
                eps,
                false,
            ))
        }
        SamplingMethod::Tilted => {
            let law = need_step_law(model)?;
            let mut tilted = Vec::with_capacity(event.windows.len());
            let mut proxy = false;
            for (&target, &window) in event.targets.iter().zip(&event.windows) {
                let r = resolve_tilt(&law, target, window)?;
                proxy |= r.proxy;
                tilted.push(TiltedLaw::new(&law, r.mu)?);
            }
            let counts: Vec<usize> = times.windows(2).map(|w| steps_by(w[1]) - steps_by(w[0])).collect();
            let noise = model.noise().copied();
            let initial = model.initial;
            let weights = run(n, seed, |rng| {
                let mut values = Vec::with_capacity(times.len());
                let mut z = initial.sample(rng, horizon);
                values.push(z);
                let mut log_w = 0.0;
                for (tl, &m) in tilted.iter().zip(&counts) {
                    let mut s = 0.0;
                    for _ in 0..m {
                        s += tl.sample(rng);
                    }
                    log_w += -tl.mu * s + m as f64 * tl.log_norm;
                    z += s;
                    values.push(z);
                }
                if let Some(noise) = noise {
                    for (v, &t) in values.iter_mut().zip(&times) {
                        *v += noise.sample(rng, t);
                    }
                }
                event.hit(&times, &values).then_some(log_w)
            });
            let tilts = tilted.iter().map(|t| t.mu).collect();
            Ok(MCEstimate::from_log_weights(
                &weights,
                n,
                Method::Tilted { tilts },
                horizon,
                eps,
                proxy,
            ))
        }
    }
}

/// `P((Z(T) − Z(0))/T ∈ (β − ε_T, β + ε_T))`, optionally with `Z(0)/T`
/// drawn inside the conditioning band.
///
/// Crude sampling with no hit returns [`Error::ZeroHits`] carrying the
/// zero estimate and its `3/n` bound.
#[allow(clippy::too_many_arguments)]
pub fn estimate_local(
    model: &ProcessModel,
    beta: f64,
    horizon: f64,
    eps: &EpsilonSchedule,
    n: usize,
    method: SamplingMethod,
    conditioning: Option<Conditioning>,
    seed: u64,
) -> Result<MCEstimate> {
    let model = match conditioning {
        Some(c) => {
            c.validate()?;
            model.clone().with_conditioning(c)
        }
        None => model.clone(),
    };
    let e = eps.at(horizon);
    let event = SegmentEvent {
        cuts: vec![0.0, 1.0],
        windows: vec![(beta - e, beta + e)],
        targets: vec![beta],
    };
    estimate_segments(&model, &event, horizon, e, n, method, seed)
}

/// `P(∩_k {ζ_k ∈ (β_k − ε_T, β_k + ε_T)})` with `ζ_k` the slope of `Z` over
/// the `k`-th block of the partition scaled to `[0, T]`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_fdd(
    model: &ProcessModel,
    partition: &Partition,
    betas: &[f64],
    horizon: f64,
    eps: &EpsilonSchedule,
    n: usize,
    method: SamplingMethod,
    seed: u64,
) -> Result<MCEstimate> {
    if betas.len() != partition.cells() {
        return Err(Error::InvalidParameters(format!(
            "{} targets for {} partition cells",
            betas.len(),
            partition.cells()
        )));
    }
    let e = eps.at(horizon);
    let event = SegmentEvent {
        cuts: partition.points().to_vec(),
        windows: betas.iter().map(|&b| (b - e, b + e)).collect(),
        targets: betas.to_vec(),
    };
    estimate_segments(model, &event, horizon, e, n, method, seed)
}

/// `P(sup_s |z_T(s) − f(s)| < ε_T)`.
///
/// Tilted sampling needs a piecewise-linear `f` and tilts each step towards
/// the slope of the piece it falls in.
pub fn estimate_functional(
    model: &ProcessModel,
    f: &CadlagPath,
    horizon: f64,
    eps: &EpsilonSchedule,
    n: usize,
    method: SamplingMethod,
    seed: u64,
) -> Result<MCEstimate> {
    let e = eps.at(horizon);
    check_common(n, horizon, e)?;
    match method {
        SamplingMethod::Crude => {
            let weights = run(n, seed, |rng| {
                let path = sample_cadlag(model, horizon, rng);
                (uniform_norm_distance(&path, f) < e).then_some(0.0)
            });
            finish(MCEstimate::from_log_weights(
                &weights,
                n,
                Method::Crude,
                horizon,
                e,
                false,
            ))
        }
        SamplingMethod::Tilted => {
            let pl = f.as_piecewise_linear().ok_or_else(|| {
                Error::InvalidPath("tilted functional estimates need a piecewise-linear target".into())
            })?;
            let law = need_step_law(model)?;
            let dom = law.rate_domain();
            let segments = pl.segments();
            let total = steps_by(horizon);
            let mut tilted = Vec::with_capacity(segments.len());
            let mut counts = Vec::with_capacity(segments.len());
            let mut proxy = false;
            let mut taken = 0;
            for (i, &(_, end, slope)) in segments.iter().enumerate() {
                if !dom.contains(slope) {
                    return Err(Error::SlopeOutsideDomain { slope });
                }
                let r = resolve_tilt(&law, slope, (slope - e, slope + e))?;
                proxy |= r.proxy;
                tilted.push(TiltedLaw::new(&law, r.mu)?);
                // step j sits at s = j/T and belongs to the piece with s ≤ end
                let upto = if i + 1 == segments.len() {
                    total
                } else {
                    steps_by(end * horizon).min(total)
                };
                counts.push(upto.saturating_sub(taken));
                taken = taken.max(upto);
            }
            let mut times: Vec<f64> = (0..=total).map(|j| j as f64).collect();
            if (total as f64) < horizon {
                times.push(horizon);
            }
            let noise = model.noise().copied();
            let initial = model.initial;
            let weights = run(n, seed, |rng| {
                let mut values = Vec::with_capacity(times.len());
                let mut z = initial.sample(rng, horizon);
                values.push(z);
                let mut log_w = 0.0;
                for (tl, &m) in tilted.iter().zip(&counts) {
                    let mut s = 0.0;
                    for _ in 0..m {
                        let x = tl.sample(rng);
                        s += x;
                        z += x;
                        values.push(z);
                    }
                    log_w += -tl.mu * s + m as f64 * tl.log_norm;
                }
                if values.len() < times.len() {
                    values.push(z);
                }
                if let Some(noise) = noise {
                    for (v, &t) in values.iter_mut().zip(&times) {
                        *v += noise.sample(rng, t);
                    }
                }
                let path = rescaled(&times, &values, horizon);
                (uniform_norm_distance(&path, f) < e).then_some(log_w)
            });
            let tilts = tilted.iter().map(|t| t.mu).collect();
            Ok(MCEstimate::from_log_weights(
                &weights,
                n,
                Method::Tilted { tilts },
                horizon,
                e,
                proxy,
            ))
        }
    }
}

fn rescaled(times: &[f64], values: &[f64], horizon: f64) -> CadlagPath {
    let last = times.len() - 1;
    let samples = times
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (&t, &z))| (if i == last { 1.0 } else { t / horizon }, z / horizon))
        .collect();
    CadlagPath::sampled(samples).expect("integer grid rescales into [0, 1]")
}

/// Worst case of the local estimate over initial points spread across a
/// conditioning band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub initial_points: Vec<f64>,
    pub estimates: Vec<MCEstimate>,
    pub reference_rate: f64,
    /// `max |log_rate − D(β)|`, `+∞` if some point had no hit.
    pub worst_gap: f64,
    pub worst_initial: f64,
    /// Only the listed initial conditions were tested.
    pub note: &'static str,
}

/// Runs [`estimate_local`] from `points` initial values `Z(0)` evenly spread
/// inside `(αT − ηT, αT + ηT)`.
#[allow(clippy::too_many_arguments)]
pub fn uniformity_scan(
    model: &ProcessModel,
    beta: f64,
    horizon: f64,
    eps: &EpsilonSchedule,
    n: usize,
    band: Conditioning,
    points: usize,
    seed: u64,
) -> Result<UniformityReport> {
    band.validate()?;
    if points == 0 {
        return Err(Error::InvalidParameters(
            "uniformity scan needs at least one point".into(),
        ));
    }
    let reference_rate = model
        .rate_function()
        .ok_or_else(|| Error::NoStepLaw(model.label()))?
        .evaluate(beta)
        .to_f64();
    let initial_points: Vec<f64> = (0..points)
        .map(|k| (band.alpha + band.eta * (2.0 * (k as f64 + 0.5) / points as f64 - 1.0)) * horizon)
        .collect();
    let estimates = initial_points
        .iter()
        .enumerate()
        .map(|(k, &z0)| {
            let m = model.clone().with_initial(InitialLaw::Point(z0));
            estimate_local(
                &m,
                beta,
                horizon,
                eps,
                n,
                SamplingMethod::Tilted,
                None,
                derive_seed(seed, k as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst_gap, worst_initial) = estimates
        .iter()
        .zip(&initial_points)
        .map(|(e, &z0)| ((e.log_rate.to_f64() - reference_rate).abs(), z0))
        .fold((0.0_f64, initial_points[0]), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(UniformityReport {
        initial_points,
        estimates,
        reference_rate,
        worst_gap,
        worst_initial,
        note: "uniformity tested over the listed initial conditions only",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::DiscreteLaw;

    fn fixed(e: f64) -> EpsilonSchedule {
        EpsilonSchedule::fixed(e).unwrap()
    }

    #[test]
    fn typical_event_has_rate_near_zero() {
        let m = ProcessModel::rademacher_walk();
        let est = estimate_local(&m, 0.0, 100.0, &fixed(0.5), 10_000, SamplingMethod::Crude, None, 1).unwrap();
        assert!(est.p_hat > 0.99);
        assert!(est.log_rate.to_f64() < 1e-3);
    }

    #[test]
    fn parity_empty_event_is_zero_without_error_when_tilted() {
        let m = ProcessModel::rademacher_walk();
        let est = estimate_local(&m, 0.5, 10.0, &fixed(0.05), 1000, SamplingMethod::Tilted, None, 3).unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.std_err, 0.0);
        assert_eq!(est.upper_bound, Some(0.003));
        let crude = estimate_local(&m, 0.5, 10.0, &fixed(0.05), 1000, SamplingMethod::Crude, None, 3);
        match crude {
            Err(Error::ZeroHits(e)) => assert_eq!(e.upper_bound, Some(0.003)),
            other => panic!("expected ZeroHits, got {other:?}"),
        }
    }

    #[test]
    fn single_block_fdd_equals_local() {
        let m = ProcessModel::rademacher_walk();
        let eps = fixed(0.1);
        for method in [SamplingMethod::Crude, SamplingMethod::Tilted] {
            let a = estimate_local(&m, 0.2, 30.0, &eps, 2000, method, None, 9).unwrap();
            let b = estimate_fdd(&m, &Partition::uniform(1).unwrap(), &[0.2], 30.0, &eps, 2000, method, 9).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tilted_needs_step_law() {
        let m = ProcessModel::compound_renewal(
            crate::process::Interarrival::Exponential { rate: 1.0 },
            StepLaw::Discrete(DiscreteLaw::constant(1.0)),
        )
        .unwrap();
        assert!(matches!(
            estimate_local(&m, 1.0, 10.0, &fixed(0.5), 100, SamplingMethod::Tilted, None, 0),
            Err(Error::NoStepLaw(_))
        ));
        assert!(estimate_local(&m, 1.0, 10.0, &fixed(0.5), 100, SamplingMethod::Crude, None, 0).is_ok());
    }

    #[test]
    fn functional_slope_outside_domain() {
        let m = ProcessModel::rademacher_walk();
        let f = CadlagPath::linear(1.5);
        assert!(matches!(
            estimate_functional(&m, &f, 10.0, &fixed(0.2), 100, SamplingMethod::Tilted, 0),
            Err(Error::SlopeOutsideDomain { .. })
        ));
    }

    #[test]
    fn zero_path_tube_is_typical() {
        let m = ProcessModel::gaussian_walk(0.0, 1.0).unwrap();
        let est = estimate_functional(
            &m,
            &CadlagPath::zero(),
            400.0,
            &fixed(0.3),
            2000,
            SamplingMethod::Tilted,
            4,
        )
        .unwrap();
        assert!(est.log_rate.to_f64() < 0.01, "{est:?}");
    }

    #[test]
    fn sample_count_is_validated() {
        let m = ProcessModel::rademacher_walk();
        assert!(estimate_local(&m, 0.0, 10.0, &fixed(0.1), 0, SamplingMethod::Crude, None, 0).is_err());
    }

    #[test]
    fn uniformity_over_band() {
        let m = ProcessModel::rademacher_walk();
        let band = Conditioning { alpha: 0.2, eta: 0.05 };
        let rep = uniformity_scan(&m, 0.5, 200.0, &fixed(0.05), 5000, band, 4, 1).unwrap();
        assert_eq!(rep.initial_points.len(), 4);
        assert!(rep.initial_points.iter().all(|z| (z / 200.0 - 0.2).abs() < 0.05));
        assert!(rep.worst_gap < 0.05, "{rep:?}");
    }
}
