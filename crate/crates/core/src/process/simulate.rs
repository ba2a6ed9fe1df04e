use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::model::{Interarrival, ProcessFamily, ProcessModel};
use crate::error::{Error, Result};
use crate::path::CadlagPath;
use crate::rng::stream_rng;

/// Values of `Z` on an increasing time grid over `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub horizon: f64,
    pub seed: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing of a uniform grid (the first gap).
    pub fn grid_step(&self) -> f64 {
        self.times.get(1).map_or(self.horizon, |t| t - self.times[0])
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,Z")?;
        for (t, z) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t:?},{z:?}")?;
        }
        Ok(())
    }
}

/// Jump epochs of the base process on `(0, T]` and the running sum after each.
struct Skeleton {
    z0: f64,
    epochs: Vec<f64>,
    partial: Vec<f64>,
}

impl Skeleton {
    fn value_at(&self, t: f64) -> f64 {
        // grid times like 29 · 0.1 may land a hair below an integer epoch
        let slack = 1e-9 * t.abs().max(1.0);
        let k = self.epochs.partition_point(|&e| e <= t + slack);
        if k == 0 {
            self.z0
        } else {
            self.z0 + self.partial[k - 1]
        }
    }
}

fn skeleton<R: Rng + ?Sized>(model: &ProcessModel, horizon: f64, rng: &mut R) -> Skeleton {
    let z0 = model.initial.sample(rng, horizon);
    let mut epochs = Vec::new();
    let mut partial = Vec::new();
    let mut acc = 0.0;
    match &model.base().family {
        ProcessFamily::BoundedStepWalk(law) => {
            let steps = horizon.floor() as usize;
            for j in 1..=steps {
                acc += law.sample(rng);
                epochs.push(j as f64);
                partial.push(acc);
            }
        }
        ProcessFamily::GaussianWalk { mean, sd } => {
            let law = super::law::StepLaw::Gaussian { mean: *mean, sd: *sd };
            let steps = horizon.floor() as usize;
            for j in 1..=steps {
                acc += law.sample(rng);
                epochs.push(j as f64);
                partial.push(acc);
            }
        }
        ProcessFamily::CompoundRenewal { interarrival, jump } => {
            let mut t = 0.0;
            loop {
                t += match *interarrival {
                    Interarrival::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
                    Interarrival::Deterministic { period } => period,
                };
                if t > horizon {
                    break;
                }
                acc += jump.sample(rng);
                epochs.push(t);
                partial.push(acc);
            }
        }
        ProcessFamily::NoisePerturbed { .. } => unreachable!("base() strips the noise layer"),
    }
    Skeleton { z0, epochs, partial }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!(
            "horizon must be positive, got {horizon}"
        )))
    }
}

fn grid(horizon: f64, grid_step: f64) -> Result<Vec<f64>> {
    check_horizon(horizon)?;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let ratio = horizon / grid_step;
    let k = ratio.round();
    if (ratio - k).abs() > 1e-9 * ratio.max(1.0) || k < 1.0 {
        return Err(Error::InvalidParameters(format!(
            "grid step {grid_step} does not divide the horizon {horizon}"
        )));
    }
    let k = k as usize;
    let mut times: Vec<f64> = (0..=k).map(|i| i as f64 * grid_step).collect();
    times[k] = horizon;
    Ok(times)
}

/// `Z` at the given times, noise included, drawn from `rng`.
pub fn sample_values_at<R: Rng + ?Sized>(model: &ProcessModel, horizon: f64, times: &[f64], rng: &mut R) -> Vec<f64> {
    let sk = skeleton(model, horizon, rng);
    let mut values: Vec<f64> = times.iter().map(|&t| sk.value_at(t)).collect();
    if let Some(noise) = model.noise() {
        for (v, &t) in values.iter_mut().zip(times) {
            *v += noise.sample(rng, t);
        }
    }
    values
}

/// One trajectory on a uniform grid; stream 0 of `seed`.
pub fn simulate(model: &ProcessModel, horizon: f64, grid_step: f64, seed: u64) -> Result<Trajectory> {
    simulate_stream(model, horizon, grid_step, seed, 0)
}

fn simulate_stream(model: &ProcessModel, horizon: f64, grid_step: f64, seed: u64, stream: u64) -> Result<Trajectory> {
    let times = grid(horizon, grid_step)?;
    let mut rng = stream_rng(seed, stream);
    let values = sample_values_at(model, horizon, &times, &mut rng);
    Ok(Trajectory {
        times,
        values,
        horizon,
        seed,
    })
}

/// `count` independent trajectories, trajectory `i` on stream `i` of `seed`.
pub fn simulate_many(
    model: &ProcessModel,
    horizon: f64,
    grid_step: f64,
    seed: u64,
    count: usize,
) -> Result<Vec<Trajectory>> {
    grid(horizon, grid_step)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate_stream(model, horizon, grid_step, seed, i))
        .collect()
}

/// The rescaled path `z_T(s) = Z(sT)/T` of one draw.
///
/// Without noise the path is the exact step path of the jump skeleton;
/// with noise it is sampled on the unit time grid.
pub fn sample_cadlag<R: Rng + ?Sized>(model: &ProcessModel, horizon: f64, rng: &mut R) -> CadlagPath {
    if model.noise().is_some() {
        let steps = horizon.ceil() as usize;
        let mut times: Vec<f64> = (0..=steps).map(|i| (i as f64).min(horizon)).collect();
        times.dedup();
        let values = sample_values_at(model, horizon, &times, rng);
        return to_path(&times, &values, horizon);
    }
    let sk = skeleton(model, horizon, rng);
    let mut times = Vec::with_capacity(sk.epochs.len() + 1);
    let mut levels = Vec::with_capacity(sk.epochs.len() + 1);
    times.push(0.0);
    levels.push(sk.z0 / horizon);
    for (e, p) in sk.epochs.iter().zip(&sk.partial) {
        let s = (e / horizon).min(1.0);
        if s > *times.last().expect("nonempty") {
            times.push(s);
            levels.push((sk.z0 + p) / horizon);
        } else {
            *levels.last_mut().expect("nonempty") = (sk.z0 + p) / horizon;
        }
    }
    CadlagPath::step(times, levels).expect("epochs increase inside (0, 1]")
}

fn to_path(times: &[f64], values: &[f64], horizon: f64) -> CadlagPath {
    let n = times.len();
    let samples = times
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (&t, &z))| (if i + 1 == n { 1.0 } else { t / horizon }, z / horizon))
        .collect();
    CadlagPath::sampled(samples).expect("grid is increasing from 0")
}

/// Sampled path with `s = t/T`, value `Z(t)/T`.
pub fn rescale(traj: &Trajectory) -> CadlagPath {
    to_path(&traj.times, &traj.values, traj.horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{DiscreteLaw, NoiseModel};

    #[test]
    fn zero_steps_give_constant_trajectory() {
        let model = ProcessModel::bounded_step_walk(DiscreteLaw::constant(0.0)).with_z0(2.5);
        let tr = simulate(&model, 7.0, 0.5, 1).unwrap();
        assert!(tr.values.iter().all(|&z| z == 2.5));
        assert_eq!(tr.times.len(), 15);
    }

    #[test]
    fn rademacher_walk_has_even_parity() {
        let tr = simulate(&ProcessModel::rademacher_walk(), 10.0, 1.0, 42).unwrap();
        let s = tr.terminal();
        assert!(s.abs() <= 10.0 && (s as i64) % 2 == 0);
        assert!(tr.values.windows(2).all(|w| (w[1] - w[0]).abs() == 1.0));
    }

    #[test]
    fn gaussian_walk_mean_increment_is_small() {
        let tr = simulate(&ProcessModel::gaussian_walk(0.0, 1.0).unwrap(), 100.0, 1.0, 3).unwrap();
        assert!((tr.terminal() / 100.0).abs() < 4.0 / 10.0);
    }

    #[test]
    fn fine_grid_holds_walk_between_integers() {
        let tr = simulate(&ProcessModel::rademacher_walk(), 3.0, 0.1, 9).unwrap();
        let coarse = simulate(&ProcessModel::rademacher_walk(), 3.0, 1.0, 9).unwrap();
        assert_eq!(tr.values[29], coarse.values[2]);
        assert_eq!(tr.values[30], coarse.values[3]);
    }

    #[test]
    fn grid_must_divide_horizon() {
        assert!(simulate(&ProcessModel::rademacher_walk(), 10.0, 0.3, 1).is_err());
        assert!(simulate(&ProcessModel::rademacher_walk(), -1.0, 1.0, 1).is_err());
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let m =
            ProcessModel::noise_perturbed(ProcessModel::rademacher_walk(), NoiseModel::LogEnvelope { c: 1.0 }).unwrap();
        let a = simulate(&m, 50.0, 0.5, 77).unwrap();
        assert_eq!(a, simulate(&m, 50.0, 0.5, 77).unwrap());
        assert_ne!(a.values, simulate(&m, 50.0, 0.5, 78).unwrap().values);
    }

    #[test]
    fn rescale_examples() {
        let drift = Trajectory {
            times: vec![0.0, 1.0, 2.0, 3.0],
            values: vec![0.0, 1.0, 2.0, 3.0],
            horizon: 3.0,
            seed: 0,
        };
        let path = rescale(&drift);
        for s in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
            assert!((path.value(s) - s).abs() < 1e-15);
        }
        let tr = simulate(&ProcessModel::rademacher_walk(), 4.0, 1.0, 5).unwrap();
        let path = rescale(&tr);
        assert_eq!(path.breakpoints(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        for (&s, &z) in path.breakpoints().iter().zip(&tr.values) {
            assert_eq!(path.value(s), z / 4.0);
            assert!([0.0, 0.25, 0.5, 0.75, 1.0].contains(&(z / 4.0).abs()));
        }
    }

    #[test]
    fn cadlag_sample_matches_grid_sample() {
        let m = ProcessModel::rademacher_walk();
        let path = sample_cadlag(&m, 20.0, &mut stream_rng(4, 0));
        let tr = simulate(&m, 20.0, 1.0, 4).unwrap();
        for (&t, &z) in tr.times.iter().zip(&tr.values) {
            assert_eq!(path.value(t / 20.0), z / 20.0);
        }
    }
}
