//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use ldlab_core::path::interpolant_integral;
use ldlab_core::process::simulate_many;
use ldlab_core::{
    biconjugate, check_condition_b, deviation_integral_j, estimate_fdd, estimate_functional, estimate_local, fit_rate,
    integral_i, legendre_transform, varadhan_functional, CadlagPath, EpsilonSchedule, FundamentalFunction, MCEstimate,
    MuSearch, OscillationBudget, Partition, PiecewiseLinear, ProcessModel, RateFunction, RefinementSchedule,
    SamplingMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 100_000;
const SEEDS: [u64; 3] = [11, 22, 33];
const TREND_HORIZONS: [f64; 5] = [50.0, 100.0, 200.0, 400.0, 800.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: &str, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    let timing = format!("{:.2}s of {:.0}s", elapsed.as_secs_f64(), budget.as_secs_f64());
    let timing = if in_time {
        timing
    } else {
        format!("{timing}, over budget")
    };
    println!(
        "{} [{id}] {name}: {} ({timing})",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn conjugation() -> Outcome {
    let cases = [
        (
            "gaussian",
            FundamentalFunction::gaussian(0.0, 1.0),
            RateFunction::gaussian(0.0, 1.0),
            -3.0,
            3.0,
        ),
        (
            "rademacher",
            FundamentalFunction::rademacher(0.5),
            RateFunction::rademacher(0.5),
            -1.0,
            1.0,
        ),
        (
            "exponential",
            FundamentalFunction::exponential(1.0),
            RateFunction::exponential(1.0),
            0.2,
            5.0,
        ),
    ];
    let mut worst = Vec::new();
    for (label, a, d, lo, hi) in cases {
        let grid: Vec<f64> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
        let numeric = legendre_transform(&a, &grid, &MuSearch::for_domain(a.domain())).unwrap();
        let err = grid
            .iter()
            .map(|&x| (numeric.evaluate(x).to_f64() - d.evaluate(x).to_f64()).abs())
            .fold(0.0_f64, f64::max);
        worst.push((label, err));
    }
    Outcome {
        pass: worst.iter().all(|(_, e)| *e <= 1e-6),
        detail: worst
            .iter()
            .map(|(l, e)| format!("{l} {e:.1e}"))
            .collect::<Vec<_>>()
            .join(", ")
            + " (tol 1e-6)",
    }
}

fn biconjugacy() -> Outcome {
    // (A, α range covering A'(probes) with margin, μ probes)
    let cases = [
        (
            "gaussian",
            FundamentalFunction::gaussian(0.3, 2.0),
            (-6.0, 6.0),
            (-2.0, 2.0),
        ),
        (
            "rademacher",
            FundamentalFunction::rademacher(0.5),
            (-1.0, 1.0),
            (-2.0, 2.0),
        ),
        (
            "exponential",
            FundamentalFunction::exponential(1.5),
            (0.05, 8.0),
            (-2.0, 1.2),
        ),
        ("poisson", FundamentalFunction::poisson(2.0), (0.0, 30.0), (-2.0, 2.0)),
        ("zero", FundamentalFunction::zero(), (-1.0, 1.0), (-2.0, 2.0)),
    ];
    let mut worst = Vec::new();
    for (label, a, (alo, ahi), (mlo, mhi)) in cases {
        let alphas: Vec<f64> = (0..=20_000).map(|i| alo + (ahi - alo) * i as f64 / 20_000.0).collect();
        let d = legendre_transform(&a, &alphas, &MuSearch::for_domain(a.domain())).unwrap();
        let mus: Vec<f64> = (0..=80).map(|i| mlo + (mhi - mlo) * i as f64 / 80.0).collect();
        let back = biconjugate(&d, &mus).unwrap();
        let err = mus
            .iter()
            .map(|&m| (back.evaluate(m).to_f64() - a.evaluate(m).to_f64()).abs())
            .fold(0.0_f64, f64::max);
        worst.push((label, err));
    }
    Outcome {
        pass: worst.iter().all(|(_, e)| *e <= 1e-5),
        detail: worst
            .iter()
            .map(|(l, e)| format!("{l} {e:.1e}"))
            .collect::<Vec<_>>()
            .join(", ")
            + " (tol 1e-5)",
    }
}

fn refinement() -> Outcome {
    let d = RateFunction::gaussian(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let mut worst_drop = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    for _ in 0..50 {
        // nodes on the level-6 dyadic grid, so pure dyadic partitions contain them from level 6 on
        let mut ks: Vec<u32> = (0..rng.random_range(1..8)).map(|_| rng.random_range(1..64)).collect();
        ks.sort_unstable();
        ks.dedup();
        let mut nodes = vec![(0.0, rng.random_range(-1.0..1.0))];
        nodes.extend(ks.iter().map(|&k| (k as f64 / 64.0, rng.random_range(-2.0..2.0))));
        nodes.push((1.0, rng.random_range(-2.0..2.0)));
        let f = PiecewiseLinear::new(nodes).unwrap();
        let i = integral_i(&f, &d).to_f64();
        let path = CadlagPath::PiecewiseLinear(f);

        let mut prev = f64::NEG_INFINITY;
        for level in 0..=12 {
            let v = interpolant_integral(&path, Partition::dyadic(level).unwrap().points(), &d).to_f64();
            worst_drop = worst_drop.max(prev - v);
            if level >= 6 {
                worst_gap = worst_gap.max((v - i).abs());
            }
            prev = v;
        }
        let r = deviation_integral_j(&path, &d, &RefinementSchedule::default()).unwrap();
        for w in r.partition_trace.windows(2) {
            worst_drop = worst_drop.max(w[0].1.to_f64() - w[1].1.to_f64());
        }
        for (_, v) in &r.partition_trace {
            worst_gap = worst_gap.max((v.to_f64() - i).abs());
        }
        if r.diverged || (r.value.to_f64() - i).abs() > 1e-12 {
            bad += 1;
        }
    }
    Outcome {
        pass: bad == 0 && worst_drop <= 1e-12 && worst_gap <= 1e-12,
        detail: format!(
            "50 paths, max decrease {worst_drop:.1e}, max |trace - I| after nodes {worst_gap:.1e}, mismatches {bad}"
        ),
    }
}

fn jump_divergence() -> Outcome {
    let f = CadlagPath::step(vec![0.0, 0.5], vec![0.0, 1.0]).unwrap();
    let r = deviation_integral_j(&f, &RateFunction::gaussian(0.0, 1.0), &RefinementSchedule::default()).unwrap();
    let peak = r.partition_trace.iter().map(|(_, v)| v.to_f64()).fold(0.0, f64::max);
    Outcome {
        pass: r.diverged && peak > 1e6 && r.verdict == ldlab_core::path::Verdict::Diverged,
        detail: format!("trace peak {peak:.3e}, diverged = {}, value {}", r.diverged, r.value),
    }
}

fn oracle_row(label: &str, exact: f64, est: &[MCEstimate]) -> (bool, String) {
    let ok = est.iter().all(|e| (e.p_hat - exact).abs() <= 3.0 * e.std_err);
    let worst = est
        .iter()
        .map(|e| {
            if e.std_err > 0.0 {
                (e.p_hat - exact).abs() / e.std_err
            } else if e.p_hat == exact {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0_f64, f64::max);
    (ok, format!("{label} exact {exact:.6e} worst {worst:.2}se"))
}

struct Configs {
    local: Vec<MCEstimate>,
    fdd: Vec<MCEstimate>,
    tube: Vec<MCEstimate>,
}

fn fixed(e: f64) -> EpsilonSchedule {
    EpsilonSchedule::fixed(e).unwrap()
}

fn oracle_configs() -> Configs {
    let m = ProcessModel::rademacher_walk();
    let halves = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
    let t = SamplingMethod::Tilted;
    Configs {
        local: SEEDS
            .iter()
            .map(|&s| estimate_local(&m, 0.5, 10.0, &fixed(0.05), N, t, None, s).unwrap())
            .collect(),
        fdd: SEEDS
            .iter()
            .map(|&s| estimate_fdd(&m, &halves, &[1.0, -1.0], 10.0, &fixed(0.5), N, t, s).unwrap())
            .collect(),
        tube: SEEDS
            .iter()
            .map(|&s| estimate_functional(&m, &CadlagPath::linear(0.5), 10.0, &fixed(0.2), N, t, s).unwrap())
            .collect(),
    }
}

fn enumeration(cfg: &Configs) -> Outcome {
    let rows = [
        oracle_row("local", common::local(10, 0.5, 0.05), &cfg.local),
        oracle_row("fdd", common::fdd(10, &[5, 10], &[1.0, -1.0], 0.5), &cfg.fdd),
        oracle_row("tube", common::tube(10, 0.5, 0.2), &cfg.tube),
    ];
    Outcome {
        pass: rows.iter().all(|r| r.0),
        detail: rows.iter().map(|r| r.1.clone()).collect::<Vec<_>>().join("; "),
    }
}

fn trend_eps() -> EpsilonSchedule {
    EpsilonSchedule::power(0.5, 1.0 / 3.0, 0.0).unwrap()
}

fn local_trend() -> Vec<MCEstimate> {
    let m = ProcessModel::rademacher_walk();
    TREND_HORIZONS
        .iter()
        .map(|&t| estimate_local(&m, 0.5, t, &trend_eps(), N, SamplingMethod::Tilted, None, 7).unwrap())
        .collect()
}

fn fdd_trend() -> Vec<MCEstimate> {
    let m = ProcessModel::rademacher_walk();
    let halves = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
    TREND_HORIZONS
        .iter()
        .map(|&t| estimate_fdd(&m, &halves, &[1.0, -1.0], t, &trend_eps(), N, SamplingMethod::Tilted, 7).unwrap())
        .collect()
}

fn trend_outcome(est: &[MCEstimate], exact_log_p: &[f64], target: f64, tol: f64) -> Outcome {
    let log_p: Vec<f64> = est.iter().map(|e| e.log_p_hat).collect();
    let fitted = fit_rate(&TREND_HORIZONS, &log_p).unwrap().rate;
    let exact = fit_rate(&TREND_HORIZONS, exact_log_p).unwrap().rate;
    Outcome {
        pass: (fitted - target).abs() <= tol,
        detail: format!(
            "fitted rate {fitted:.5} vs {target:.6} (tol {tol:.4}); slope of exact log-probabilities {exact:.5}; per-T rates [{}]",
            est.iter().map(|e| format!("{:.4}", e.log_rate.to_f64())).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn local_exact() -> Vec<f64> {
    TREND_HORIZONS
        .iter()
        .map(|&t| common::log_local_binomial(t as usize, 0.5, trend_eps().at(t)))
        .collect()
}

fn fdd_exact() -> Vec<f64> {
    // the two half-blocks are independent walks of length T/2
    TREND_HORIZONS
        .iter()
        .map(|&t| {
            let e = trend_eps().at(t);
            let h = (t / 2.0) as usize;
            common::log_local_binomial(h, 1.0, e) + common::log_local_binomial(h, -1.0, e)
        })
        .collect()
}

fn condition_b() -> Outcome {
    let m = ProcessModel::rademacher_walk();
    let paths = simulate_many(&m, 500.0, 1.0, 99, 1000).unwrap();
    let budget = OscillationBudget::almost_lipschitz(1.0, 1.0).unwrap();
    let deltas = [0.002, 0.01, 0.05, 0.1, 0.5, 1.0];
    let failing = paths
        .iter()
        .filter(|p| !check_condition_b(p, &budget, &deltas).unwrap().pass)
        .count();
    Outcome {
        pass: failing == 0,
        detail: format!("{failing} of 1000 trajectories violate the bound over deltas {deltas:?}"),
    }
}

fn varadhan() -> Outcome {
    let m = ProcessModel::rademacher_walk();
    let mut rows = Vec::new();
    let mut pass = true;
    for mu in [0.5_f64, 1.0] {
        let est = varadhan_functional(
            &m,
            &ldlab_core::Phi::Linear { slope: mu },
            400.0,
            N,
            SamplingMethod::Tilted,
            41,
        )
        .unwrap();
        let exact = mu.cosh().ln();
        let ok = (est.value - exact).abs() <= 3.0 * est.std_err + 1e-9;
        pass &= ok;
        rows.push(format!(
            "mu {mu}: {:.9} vs {exact:.9} (se {:.1e})",
            est.value, est.std_err
        ));
    }
    Outcome {
        pass,
        detail: rows.join("; "),
    }
}

fn fingerprint(cfg: &Configs, local: &[MCEstimate], fdd: &[MCEstimate]) -> String {
    let all: Vec<&MCEstimate> = cfg
        .local
        .iter()
        .chain(&cfg.fdd)
        .chain(&cfg.tube)
        .chain(local)
        .chain(fdd)
        .collect();
    serde_json::to_string(&all).unwrap()
}

fn determinism(reference: &str) -> Outcome {
    let mut mismatches = Vec::new();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let again = pool.install(|| fingerprint(&oracle_configs(), &local_trend(), &fdd_trend()));
        if again != reference {
            mismatches.push(threads);
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "checks 5-7 rerun on 1 and 3 threads, {} bytes of serialized estimates, mismatching runs {mismatches:?}",
            reference.len()
        ),
    }
}

fn main() {
    let mut results = vec![
        run("1", "conjugation matches closed forms", secs(1), conjugation),
        run("2", "biconjugate recovers A", secs(1), biconjugacy),
        run("3", "refinement monotone with fixed point", secs(5), refinement),
        run("4", "jump path diverges", secs(5), jump_divergence),
    ];

    let mut configs = None;
    results.push(run("5", "tilted estimates match enumeration at T=10", secs(30), || {
        let cfg = oracle_configs();
        let out = enumeration(&cfg);
        configs = Some(cfg);
        out
    }));
    let mut local = Vec::new();
    results.push(run("6", "local rate trend", secs(120), || {
        local = local_trend();
        trend_outcome(&local, &local_exact(), 0.130812, 0.015)
    }));
    let mut fdd = Vec::new();
    results.push(run("7", "fdd rate trend", secs(120), || {
        fdd = fdd_trend();
        let ln2 = std::f64::consts::LN_2;
        trend_outcome(&fdd, &fdd_exact(), ln2, 0.12 * ln2)
    }));
    results.push(run("8", "oscillation bound certificate", secs(10), condition_b));
    results.push(run("9", "Varadhan functional for linear phi", secs(30), varadhan));
    let reference = fingerprint(configs.as_ref().unwrap(), &local, &fdd);
    results.push(run(
        "10",
        "determinism across runs and thread counts",
        secs(600),
        || determinism(&reference),
    ));

    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
