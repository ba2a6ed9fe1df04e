//! One function per experiment kind. Each builds its inputs (validation,
//! exit status 2), runs the computation (exit status 3 on failure) and returns
//! the artifacts for a single final write.

use ldlab_core::path::{RefinementKind, Verdict};
use ldlab_core::process::simulate_many;
use ldlab_core::verify::varadhan_reference;
use ldlab_core::{
    check_condition_b, deviation_integral_j, estimate_fdd, estimate_functional, estimate_local,
    exponential_tightness_scan, fit_rate, legendre_transform, varadhan_functional, Error, ExtendedReal, FamilySpec,
    FundamentalFunction, MCEstimate, MuSearch, OscillationBudget, Partition, ProcessModel, RateFunction,
    RefinementSchedule,
};

use crate::config::{Kind, LoadedConfig, VerifySection};
use crate::error::{invalid, CliError, CliResult, Context};
use crate::output::{ext, num, Artifacts, Csv};

pub struct Outcome {
    pub artifacts: Artifacts,
    /// Message for a result the config declares a failure.
    pub failure: Option<String>,
}

impl From<Artifacts> for Outcome {
    fn from(artifacts: Artifacts) -> Self {
        Outcome {
            artifacts,
            failure: None,
        }
    }
}

pub fn run(kind: Kind, cfg: &LoadedConfig, seed: u64) -> CliResult<Outcome> {
    match kind {
        Kind::Conjugate => conjugate(cfg).map(Into::into),
        Kind::DeviationIntegral => deviation_integral(cfg),
        Kind::Simulate => simulate(cfg, seed).map(Into::into),
        Kind::VerifyLocal | Kind::VerifyFdd | Kind::VerifyFunctional => verify(kind, cfg, seed).map(Into::into),
        Kind::Varadhan => varadhan(cfg, seed).map(Into::into),
        Kind::Tightness => tightness(cfg, seed).map(Into::into),
    }
}

fn family(cfg: &LoadedConfig) -> CliResult<(FamilySpec, FundamentalFunction)> {
    let mut spec = cfg.config.family.clone().expect("validated");
    if let Some(t) = &spec.table {
        spec.table = Some(cfg.existing_file(t)?);
    }
    let a = FundamentalFunction::from_spec(&spec).map_err(invalid("family"))?;
    Ok((spec, a))
}

fn model(cfg: &LoadedConfig) -> CliResult<ProcessModel> {
    cfg.config
        .model
        .as_ref()
        .expect("validated")
        .build()
        .map_err(invalid("model"))
}

fn conjugate(cfg: &LoadedConfig) -> CliResult<Artifacts> {
    let (spec, a) = family(cfg)?;
    let c = cfg.config.conjugate.as_ref().expect("validated");
    let alphas = match &c.alphas {
        Some(g) => g.clone(),
        None => {
            let (lo, hi, k) = (c.alpha_min.unwrap(), c.alpha_max.unwrap(), c.points.unwrap());
            if k < 2 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return Err(CliError::config("need alpha_min < alpha_max and at least 2 points"));
            }
            (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
        }
    };
    let mut search = MuSearch::for_domain(a.domain());
    if let Some(it) = c.iterations {
        search = search.with_iterations(it);
    }
    search.validate(a.domain()).map_err(invalid("conjugate"))?;
    let d = legendre_transform(&a, &alphas, &search).context("legendre transform")?;
    let mut csv = Csv::new(&["alpha", "D"]);
    for &x in &alphas {
        csv.row(&[num(x), ext(d.evaluate(x))]);
    }
    let mut art = Artifacts::default();
    art.add("rate.csv", csv.into_bytes());
    art.note("family", &spec.family);
    art.note("points", alphas.len());
    art.note("zero_point", d.zero_point());
    art.note(
        "finite_points",
        alphas.iter().filter(|&&x| d.evaluate(x).is_finite()).count(),
    );
    Ok(art)
}

/// Closed-form rate function of a family, or a numeric conjugate on `alphas`.
fn rate_for(spec: &FamilySpec, a: &FundamentalFunction, alphas: Option<&[f64]>) -> CliResult<RateFunction> {
    let closed = match spec.domain {
        Some(_) => None,
        None => match spec.family.as_str() {
            "gaussian" => Some(RateFunction::gaussian(
                spec.mean.unwrap_or(0.0),
                spec.variance.unwrap_or(1.0),
            )),
            "rademacher" => Some(RateFunction::rademacher(spec.p.unwrap_or(0.5))),
            "exponential" => spec.rate.map(RateFunction::exponential),
            "poisson" => spec.rate.map(RateFunction::poisson),
            "zero" => Some(RateFunction::indicator(0.0)),
            _ => None,
        },
    };
    if let Some(d) = closed {
        return Ok(d);
    }
    let alphas = alphas.ok_or_else(|| {
        CliError::config(format!(
            "family `{}` has no closed-form rate; give an `alphas` grid",
            spec.family
        ))
    })?;
    legendre_transform(a, alphas, &MuSearch::for_domain(a.domain())).context("legendre transform")
}

fn deviation_integral(cfg: &LoadedConfig) -> CliResult<Outcome> {
    let (spec, a) = family(cfg)?;
    let sec = cfg.config.deviation_integral.as_ref().expect("validated");
    let file = cfg.existing_file(&sec.path)?;
    let path = ldlab_core::io::load_path(&file).map_err(invalid("path"))?;
    let mut schedule = match sec.schedule.as_deref().unwrap_or("dyadic") {
        "uniform" => RefinementSchedule::uniform(sec.cells.clone().unwrap_or_default()),
        _ => match sec.max_level {
            Some(l) => RefinementSchedule::dyadic(l),
            None => RefinementSchedule::default(),
        },
    };
    if let Some(t) = sec.tolerance {
        schedule.tolerance = t;
    }
    if let Some(c) = sec.ceiling {
        schedule.ceiling = c;
    }
    if let RefinementKind::Dyadic { max_level } = schedule.kind {
        if max_level > 30 {
            return Err(CliError::config("max_level above 30 is not supported"));
        }
    }
    let d = rate_for(&spec, &a, sec.alphas.as_deref())?;
    let r = deviation_integral_j(&path, &d, &schedule).context("deviation integral")?;
    let mut csv = Csv::new(&["K", "I_value"]);
    for (k, v) in &r.partition_trace {
        csv.row(&[k.to_string(), ext(*v)]);
    }
    let mut art = Artifacts::default();
    art.add("trace.csv", csv.into_bytes());
    art.note("value", ext(r.value));
    art.note("diverged", r.diverged);
    art.note("verdict", r.verdict);
    art.note("has_jumps", path.has_jumps());
    let failure = (cfg.config.fail_on_divergence && r.verdict == Verdict::Diverged)
        .then(|| format!("deviation integral diverged (last trace value {})", ext(r.value)));
    Ok(Outcome {
        artifacts: art,
        failure,
    })
}

fn simulate(cfg: &LoadedConfig, seed: u64) -> CliResult<Artifacts> {
    let m = model(cfg)?;
    let s = cfg.config.simulate.as_ref().expect("validated");
    let budget = match (&s.deltas, s.gamma0, s.gamma1) {
        (Some(_), Some(g0), Some(g1)) => {
            Some(OscillationBudget::almost_lipschitz(g0, g1).map_err(invalid("simulate"))?)
        }
        _ => None,
    };
    let paths = simulate_many(&m, s.horizon, s.grid_step, seed, s.count).map_err(|e| match e {
        Error::InvalidParameters(_) => invalid("simulate")(e),
        other => CliError::Module {
            context: "simulate".into(),
            source: other,
        },
    })?;
    let mut art = Artifacts::default();
    let width = (s.count.max(2) - 1).to_string().len().max(4);
    for (i, p) in paths.iter().enumerate() {
        let mut bytes = Vec::new();
        p.write_csv(&mut bytes)?;
        art.add(format!("trajectory_{i:0width$}.csv"), bytes);
    }
    if let (Some(budget), Some(deltas)) = (budget, &s.deltas) {
        let reports = paths
            .iter()
            .map(|p| check_condition_b(p, &budget, deltas))
            .collect::<ldlab_core::Result<Vec<_>>>()
            .context("oscillation check")?;
        let mut csv = Csv::new(&["trajectory", "delta", "max_oscillation", "bound", "pass"]);
        for (i, r) in reports.iter().enumerate() {
            for c in &r.checks {
                csv.row(&[
                    i.to_string(),
                    num(c.delta),
                    num(c.max_oscillation),
                    num(c.bound),
                    c.pass.to_string(),
                ]);
            }
        }
        art.add("oscillation.csv", csv.into_bytes());
        art.note("oscillation_pass", reports.iter().all(|r| r.pass));
    }
    art.note("model", m.label());
    art.note("count", s.count);
    art.note(
        "mean_terminal",
        num(paths.iter().map(|p| p.terminal()).sum::<f64>() / paths.len() as f64),
    );
    Ok(art)
}

struct Event {
    target: String,
    reference: Option<f64>,
}

fn verify(kind: Kind, cfg: &LoadedConfig, seed: u64) -> CliResult<Artifacts> {
    let m = model(cfg)?;
    let v: &VerifySection = cfg.config.verify.as_ref().expect("validated");
    let d = m.rate_function();
    let path = match (&v.path, kind) {
        (Some(p), Kind::VerifyFunctional) => {
            let file = cfg.existing_file(p)?;
            Some((file.clone(), ldlab_core::io::load_path(&file).map_err(invalid("path"))?))
        }
        _ => None,
    };
    let partition = match kind {
        Kind::VerifyFdd => {
            let p = Partition::new(v.partition.clone().unwrap()).map_err(invalid("partition"))?;
            if p.cells() != v.betas.as_ref().unwrap().len() {
                return Err(CliError::config(format!(
                    "{} betas for {} partition cells",
                    v.betas.as_ref().unwrap().len(),
                    p.cells()
                )));
            }
            Some(p)
        }
        _ => None,
    };
    if let Some(c) = v.conditioning {
        c.validate().map_err(invalid("conditioning"))?;
    }

    let event = match kind {
        Kind::VerifyLocal => {
            let beta = v.beta.unwrap();
            Event {
                target: num(beta),
                reference: d.as_ref().map(|d| d.evaluate(beta).to_f64()),
            }
        }
        Kind::VerifyFdd => {
            let p = partition.as_ref().unwrap();
            let betas = v.betas.as_ref().unwrap();
            let reference = d.as_ref().map(|d| {
                p.points()
                    .windows(2)
                    .zip(betas)
                    .map(|(w, &b)| d.evaluate(b).scale(w[1] - w[0]).to_f64())
                    .sum()
            });
            Event {
                target: betas.iter().map(|&b| num(b)).collect::<Vec<_>>().join(";"),
                reference,
            }
        }
        _ => {
            let (file, f) = path.as_ref().unwrap();
            let reference = match &d {
                Some(d) => Some(
                    deviation_integral_j(f, d, &RefinementSchedule::default())
                        .context("reference deviation integral")?
                        .value
                        .to_f64(),
                ),
                None => None,
            };
            Event {
                target: file
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                reference,
            }
        }
    };

    let mut estimates: Vec<MCEstimate> = Vec::with_capacity(v.horizons.len());
    for &t in &v.horizons {
        let res = match kind {
            Kind::VerifyLocal => estimate_local(&m, v.beta.unwrap(), t, &v.eps, v.n, v.method, v.conditioning, seed),
            Kind::VerifyFdd => estimate_fdd(
                &m,
                partition.as_ref().unwrap(),
                v.betas.as_ref().unwrap(),
                t,
                &v.eps,
                v.n,
                v.method,
                seed,
            ),
            _ => estimate_functional(&m, &path.as_ref().unwrap().1, t, &v.eps, v.n, v.method, seed),
        };
        // a crude run without hits still yields a row with its rule-of-three bound
        let est = match res {
            Ok(e) => e,
            Err(Error::ZeroHits(e)) => *e,
            Err(e) => {
                return Err(CliError::Module {
                    context: format!("{kind} at T = {t}"),
                    source: e,
                })
            }
        };
        estimates.push(est);
    }

    let reference_cell = |r: Option<f64>| r.map(num).unwrap_or_default();
    let mut rows = Csv::new(&[
        "T",
        "target",
        "eps",
        "method",
        "n",
        "p_hat",
        "std_err",
        "log_rate",
        "reference_rate",
        "abs_gap",
    ]);
    let mut plot = Csv::new(&["T", "log_rate", "reference_rate"]);
    for e in &estimates {
        let gap = event.reference.map(|r| match e.log_rate {
            ExtendedReal::Finite(x) => (x - r).abs(),
            ExtendedReal::PosInfinity if r.is_infinite() => 0.0,
            ExtendedReal::PosInfinity => f64::INFINITY,
        });
        rows.row(&[
            num(e.horizon),
            event.target.clone(),
            num(e.eps),
            e.method.to_string(),
            e.n.to_string(),
            num(e.p_hat),
            num(e.std_err),
            ext(e.log_rate),
            reference_cell(event.reference),
            reference_cell(gap),
        ]);
        plot.row(&[num(e.horizon), ext(e.log_rate), reference_cell(event.reference)]);
    }
    let mut art = Artifacts::default();
    art.add("estimates.csv", rows.into_bytes());
    art.add("plot.csv", plot.into_bytes());
    art.note("model", m.label());
    art.note("target", &event.target);
    art.note("reference_rate", event.reference.map(num));
    art.note("proxy", estimates.iter().any(|e| e.proxy));
    art.note("zero_hit_cells", estimates.iter().filter(|e| e.hits == 0).count());
    let log_p: Vec<f64> = estimates.iter().map(|e| e.log_p_hat).collect();
    if estimates.len() >= 2 && log_p.iter().all(|x| x.is_finite()) {
        let fit = fit_rate(&v.horizons, &log_p).context("rate fit")?;
        art.note("fitted_rate", num(fit.rate));
    }
    Ok(art)
}

fn varadhan(cfg: &LoadedConfig, seed: u64) -> CliResult<Artifacts> {
    let m = model(cfg)?;
    let sec = cfg.config.varadhan.as_ref().expect("validated");
    let reference = m.rate_function().map(|d| varadhan_reference(&sec.phi, &d));
    let mut csv = Csv::new(&["T", "method", "n", "value", "std_err", "reference", "abs_gap"]);
    for &t in &sec.horizons {
        let e =
            varadhan_functional(&m, &sec.phi, t, sec.n, sec.method, seed).context(format!("varadhan at T = {t}"))?;
        let reference_value = reference.map(|r| r.0);
        csv.row(&[
            num(t),
            e.method.to_string(),
            e.n.to_string(),
            num(e.value),
            num(e.std_err),
            reference_value.map(num).unwrap_or_default(),
            reference_value.map(|r| num((e.value - r).abs())).unwrap_or_default(),
        ]);
    }
    let mut art = Artifacts::default();
    art.add("varadhan.csv", csv.into_bytes());
    art.note("model", m.label());
    if let Some((value, argmax)) = reference {
        art.note("reference", num(value));
        art.note("argmax", num(argmax));
    }
    Ok(art)
}

fn tightness(cfg: &LoadedConfig, seed: u64) -> CliResult<Artifacts> {
    let m = model(cfg)?;
    let sec = cfg.config.tightness.as_ref().expect("validated");
    let report = exponential_tightness_scan(&m, &sec.targets, &sec.horizons, sec.n, sec.v_grid.as_deref(), seed)
        .map_err(|e| match e {
            Error::NoStepLaw(_) | Error::InvalidParameters(_) => invalid("tightness")(e),
            other => CliError::Module {
                context: "tightness scan".into(),
                source: other,
            },
        })?;
    let mut csv = Csv::new(&[
        "target",
        "v",
        "fitted_rate",
        "mc_p_hat",
        "mc_std_err",
        "bound_respected",
    ]);
    let mut bounds = Csv::new(&["target", "T", "log_bound"]);
    for r in &report.rows {
        csv.row(&[
            num(r.target),
            num(r.v),
            ext(r.fitted_rate),
            num(r.mc_p_hat),
            num(r.mc_std_err),
            r.bound_respected.to_string(),
        ]);
        for (t, b) in report.horizons.iter().zip(&r.log_bounds) {
            bounds.row(&[num(r.target), num(*t), num(*b)]);
        }
    }
    let mut art = Artifacts::default();
    art.add("tightness.csv", csv.into_bytes());
    art.add("bounds.csv", bounds.into_bytes());
    art.note("model", m.label());
    art.note("all_bounds_respected", report.rows.iter().all(|r| r.bound_respected));
    Ok(art)
}
