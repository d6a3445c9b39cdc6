//! One function per pipeline stage. Each reads its inputs from the output
//! directory, checks their metadata against the config, writes its artifacts
//! and a manifest.

use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::time::Instant;

use phaseless::bayes::{
    load_chain, load_observations, run_gibbs, save_chain, save_observations, synthesize_observations, Chain,
    ObservationData, PosteriorConfig, SigmaPrior, SolverBackend, SurrogateBackend,
};
use phaseless::forward::{
    disc_far_field, forward_intensity, incident_directions, observation_directions, self_convergence_error,
    spline_boundary, NystromConfig, NystromOperator,
};
use phaseless::postprocess::{
    align_samples, radius_histogram, save_histogram, save_summary, summarize, write_summary_svg,
};
use phaseless::shape::{named_scatterer, AnnularPrior, Circle, NamedScatterer};
use phaseless::surrogate::{
    generate_training_data, load_model, load_training_set, sample_for_index, save_model, save_training_set, train,
    SurrogateModel,
};
use phaseless::Vec2;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Backend, RunConfig};
use crate::error::CliError;
use crate::manifest::{Artifact, Manifest};

pub const TRAIN_FILE: &str = "train.csv";
pub const MODEL_FILE: &str = "model.json";
pub const OBSERVATION_FILE: &str = "observations.csv";
pub const VALIDATION_FILE: &str = "validate-forward.json";
/// Far-field directions used by the disc check.
pub const MIE_DIRECTIONS: usize = 64;
/// Stream offset separating benchmark shapes from training shapes.
const BENCHMARK_STREAM_SEED: u64 = 0x5eed_beef;

pub fn chain_file(backend: Backend) -> String {
    format!("chain-{}.csv", backend.as_str())
}

pub fn summary_file(backend: Backend) -> String {
    format!("summary-{}.csv", backend.as_str())
}

pub fn histogram_file(backend: Backend) -> String {
    format!("histogram-{}.csv", backend.as_str())
}

pub fn svg_file(backend: Backend) -> String {
    format!("summary-{}.svg", backend.as_str())
}

pub fn report_file(backend: Backend) -> String {
    format!("report-{}.json", backend.as_str())
}

/// Everything a stage needs: the validated config with overrides applied.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    /// `--seed`, replacing the seed of whichever stage runs.
    pub seed: Option<u64>,
}

impl Context {
    pub fn new(config: RunConfig, seed: Option<u64>) -> Result<Self, CliError> {
        config.validate()?;
        let out = config.output_dir.clone();
        std::fs::create_dir_all(&out)
            .map_err(|e| CliError::Validation(format!("cannot create output directory {}: {e}", out.display())))?;
        Ok(Self { config, out, seed })
    }

    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    fn require(&self, file: &str, producer: &str) -> Result<PathBuf, CliError> {
        let p = self.path(file);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CliError::Validation(format!("missing upstream artifact {} (run `{producer}` first)", p.display())))
        }
    }

    fn reference_direction(&self) -> Vec2<f64> {
        incident_directions::<f64>(self.config.physics.n_inc)[0]
    }
}

fn mismatch(what: &str, found: impl std::fmt::Debug, expected: impl std::fmt::Debug) -> CliError {
    CliError::Validation(format!("metadata mismatch: {what} is {found:?} in the artifact but {expected:?} in the config"))
}

fn check_eq<T: PartialEq + std::fmt::Debug>(what: &str, found: T, expected: T) -> Result<(), CliError> {
    if found == expected {
        Ok(())
    } else {
        Err(mismatch(what, found, expected))
    }
}

fn check_close(what: &str, found: f64, expected: f64) -> Result<(), CliError> {
    if (found - expected).abs() <= 1e-12 * expected.abs().max(1.0) {
        Ok(())
    } else {
        Err(mismatch(what, found, expected))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MieCheck {
    pub wavenumber: f64,
    pub nystrom_n: usize,
    pub relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub samples: usize,
    pub seed: u64,
    pub nystrom_n: usize,
    pub max_error: f64,
    pub mean_error: f64,
    pub worst_sample: usize,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub mie: Vec<MieCheck>,
    pub certificate: CertificateCheck,
}

/// Relative sup-norm error of the Nyström far field of the unit disc against
/// its separation-of-variables series.
pub fn disc_error(k: f64, n: usize, incident: Vec2<f64>) -> Result<f64, CliError> {
    let cfg = NystromConfig::new(n, k)?;
    let curve = Circle::unit();
    let obs = observation_directions::<f64>(MIE_DIRECTIONS);
    let op = NystromOperator::new(&curve, &cfg)?;
    let ff = op.far_field(&op.solve(incident), &obs)?;
    let exact = disc_far_field(k, 1.0, incident, &obs)?;
    let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let err = ff.values.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(err / scale)
}

/// Self-convergence errors `‖f_(n) − f_(n+5)‖∞ / ‖f_(n+5)‖∞` for `count` prior draws.
pub fn certificate_errors(
    prior: &AnnularPrior,
    cfg: &NystromConfig<f64>,
    incident: Vec2<f64>,
    n_obs: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>, CliError> {
    let obs = observation_directions::<f64>(n_obs);
    let errors = (0..count as u64)
        .into_par_iter()
        .map(|i| self_convergence_error(&sample_for_index(prior, seed, i), cfg, incident, &obs))
        .collect::<phaseless::Result<Vec<f64>>>()?;
    Ok(errors)
}

pub fn validate_forward(ctx: &Context) -> Result<ValidationReport, CliError> {
    let c = &ctx.config;
    let seed = ctx.seed.unwrap_or(c.validation.seed);
    let mut manifest = Manifest::new("validate-forward", c);
    manifest.seeds.insert("validation".into(), seed);
    let d = ctx.reference_direction();

    let t0 = Instant::now();
    let mut mie = vec![];
    for k in [c.physics.wavenumber, 2.0 * c.physics.wavenumber] {
        let err = disc_error(k, c.physics.nystrom_n, d)?;
        mie.push(MieCheck {
            wavenumber: k,
            nystrom_n: c.physics.nystrom_n,
            relative_error: err,
            tolerance: c.validation.mie_tolerance,
            passed: err <= c.validation.mie_tolerance,
        });
    }
    manifest.timings.insert("mie_seconds".into(), t0.elapsed().as_secs_f64());

    let t1 = Instant::now();
    let errors =
        certificate_errors(&c.prior()?, &c.nystrom()?, d, c.physics.n_obs, c.validation.samples, seed)?;
    manifest.timings.insert("certificate_seconds".into(), t1.elapsed().as_secs_f64());
    let (worst, max) = errors.iter().enumerate().fold((0, 0.0), |(i, m), (j, &e)| if e > m { (j, e) } else { (i, m) });
    let certificate = CertificateCheck {
        samples: errors.len(),
        seed,
        nystrom_n: c.physics.nystrom_n,
        max_error: max,
        mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
        worst_sample: worst,
        tolerance: c.validation.certificate_tolerance,
        passed: max <= c.validation.certificate_tolerance,
    };
    let report = ValidationReport { passed: mie.iter().all(|m| m.passed) && certificate.passed, mie, certificate };

    write_json_file(&ctx.path(VALIDATION_FILE), &report)?;
    manifest.outputs.push(Artifact::of(&ctx.out, VALIDATION_FILE)?);
    manifest.details = serde_json::to_value(&report).expect("report serialises");
    manifest.write(&ctx.out)?;
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::Validation(format!(
            "forward validation failed: disc errors {:?}, certificate max {:e} (tolerance {:e})",
            report.mie.iter().map(|m| m.relative_error).collect::<Vec<_>>(),
            report.certificate.max_error,
            report.certificate.tolerance
        )))
    }
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("value serialises");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

pub fn gen_train(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let seed = ctx.seed.unwrap_or(c.surrogate.data_seed);
    let mut manifest = Manifest::new("gen-train", c);
    manifest.seeds.insert("data".into(), seed);
    let t0 = Instant::now();
    let data = generate_training_data(
        &c.prior()?,
        c.surrogate.samples,
        &c.nystrom()?,
        ctx.reference_direction(),
        c.physics.n_obs,
        seed,
    )?;
    let wall = t0.elapsed().as_secs_f64();
    save_training_set(&data, &ctx.path(TRAIN_FILE))?;
    manifest.timings.insert("wall_seconds".into(), wall);
    manifest.timings.insert("wall_seconds_per_sample".into(), wall / c.surrogate.samples as f64);
    manifest.outputs.push(Artifact::of(&ctx.out, TRAIN_FILE)?);
    manifest.details = json!({ "samples": data.len(), "n_spline": data.n_spline(), "n_obs": data.n_obs() });
    manifest.write(&ctx.out)
}

/// Per-evaluation wall time, single-threaded, on the same prior draws. The
/// headline figures time `f¹` (the reference-direction intensities, one
/// network pass against one factorisation and solve); the `full_*` figures
/// time the whole `N_obs × N_inc` matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedBenchmark {
    pub evaluations: usize,
    pub surrogate_seconds_per_evaluation: f64,
    pub solver_seconds_per_evaluation: f64,
    pub speedup: f64,
    pub full_surrogate_seconds_per_evaluation: f64,
    pub full_solver_seconds_per_evaluation: f64,
    pub full_speedup: f64,
}

fn time_per_item<T>(items: &[T], mut f: impl FnMut(&T) -> Result<f64, CliError>) -> Result<f64, CliError> {
    let start = Instant::now();
    let mut acc = 0.0;
    for x in items {
        acc += f(black_box(x))?;
    }
    black_box(acc);
    Ok(start.elapsed().as_secs_f64() / items.len() as f64)
}

pub fn benchmark_speedup(
    model: &SurrogateModel,
    prior: &AnnularPrior,
    cfg: &NystromConfig<f64>,
    n_inc: usize,
    evaluations: usize,
) -> Result<SpeedBenchmark, CliError> {
    let xis: Vec<Vec<f64>> =
        (0..evaluations as u64).map(|i| sample_for_index(prior, BENCHMARK_STREAM_SEED, i)).collect();
    let obs = observation_directions::<f64>(model.n_obs());
    let inc = incident_directions::<f64>(n_inc);
    let reference = &inc[..1];

    let mut ws = model.workspace();
    let mut f1 = vec![0.0; model.n_obs()];
    let surrogate = time_per_item(&xis, |xi| {
        model.predict_into(xi, &mut ws, &mut f1);
        Ok(f1[0])
    })?;
    let solver = time_per_item(&xis, |xi| {
        Ok(forward_intensity(&spline_boundary(xi)?, cfg, reference, &obs)?.as_slice()[0])
    })?;
    let full_surrogate = time_per_item(&xis, |xi| Ok(model.predict_all(xi, n_inc)?.as_slice()[0]))?;
    let full_solver =
        time_per_item(&xis, |xi| Ok(forward_intensity(&spline_boundary(xi)?, cfg, &inc, &obs)?.as_slice()[0]))?;
    Ok(SpeedBenchmark {
        evaluations,
        surrogate_seconds_per_evaluation: surrogate,
        solver_seconds_per_evaluation: solver,
        speedup: solver / surrogate,
        full_surrogate_seconds_per_evaluation: full_surrogate,
        full_solver_seconds_per_evaluation: full_solver,
        full_speedup: full_solver / full_surrogate,
    })
}

pub fn train_surrogate(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let path = ctx.require(TRAIN_FILE, "gen-train")?;
    let data = load_training_set(&path)?;
    let m = &data.meta;
    check_close("training wavenumber", m.wavenumber, c.physics.wavenumber)?;
    check_eq("training nystrom_n", m.nystrom_n, c.physics.nystrom_n)?;
    check_eq("training prior", m.prior, c.prior()?)?;
    check_eq("training n_obs", m.n_obs, c.physics.n_obs)?;
    check_eq("training reference direction", m.reference_direction, ctx.reference_direction())?;

    let mut tc = c.train_config();
    tc.seed = ctx.seed.unwrap_or(tc.seed);
    let mut manifest = Manifest::new("train", c);
    manifest.seeds.insert("train".into(), tc.seed);
    manifest.seeds.insert("data".into(), m.seed);
    manifest.inputs.push(Artifact::of(&ctx.out, TRAIN_FILE)?);

    let t0 = Instant::now();
    let (model, report) = train(&data, &tc)?;
    manifest.timings.insert("train_seconds".into(), t0.elapsed().as_secs_f64());
    save_model(&model, &ctx.path(MODEL_FILE))?;
    manifest.outputs.push(Artifact::of(&ctx.out, MODEL_FILE)?);

    let bench = benchmark_speedup(&model, &c.prior()?, &c.nystrom()?, c.physics.n_inc, c.surrogate.benchmark_evaluations)?;
    manifest.timings.insert("surrogate_seconds_per_evaluation".into(), bench.surrogate_seconds_per_evaluation);
    manifest.timings.insert("solver_seconds_per_evaluation".into(), bench.solver_seconds_per_evaluation);
    manifest.timings.insert("speedup".into(), bench.speedup);
    manifest.timings.insert("full_matrix_speedup".into(), bench.full_speedup);
    manifest.details = json!({ "training": report, "benchmark": bench });
    manifest.write(&ctx.out)
}

pub fn truth_scatterer(config: &RunConfig) -> Result<NamedScatterer<f64>, CliError> {
    Ok(named_scatterer(&config.scatterer.name, &config.scatterer_options())?)
}

pub fn gen_obs(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let seed = ctx.seed.unwrap_or(c.observation.seed);
    let mut manifest = Manifest::new("gen-obs", c);
    manifest.seeds.insert("noise".into(), seed);
    let truth = truth_scatterer(c)?;
    let t0 = Instant::now();
    let data = synthesize_observations(
        &truth,
        Some(&c.scatterer.name),
        &c.data_nystrom()?,
        &incident_directions(c.physics.n_inc),
        &observation_directions(c.physics.n_obs),
        c.observation.sigma_hat,
        seed,
    )?;
    manifest.timings.insert("wall_seconds".into(), t0.elapsed().as_secs_f64());
    save_observations(&data, &ctx.path(OBSERVATION_FILE))?;
    manifest.outputs.push(Artifact::of(&ctx.out, OBSERVATION_FILE)?);
    manifest.details = json!({ "sigma": data.meta.sigma, "max_intensity": data.delta.max_abs() });
    manifest.write(&ctx.out)
}

fn load_checked_observations(ctx: &Context) -> Result<ObservationData, CliError> {
    let c = &ctx.config;
    let data = load_observations(&ctx.require(OBSERVATION_FILE, "gen-obs")?)?;
    check_close("observation wavenumber", data.meta.wavenumber, c.physics.wavenumber)?;
    check_eq("observation n_obs", data.n_obs(), c.physics.n_obs)?;
    check_eq("observation n_inc", data.n_inc(), c.physics.n_inc)?;
    Ok(data)
}

fn load_checked_model(ctx: &Context) -> Result<SurrogateModel, CliError> {
    let c = &ctx.config;
    let model = load_model(&ctx.require(MODEL_FILE, "train")?)?;
    let m = &model.meta;
    check_close("model wavenumber", m.wavenumber, c.physics.wavenumber)?;
    check_eq("model n_spline", m.n_spline, c.physics.n_spline)?;
    check_eq("model n_obs", m.n_obs, c.physics.n_obs)?;
    check_eq("model prior bounds", (m.log_r_min, m.log_r_max), (c.physics.log_r_min, c.physics.log_r_max))?;
    check_eq("model reference direction", m.reference_direction, ctx.reference_direction())?;
    Ok(model)
}

pub fn posterior_config(config: &RunConfig, data: &ObservationData, seed: u64) -> Result<PosteriorConfig, CliError> {
    let ch = &config.chain;
    let mut pc = PosteriorConfig::new(config.prior()?, SigmaPrior::relative_to(data, ch.sigma_bounds)?, seed);
    pc.grid_points = ch.grid_points;
    pc.chain_length = ch.length;
    pc.burn_in = ch.burn_in;
    pc.initial_sigma = ch.initial_sigma;
    Ok(pc)
}

pub fn infer(ctx: &Context, backend: Backend) -> Result<Chain, CliError> {
    let c = &ctx.config;
    let seed = ctx.seed.unwrap_or(c.chain.seed);
    let stage = format!("infer-{}", backend.as_str());
    let mut manifest = Manifest::new(&stage, c);
    manifest.seeds.insert("chain".into(), seed);
    let data = load_checked_observations(ctx)?;
    manifest.inputs.push(Artifact::of(&ctx.out, OBSERVATION_FILE)?);
    let pc = posterior_config(c, &data, seed)?;

    let chain = match backend {
        Backend::Surrogate => {
            let model = load_checked_model(ctx)?;
            manifest.inputs.push(Artifact::of(&ctx.out, MODEL_FILE)?);
            let mut b = SurrogateBackend::new(&model, c.physics.n_inc)?;
            run_gibbs(&data, &pc, &mut b)?
        }
        Backend::Solver => {
            let mut b = SolverBackend::new(
                c.nystrom()?,
                c.physics.n_spline,
                observation_directions(c.physics.n_obs),
                incident_directions(c.physics.n_inc),
            );
            run_gibbs(&data, &pc, &mut b)?
        }
    };
    let file = chain_file(backend);
    save_chain(&chain, &ctx.path(&file))?;
    manifest.outputs.push(Artifact::of(&ctx.out, &file)?);

    let evals = chain.counters.forward_evaluations.max(1) as f64;
    manifest.timings.insert("wall_seconds".into(), chain.elapsed_seconds);
    manifest.timings.insert("seconds_per_forward_evaluation".into(), chain.elapsed_seconds / evals);
    let diag = chain.diagnostics().ok();
    manifest.details = json!({
        "backend": chain.backend,
        "counters": chain.counters,
        "sweeps": chain.len(),
        "burn_in": chain.burn_in,
        "log_posterior_tau_int": diag.as_ref().and_then(|d| d.tau_int),
        "log_posterior_ess": diag.as_ref().and_then(|d| d.ess),
    });
    manifest.write(&ctx.out)?;
    Ok(chain)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub backend: String,
    pub scatterer: Option<String>,
    pub mean_shape_l2: Option<f64>,
    pub mean_sample_l2: Option<f64>,
    pub t_opt: Option<Vec2<f64>>,
    pub retained_samples: usize,
    pub aligned_samples: usize,
    pub excluded_samples: usize,
    pub sigma_mean: f64,
    pub log_posterior_tau_int: Option<f64>,
    pub log_posterior_tau_int_error: Option<f64>,
    pub log_posterior_ess: Option<f64>,
    pub histogram_angle: f64,
}

pub fn report(ctx: &Context, backend: Backend) -> Result<RunReport, CliError> {
    let c = &ctx.config;
    let stage = format!("report-{}", backend.as_str());
    let mut manifest = Manifest::new(&stage, c);
    let cf = chain_file(backend);
    let chain = load_chain(&ctx.require(&cf, &format!("infer --backend {}", backend.as_str()))?)?;
    check_eq("chain prior", chain.config.prior, c.prior()?)?;
    manifest.inputs.push(Artifact::of(&ctx.out, &cf)?);
    manifest.seeds.insert("chain".into(), chain.config.seed);

    let data = load_checked_observations(ctx)?;
    manifest.inputs.push(Artifact::of(&ctx.out, OBSERVATION_FILE)?);
    let truth = match &data.meta.truth {
        Some(name) => {
            check_eq("observation truth scatterer", name.as_str(), c.scatterer.name.as_str())?;
            Some(truth_scatterer(c)?)
        }
        None => None,
    };

    let t0 = Instant::now();
    let retained = chain.retained();
    let xis: Vec<Vec<f64>> = retained.iter().map(|s| s.xi.clone()).collect();
    let target = Vec2::zero();
    let alignment = align_samples(&xis, target, c.report.m_eval);
    let summary = summarize(&alignment.samples, truth.as_ref(), target)?;
    let hist = radius_histogram(&alignment.samples, c.report.histogram_angle, c.report.histogram_bins)?;
    manifest.timings.insert("wall_seconds".into(), t0.elapsed().as_secs_f64());

    save_summary(&summary, &ctx.path(&summary_file(backend)))?;
    save_histogram(&hist, &ctx.path(&histogram_file(backend)))?;
    write_summary_svg(&summary, &ctx.path(&svg_file(backend)))?;
    let diag = chain.diagnostics().ok();
    let per = &summary.per_sample_l2;
    let rep = RunReport {
        backend: chain.backend.clone(),
        scatterer: data.meta.truth.clone(),
        mean_shape_l2: summary.mean_shape_l2,
        mean_sample_l2: (!per.is_empty()).then(|| per.iter().sum::<f64>() / per.len() as f64),
        t_opt: summary.t_opt,
        retained_samples: retained.len(),
        aligned_samples: alignment.samples.len(),
        excluded_samples: alignment.excluded,
        sigma_mean: retained.iter().map(|s| s.sigma).sum::<f64>() / retained.len().max(1) as f64,
        log_posterior_tau_int: diag.as_ref().and_then(|d| d.tau_int),
        log_posterior_tau_int_error: diag.as_ref().and_then(|d| d.tau_int_error),
        log_posterior_ess: diag.as_ref().and_then(|d| d.ess),
        histogram_angle: c.report.histogram_angle,
    };
    write_json_file(&ctx.path(&report_file(backend)), &rep)?;
    for f in [summary_file(backend), histogram_file(backend), svg_file(backend), report_file(backend)] {
        manifest.outputs.push(Artifact::of(&ctx.out, &f)?);
    }
    manifest.details = serde_json::to_value(&rep).expect("report serialises");
    manifest.write(&ctx.out)?;
    Ok(rep)
}
