//! Declarative run configuration, read from TOML. Every field has a default,
//! so an empty file describes the standard experiment: the trefoil at
//! `k = π` with twelve knots and twelve observation and incident directions.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use phaseless::bayes::{
    DEFAULT_BURN_IN, DEFAULT_CHAIN_LENGTH, DEFAULT_GRID_POINTS, DEFAULT_INITIAL_SIGMA, DEFAULT_SIGMA_BOUNDS,
};
use phaseless::forward::NystromConfig;
use phaseless::shape::scatterers::{DEFAULT_RESAMPLE, DEFAULT_ROUNDING_RADIUS};
use phaseless::shape::{AnnularPrior, ScattererOptions, MIN_KNOTS};
use phaseless::surrogate::TrainConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Surrogate,
    Solver,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Surrogate => "surrogate",
            Backend::Solver => "solver",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub physics: PhysicsConfig,
    pub scatterer: ScattererConfig,
    pub surrogate: SurrogateConfig,
    pub observation: ObservationConfig,
    pub chain: ChainConfig,
    pub report: ReportConfig,
    pub validation: ValidationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub wavenumber: f64,
    pub n_spline: usize,
    pub n_obs: usize,
    pub n_inc: usize,
    pub log_r_min: f64,
    pub log_r_max: f64,
    pub nystrom_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScattererConfig {
    pub name: String,
    /// Vertex file for `polygon-file`, relative to the config file.
    pub vertex_file: Option<PathBuf>,
    pub rounding_radius: f64,
    pub resample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub hidden: usize,
    pub samples: usize,
    pub split: [f64; 3],
    /// Seed of the prior draws in `gen-train`.
    pub data_seed: u64,
    /// Seed of the split and weight initialisation in `train`.
    pub seed: u64,
    pub max_iterations: usize,
    pub patience: usize,
    /// Evaluations timed per backend for the speed-up measurement.
    pub benchmark_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationConfig {
    /// Relative noise level `σ̂`; the noise std is `σ̂·max|f|`.
    pub sigma_hat: f64,
    pub seed: u64,
    /// Nyström parameter for the synthetic data; defaults to the physics one.
    pub nystrom_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub backend: Backend,
    pub length: usize,
    pub burn_in: usize,
    pub grid_points: usize,
    pub seed: u64,
    /// σ prior support as multiples of `max|δ|`.
    pub sigma_bounds: [f64; 2],
    pub initial_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub m_eval: usize,
    pub histogram_angle: f64,
    pub histogram_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    pub samples: usize,
    pub seed: u64,
    pub mie_tolerance: f64,
    pub certificate_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("run"),
            physics: PhysicsConfig::default(),
            scatterer: ScattererConfig::default(),
            surrogate: SurrogateConfig::default(),
            observation: ObservationConfig::default(),
            chain: ChainConfig::default(),
            report: ReportConfig::default(),
            validation: ValidationConfig::default(),
        }
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { wavenumber: PI, n_spline: 12, n_obs: 12, n_inc: 12, log_r_min: -0.5, log_r_max: 0.5, nystrom_n: 100 }
    }
}

impl Default for ScattererConfig {
    fn default() -> Self {
        Self {
            name: "trefoil".into(),
            vertex_file: None,
            rounding_radius: DEFAULT_ROUNDING_RADIUS,
            resample: DEFAULT_RESAMPLE,
        }
    }
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            hidden: t.hidden,
            samples: 30_000,
            split: t.split,
            data_seed: 0,
            seed: t.seed,
            max_iterations: t.max_iterations,
            patience: t.patience,
            benchmark_evaluations: 1000,
        }
    }
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self { sigma_hat: 0.02, seed: 1, nystrom_n: None }
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Surrogate,
            length: DEFAULT_CHAIN_LENGTH,
            burn_in: DEFAULT_BURN_IN,
            grid_points: DEFAULT_GRID_POINTS,
            seed: 2,
            sigma_bounds: DEFAULT_SIGMA_BOUNDS,
            initial_sigma: DEFAULT_INITIAL_SIGMA,
        }
    }
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { m_eval: phaseless::postprocess::M_EVAL, histogram_angle: 2.93, histogram_bins: 30 }
    }
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { samples: 100, seed: 3, mie_tolerance: 1e-8, certificate_tolerance: 1e-5 }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| invalid(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(v) = cfg.scatterer.vertex_file.as_mut() {
            if v.is_relative() {
                *v = base.join(&*v);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Hex SHA-256 of the canonical JSON form, after command-line overrides.
    /// The output directory is excluded so a moved run keeps its hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }

    /// Rejects anything that would make the symmetry extension or the
    /// sampler ill-defined, before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.physics;
        if !(p.wavenumber.is_finite() && p.wavenumber > 0.0) {
            return Err(invalid(format!("wavenumber must be positive, got {}", p.wavenumber)));
        }
        for (name, v) in [("n_spline", p.n_spline), ("n_obs", p.n_obs), ("n_inc", p.n_inc), ("nystrom_n", p.nystrom_n)] {
            if v == 0 {
                return Err(invalid(format!("physics.{name} must be positive")));
            }
        }
        if p.n_spline < MIN_KNOTS {
            return Err(invalid(format!("physics.n_spline must be at least {MIN_KNOTS}, got {}", p.n_spline)));
        }
        if p.n_obs != p.n_spline {
            return Err(invalid(format!(
                "physics.n_obs ({}) must equal physics.n_spline ({}) for the rotation symmetry",
                p.n_obs, p.n_spline
            )));
        }
        if p.n_obs % p.n_inc != 0 {
            return Err(invalid(format!("physics.n_inc ({}) must divide physics.n_obs ({})", p.n_inc, p.n_obs)));
        }
        self.prior()?;
        NystromConfig::new(p.nystrom_n, p.wavenumber).map_err(CliError::from)?;
        if let Some(n) = self.observation.nystrom_n {
            NystromConfig::new(n, p.wavenumber).map_err(CliError::from)?;
        }

        let s = &self.surrogate;
        if s.hidden == 0 || s.samples == 0 || s.max_iterations == 0 || s.benchmark_evaluations == 0 {
            return Err(invalid("surrogate.hidden, samples, max_iterations and benchmark_evaluations must be positive"));
        }
        if s.split.iter().any(|f| !(*f > 0.0)) || (s.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("surrogate.split must be three positive fractions summing to 1, got {:?}", s.split)));
        }

        let o = &self.observation;
        if !(o.sigma_hat.is_finite() && o.sigma_hat >= 0.0) {
            return Err(invalid(format!("observation.sigma_hat must be non-negative, got {}", o.sigma_hat)));
        }

        let c = &self.chain;
        if c.grid_points < 10 {
            return Err(invalid(format!("chain.grid_points must be at least 10, got {}", c.grid_points)));
        }
        if c.length <= c.burn_in {
            return Err(invalid(format!("chain.length ({}) must exceed chain.burn_in ({})", c.length, c.burn_in)));
        }
        let [lo, hi] = c.sigma_bounds;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid(format!("chain.sigma_bounds must satisfy 0 < lower < upper, got {:?}", c.sigma_bounds)));
        }
        if !(c.initial_sigma > 0.0 && c.initial_sigma.is_finite()) {
            return Err(invalid(format!("chain.initial_sigma must be positive, got {}", c.initial_sigma)));
        }

        let r = &self.report;
        if r.m_eval < 8 || r.histogram_bins == 0 {
            return Err(invalid("report.m_eval must be at least 8 and report.histogram_bins positive"));
        }
        if !(0.0..std::f64::consts::TAU).contains(&r.histogram_angle) {
            return Err(invalid(format!("report.histogram_angle must lie in [0, 2π), got {}", r.histogram_angle)));
        }

        let v = &self.validation;
        if v.samples == 0 || !(v.mie_tolerance > 0.0) || !(v.certificate_tolerance > 0.0) {
            return Err(invalid("validation.samples and tolerances must be positive"));
        }
        if self.scatterer.name == "polygon-file" && self.scatterer.vertex_file.is_none() {
            return Err(invalid("scatterer `polygon-file` needs scatterer.vertex_file"));
        }
        Ok(())
    }

    pub fn prior(&self) -> Result<AnnularPrior, CliError> {
        let p = &self.physics;
        Ok(AnnularPrior::new(p.log_r_min, p.log_r_max, p.n_spline)?)
    }

    pub fn nystrom(&self) -> Result<NystromConfig<f64>, CliError> {
        Ok(NystromConfig::new(self.physics.nystrom_n, self.physics.wavenumber)?)
    }

    pub fn data_nystrom(&self) -> Result<NystromConfig<f64>, CliError> {
        let n = self.observation.nystrom_n.unwrap_or(self.physics.nystrom_n);
        Ok(NystromConfig::new(n, self.physics.wavenumber)?)
    }

    pub fn scatterer_options(&self) -> ScattererOptions {
        ScattererOptions {
            rounding_radius: self.scatterer.rounding_radius,
            resample: self.scatterer.resample,
            vertex_file: self.scatterer.vertex_file.clone(),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let s = &self.surrogate;
        TrainConfig {
            hidden: s.hidden,
            split: s.split,
            seed: s.seed,
            max_iterations: s.max_iterations,
            patience: s.patience,
            ..TrainConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_standard_experiment() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!((c.physics.n_spline, c.physics.n_obs, c.physics.n_inc), (12, 12, 12));
        assert_eq!((c.surrogate.hidden, c.surrogate.samples), (200, 30_000));
        assert_eq!((c.chain.length, c.chain.burn_in, c.chain.grid_points), (15_100, 100, 100));
        assert_eq!(c.chain.initial_sigma, 0.1);
        assert_eq!(c.observation.sigma_hat, 0.02);
        assert_eq!(c.physics.nystrom_n, 100);
    }

    #[test]
    fn empty_file_and_round_trip() {
        let c: RunConfig = toml::from_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn symmetry_prerequisites_are_enforced() {
        let mut c = RunConfig::default();
        c.physics.n_inc = 5;
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
        let mut c = RunConfig::default();
        c.physics.n_obs = 24;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.physics.n_inc = 4;
        c.validate().unwrap();
        let mut c = RunConfig::default();
        c.chain.burn_in = c.chain.length;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[physics]\nwavenumbr = 3.0\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.chain.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
