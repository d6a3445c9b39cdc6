use serde::{Deserialize, Serialize};

use super::backend::ForwardBackend;
use super::observe::ObservationData;
use crate::error::{Error, Result};
use crate::shape::AnnularPrior;

/// Grid points per conditional update.
pub const DEFAULT_GRID_POINTS: usize = 100;
pub const DEFAULT_CHAIN_LENGTH: usize = 15_100;
pub const DEFAULT_BURN_IN: usize = 100;
/// Starting noise level, clamped into the σ-prior support.
pub const DEFAULT_INITIAL_SIGMA: f64 = 0.1;
/// σ-prior support as multiples of `max|δ|`.
pub const DEFAULT_SIGMA_BOUNDS: [f64; 2] = [1e-4, 1.0];

/// Log-uniform prior on `σ ∈ [lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPrior {
    pub lower: f64,
    pub upper: f64,
}

impl SigmaPrior {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && upper > lower && upper.is_finite()) {
            return Err(Error::Config(format!("σ prior needs 0 < lower < upper, got [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    /// Bounds given relative to the largest observed intensity.
    pub fn relative_to(data: &ObservationData, factors: [f64; 2]) -> Result<Self> {
        let scale = data.delta.max_abs();
        Self::new(factors[0] * scale, factors[1] * scale)
    }

    pub fn contains(&self, sigma: f64) -> bool {
        sigma >= self.lower && sigma <= self.upper
    }

    /// Normalised `−log σ − log log(upper/lower)` inside, `−∞` outside.
    pub fn log_density(&self, sigma: f64) -> f64 {
        if !self.contains(sigma) {
            return f64::NEG_INFINITY;
        }
        -sigma.ln() - (self.upper / self.lower).ln().ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorConfig {
    pub prior: AnnularPrior,
    pub sigma_prior: SigmaPrior,
    pub grid_points: usize,
    pub chain_length: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub initial_sigma: f64,
}

impl PosteriorConfig {
    /// Defaults for everything except the priors and seed.
    pub fn new(prior: AnnularPrior, sigma_prior: SigmaPrior, seed: u64) -> Self {
        Self {
            prior,
            sigma_prior,
            grid_points: DEFAULT_GRID_POINTS,
            chain_length: DEFAULT_CHAIN_LENGTH,
            burn_in: DEFAULT_BURN_IN,
            seed,
            initial_sigma: DEFAULT_INITIAL_SIGMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 10 {
            return Err(Error::Config(format!("need at least 10 grid points, got {}", self.grid_points)));
        }
        if self.chain_length <= self.burn_in {
            return Err(Error::Config(format!(
                "chain length {} must exceed burn-in {}",
                self.chain_length, self.burn_in
            )));
        }
        if !(self.initial_sigma > 0.0 && self.initial_sigma.is_finite()) {
            return Err(Error::Config(format!("initial σ must be positive, got {}", self.initial_sigma)));
        }
        SigmaPrior::new(self.sigma_prior.lower, self.sigma_prior.upper).map(|_| ())
    }
}

/// Gaussian log-likelihood of i.i.d. noise over all `δ` entries:
/// `−(N/2)·log(2πσ²) − ‖δ − f‖²/(2σ²)` with `N = len(δ)`.
pub fn log_likelihood(delta: &[f64], f: &[f64], sigma: f64) -> Result<f64> {
    if delta.len() != f.len() {
        return Err(Error::dim("model intensities", delta.len(), f.len()));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("noise level must be positive, got {sigma}")));
    }
    Ok(gaussian_log_likelihood(sum_sq_diff(delta, f), delta.len(), sigma))
}

pub(crate) fn sum_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn gaussian_log_likelihood(sse: f64, count: usize, sigma: f64) -> f64 {
    let n = count as f64;
    -0.5 * n * (std::f64::consts::TAU * sigma * sigma).ln() - sse / (2.0 * sigma * sigma)
}

/// Normalised joint prior: uniform on the knot box (density
/// `(log R − log R0)^{−N}`) times log-uniform on σ. A zero-width box is
/// treated as a point mass with log-density 0 at its single point.
pub fn log_prior(xi: &[f64], sigma: f64, config: &PosteriorConfig) -> f64 {
    let p = &config.prior;
    if xi.len() != p.n_spline || !p.contains(xi) {
        return f64::NEG_INFINITY;
    }
    let width = p.width();
    let knots = if width > 0.0 { -(xi.len() as f64) * width.ln() } else { 0.0 };
    knots + config.sigma_prior.log_density(sigma)
}

/// Unnormalised log-posterior. Outside the prior box the backend is not
/// consulted.
pub fn log_posterior<B: ForwardBackend + ?Sized>(
    xi: &[f64],
    sigma: f64,
    data: &ObservationData,
    config: &PosteriorConfig,
    backend: &mut B,
) -> Result<f64> {
    let lp = log_prior(xi, sigma, config);
    if lp == f64::NEG_INFINITY {
        return Ok(lp);
    }
    let mut f = vec![0.0; data.values().len()];
    backend.evaluate(xi, &mut f)?;
    Ok(lp + log_likelihood(data.values(), &f, sigma)?)
}
