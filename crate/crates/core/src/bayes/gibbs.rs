use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backend::{BackendCounters, ForwardBackend};
use super::diagnostics::{chain_diagnostics, Diagnostics};
use super::observe::ObservationData;
use super::posterior::{gaussian_log_likelihood, log_prior, sum_sq_diff, PosteriorConfig};
use crate::error::{Error, Result};
use crate::io::{read_csv, read_json, sidecar_path, write_csv, write_json};

pub const CHAIN_FORMAT_VERSION: u32 = 1;

/// State after one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    pub xi: Vec<f64>,
    pub sigma: f64,
    pub log_posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub samples: Vec<ChainSample>,
    pub burn_in: usize,
    pub config: PosteriorConfig,
    pub backend: String,
    pub counters: BackendCounters,
    pub elapsed_seconds: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples after the burn-in.
    pub fn retained(&self) -> &[ChainSample] {
        &self.samples[self.burn_in.min(self.samples.len())..]
    }

    pub fn log_posterior_trace(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.log_posterior).collect()
    }

    /// Autocorrelation analysis of the retained log-posterior series.
    pub fn diagnostics(&self) -> Result<Diagnostics> {
        let series: Vec<f64> = self.retained().iter().map(|s| s.log_posterior).collect();
        chain_diagnostics(&series)
    }
}

/// `count` equispaced points covering `[lo, hi]` inclusive.
fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let h = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + h * i as f64 }).collect()
}

/// Draws an index with probability proportional to `exp(logw)`. Weights are
/// shifted by their maximum first, so the largest is exactly 1 and underflow
/// of the others is harmless.
fn sample_discrete<R: Rng>(logw: &[f64], scratch: &mut Vec<f64>, rng: &mut R) -> Result<usize> {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numeric(format!("conditional log-weights have no finite maximum ({max})")));
    }
    scratch.clear();
    let mut total = 0.0;
    for &l in logw {
        total += (l - max).exp();
        scratch.push(total);
    }
    let u = rng.random::<f64>() * total;
    Ok(scratch.iter().position(|&c| u < c).unwrap_or(logw.len() - 1))
}

/// Griddy Gibbs sampling of `(ξ, σ)`. Each sweep updates `ξ_1..ξ_N` and then
/// `log σ`, each from its conditional evaluated on `L` equispaced points
/// spanning that coordinate's prior support. The σ update reuses the cached
/// `f(ξ)`, so a sweep costs `L·N` forward evaluations.
pub fn run_gibbs<B: ForwardBackend + ?Sized>(
    data: &ObservationData,
    config: &PosteriorConfig,
    backend: &mut B,
) -> Result<Chain> {
    config.validate()?;
    let ns = config.prior.n_spline;
    if backend.n_spline() != ns {
        return Err(Error::dim("backend knot count", ns, backend.n_spline()));
    }
    if backend.dims() != (data.n_obs(), data.n_inc()) {
        return Err(Error::Config(format!(
            "backend produces {:?} (obs, inc) intensities but data has ({}, {})",
            backend.dims(),
            data.n_obs(),
            data.n_inc()
        )));
    }
    if let Some((obs, inc)) = backend.directions() {
        let same = |a: &[crate::geometry::Vec2<f64>], b: &[crate::geometry::Vec2<f64>]| {
            a.iter().zip(b).all(|(p, q)| (p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9)
        };
        if !same(&obs, &data.delta.obs_directions) || !same(&inc, &data.delta.inc_directions) {
            return Err(Error::Config("backend directions differ from the observation directions".into()));
        }
    }

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let delta = data.values();
    let block = delta.len();
    let l = config.grid_points;
    let (lo, hi) = (config.prior.log_r_min, config.prior.log_r_max);
    let knot_grid = grid(lo, hi, l);
    let sp = config.sigma_prior;
    let log_sigma_grid = grid(sp.lower.ln(), sp.upper.ln(), l);

    // Unit circle if admissible, otherwise the centre of the box.
    let x0 = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { 0.5 * (lo + hi) };
    let mut xi = vec![x0; ns];
    let mut sigma = config.initial_sigma.clamp(sp.lower, sp.upper);
    let mut f = vec![0.0; block];
    backend.evaluate(&xi, &mut f)?;

    let mut line = vec![0.0; l * block];
    let mut logw = vec![0.0; l];
    let mut scratch = Vec::with_capacity(l);
    let mut samples = Vec::with_capacity(config.chain_length);
    for _ in 0..config.chain_length {
        for c in 0..ns {
            backend.evaluate_line(&xi, c, &knot_grid, &mut line)?;
            let inv = 1.0 / (2.0 * sigma * sigma);
            for (w, fg) in logw.iter_mut().zip(line.chunks_exact(block)) {
                *w = -sum_sq_diff(delta, fg) * inv;
            }
            let g = sample_discrete(&logw, &mut scratch, &mut rng)?;
            xi[c] = knot_grid[g];
            f.copy_from_slice(&line[g * block..(g + 1) * block]);
        }
        // In u = log σ the log-uniform prior is flat, so the conditional is the likelihood.
        let sse = sum_sq_diff(delta, &f);
        for (w, &u) in logw.iter_mut().zip(&log_sigma_grid) {
            *w = gaussian_log_likelihood(sse, block, u.exp());
        }
        let g = sample_discrete(&logw, &mut scratch, &mut rng)?;
        sigma = log_sigma_grid[g].exp().clamp(sp.lower, sp.upper);
        let log_posterior = gaussian_log_likelihood(sse, block, sigma) + log_prior(&xi, sigma, config);
        samples.push(ChainSample { xi: xi.clone(), sigma, log_posterior });
    }
    Ok(Chain {
        samples,
        burn_in: config.burn_in,
        config: config.clone(),
        backend: backend.name().to_string(),
        counters: backend.counters(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize, Deserialize)]
struct ChainSidecar {
    format_version: u32,
    n_spline: usize,
    burn_in: usize,
    config: PosteriorConfig,
    backend: String,
    counters: BackendCounters,
}

/// CSV with columns `sweep, xi_1..xi_N, sigma, log_posterior` plus a JSON
/// sidecar holding the configuration. Wall time is not written, so equal
/// runs give identical files; [`load_chain`] reports it as zero.
pub fn save_chain(chain: &Chain, path: &Path) -> Result<()> {
    let ns = chain.config.prior.n_spline;
    let header: Vec<String> = std::iter::once("sweep".to_string())
        .chain((1..=ns).map(|i| format!("xi_{i}")))
        .chain(["sigma".to_string(), "log_posterior".to_string()])
        .collect();
    let rows = chain.samples.iter().enumerate().map(|(s, x)| {
        let mut row = Vec::with_capacity(ns + 3);
        row.push((s + 1) as f64);
        row.extend_from_slice(&x.xi);
        row.push(x.sigma);
        row.push(x.log_posterior);
        row
    });
    write_csv(path, &header, rows)?;
    let side = ChainSidecar {
        format_version: CHAIN_FORMAT_VERSION,
        n_spline: ns,
        burn_in: chain.burn_in,
        config: chain.config.clone(),
        backend: chain.backend.clone(),
        counters: chain.counters,
    };
    write_json(&sidecar_path(path), &side)
}

pub fn load_chain(path: &Path) -> Result<Chain> {
    let side: ChainSidecar = read_json(&sidecar_path(path))?;
    if side.format_version != CHAIN_FORMAT_VERSION {
        return Err(Error::Version { expected: CHAIN_FORMAT_VERSION, found: side.format_version });
    }
    let ns = side.n_spline;
    let (_, rows) = read_csv(path, ns + 3)?;
    let samples = rows
        .into_iter()
        .map(|r| ChainSample { xi: r[1..=ns].to_vec(), sigma: r[ns + 1], log_posterior: r[ns + 2] })
        .collect();
    Ok(Chain {
        samples,
        burn_in: side.burn_in,
        config: side.config,
        backend: side.backend,
        counters: side.counters,
        elapsed_seconds: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{MockBackend, ObservationMeta, SigmaPrior, OBSERVATION_FORMAT_VERSION};
    use crate::forward::IntensityMatrix;
    use crate::geometry::Vec2;
    use crate::shape::AnnularPrior;

    pub(crate) fn flat_data(n_obs: usize, n_inc: usize, value: f64) -> ObservationData {
        let dirs = |n: usize| (0..n).map(|i| Vec2::from_angle(i as f64)).collect::<Vec<_>>();
        ObservationData {
            delta: IntensityMatrix::from_rows(vec![value; n_obs * n_inc], dirs(n_obs), dirs(n_inc)).unwrap(),
            meta: ObservationMeta {
                format_version: OBSERVATION_FORMAT_VERSION,
                wavenumber: 1.0,
                truth: None,
                sigma_hat: 0.0,
                sigma: 0.0,
                seed: 0,
                nystrom_n: 0,
            },
        }
    }

    fn config(ns: usize, sweeps: usize, seed: u64) -> PosteriorConfig {
        let mut c = PosteriorConfig::new(AnnularPrior::new(-0.5, 0.5, ns).unwrap(), SigmaPrior::new(1e-3, 1.0).unwrap(), seed);
        c.chain_length = sweeps;
        c.burn_in = 0;
        c.grid_points = 20;
        c
    }

    #[test]
    fn grid_hits_both_ends() {
        let g = grid(-0.5, 0.5, 100);
        assert_eq!((g[0], g[99]), (-0.5, 0.5));
        assert!((g[1] - g[0] - 1.0 / 99.0).abs() < 1e-15);
    }

    #[test]
    fn extreme_log_weights_do_not_underflow() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = Vec::new();
        let w = [-1e6, -1e6 - 1.0, -2e6];
        for _ in 0..50 {
            assert!(sample_discrete(&w, &mut s, &mut rng).unwrap() < 2);
        }
        assert!(sample_discrete(&[f64::NEG_INFINITY; 3], &mut s, &mut rng).is_err());
    }

    #[test]
    fn chain_is_seed_deterministic_and_in_support() {
        let data = flat_data(2, 2, 1.0);
        let func = |x: &[f64]| vec![1.0 + x[0] + 0.5 * x[1]; 4];
        let run = |seed| run_gibbs(&data, &config(4, 40, seed), &mut MockBackend::new(4, 2, 2, func)).unwrap();
        let (a, b) = (run(7), run(7));
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, run(8).samples);
        for s in &a.samples {
            assert!(s.xi.iter().all(|v| (-0.5..=0.5).contains(v)));
            assert!(s.sigma >= 1e-3 && s.sigma <= 1.0);
            assert!(s.log_posterior.is_finite());
        }
        assert_eq!(a.len(), 40);
    }

    #[test]
    fn rejects_mismatched_backend() {
        let data = flat_data(2, 2, 1.0);
        let mut m = MockBackend::constant(4, 3, 2, vec![1.0; 6]);
        assert!(run_gibbs(&data, &config(4, 10, 0), &mut m).is_err());
        let mut m = MockBackend::constant(5, 2, 2, vec![1.0; 4]);
        assert!(run_gibbs(&data, &config(4, 10, 0), &mut m).is_err());
    }

    #[test]
    fn chain_round_trips_through_files() {
        let data = flat_data(2, 2, 1.0);
        let mut m = MockBackend::new(4, 2, 2, |x: &[f64]| vec![x[2]; 4]);
        let mut chain = run_gibbs(&data, &config(4, 15, 2), &mut m).unwrap();
        chain.burn_in = 5;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("chain.csv");
        save_chain(&chain, &p).unwrap();
        let bytes = std::fs::read(sidecar_path(&p)).unwrap();
        save_chain(&chain, &p).unwrap();
        assert_eq!(std::fs::read(sidecar_path(&p)).unwrap(), bytes);
        chain.elapsed_seconds = 0.0;
        assert_eq!(load_chain(&p).unwrap(), chain);
        assert_eq!(chain.retained().len(), 10);
    }
}
