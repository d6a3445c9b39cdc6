use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{forward_intensity, IntensityMatrix, NystromConfig};
use crate::geometry::Vec2;
use crate::io::{read_csv, read_json, sidecar_path, write_csv, write_json};
use crate::shape::BoundaryCurve;

pub const OBSERVATION_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationMeta {
    pub format_version: u32,
    pub wavenumber: f64,
    /// Name of the generating shape for synthetic data.
    pub truth: Option<String>,
    /// Relative noise level; the absolute level is `sigma_hat·‖f‖∞`.
    pub sigma_hat: f64,
    pub sigma: f64,
    pub seed: u64,
    pub nystrom_n: usize,
}

/// Noisy intensities `δ = f + η`, one row per observation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationData {
    pub delta: IntensityMatrix<f64>,
    pub meta: ObservationMeta,
}

impl ObservationData {
    pub fn n_obs(&self) -> usize {
        self.delta.n_obs()
    }

    pub fn n_inc(&self) -> usize {
        self.delta.n_inc()
    }

    /// Row-major entries.
    pub fn values(&self) -> &[f64] {
        self.delta.as_slice()
    }
}

/// Solves the forward problem for `curve` and adds i.i.d. Gaussian noise
/// with standard deviation `sigma_hat·max|f|`. The noise stream is fixed by
/// `seed` alone.
pub fn synthesize_observations<C: BoundaryCurve<f64> + ?Sized>(
    curve: &C,
    truth: Option<&str>,
    cfg: &NystromConfig<f64>,
    inc_dirs: &[Vec2<f64>],
    obs_dirs: &[Vec2<f64>],
    sigma_hat: f64,
    seed: u64,
) -> Result<ObservationData> {
    if !(sigma_hat >= 0.0 && sigma_hat.is_finite()) {
        return Err(Error::Config(format!("noise level must be finite and non-negative, got {sigma_hat}")));
    }
    let f = forward_intensity(curve, cfg, inc_dirs, obs_dirs)?;
    let sigma = sigma_hat * f.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy: Vec<f64> = f
        .as_slice()
        .iter()
        .map(|&v| {
            let eta: f64 = StandardNormal.sample(&mut rng);
            v + sigma * eta
        })
        .collect();
    let delta = IntensityMatrix::from_rows(noisy, obs_dirs.to_vec(), inc_dirs.to_vec())?;
    let meta = ObservationMeta {
        format_version: OBSERVATION_FORMAT_VERSION,
        wavenumber: cfg.k,
        truth: truth.map(String::from),
        sigma_hat,
        sigma,
        seed,
        nystrom_n: cfg.n,
    };
    Ok(ObservationData { delta, meta })
}

#[derive(Serialize, Deserialize)]
struct ObservationSidecar {
    #[serde(flatten)]
    meta: ObservationMeta,
    obs_directions: Vec<Vec2<f64>>,
    inc_directions: Vec<Vec2<f64>>,
}

/// CSV of `δ` (row = observation direction, column = incident direction)
/// plus a JSON sidecar holding the directions and provenance.
pub fn save_observations(data: &ObservationData, path: &Path) -> Result<()> {
    let (no, ni) = (data.n_obs(), data.n_inc());
    let header: Vec<String> = (1..=ni).map(|j| format!("inc_{j}")).collect();
    let rows = (0..no).map(|i| data.values()[i * ni..(i + 1) * ni].to_vec());
    write_csv(path, &header, rows)?;
    let sidecar = ObservationSidecar {
        meta: data.meta.clone(),
        obs_directions: data.delta.obs_directions.clone(),
        inc_directions: data.delta.inc_directions.clone(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

pub fn load_observations(path: &Path) -> Result<ObservationData> {
    let side: ObservationSidecar = read_json(&sidecar_path(path))?;
    if side.meta.format_version != OBSERVATION_FORMAT_VERSION {
        return Err(Error::Version { expected: OBSERVATION_FORMAT_VERSION, found: side.meta.format_version });
    }
    let ni = side.inc_directions.len();
    let (_, rows) = read_csv(path, ni)?;
    if rows.len() != side.obs_directions.len() {
        return Err(Error::format(
            path,
            format!("expected {} observation rows, found {}", side.obs_directions.len(), rows.len()),
        ));
    }
    let delta = IntensityMatrix::from_rows(rows.concat(), side.obs_directions, side.inc_directions)?;
    Ok(ObservationData { delta, meta: side.meta })
}
