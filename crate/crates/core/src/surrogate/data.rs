//! Training data: prior draws and their reference-direction intensities.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{observation_directions, spline_boundary, NystromOperator, NystromConfig};
use crate::geometry::Vec2;
use crate::io::{read_csv, read_json, sidecar_path, write_csv, write_json};
use crate::shape::AnnularPrior;

pub const DATA_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub format_version: u32,
    pub wavenumber: f64,
    pub nystrom_n: usize,
    pub reference_direction: Vec2<f64>,
    pub prior: AnnularPrior,
    pub n_obs: usize,
    pub seed: u64,
}

/// `M` prior samples (row-major `M × N_spline`) and their intensities
/// `f¹` (row-major `M × N_obs`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
    pub meta: TrainingMeta,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.inputs.len() / self.n_spline()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn n_spline(&self) -> usize {
        self.meta.prior.n_spline
    }

    pub fn n_obs(&self) -> usize {
        self.meta.n_obs
    }

    pub fn input(&self, m: usize) -> &[f64] {
        let ns = self.n_spline();
        &self.inputs[m * ns..(m + 1) * ns]
    }

    pub fn output(&self, m: usize) -> &[f64] {
        let no = self.n_obs();
        &self.outputs[m * no..(m + 1) * no]
    }

    /// Checks internal consistency; used after loading.
    pub fn validate(&self) -> Result<()> {
        let (ns, no) = (self.n_spline(), self.n_obs());
        if ns == 0 || no == 0 || self.inputs.len() % ns != 0 {
            return Err(Error::Config("training inputs do not form whole rows".into()));
        }
        if self.outputs.len() != self.len() * no {
            return Err(Error::dim("training output rows", self.len(), self.outputs.len() / no.max(1)));
        }
        if self.outputs.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Numeric("training outputs must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// The prior draw for sample `index`, independent of any other sample.
pub fn sample_for_index(prior: &AnnularPrior, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    prior.sample(&mut rng)
}

/// `f¹(ξ)`: solver intensities for one incident direction.
pub fn reference_intensity(
    xi: &[f64],
    cfg: &NystromConfig<f64>,
    reference: Vec2<f64>,
    obs: &[Vec2<f64>],
) -> Result<Vec<f64>> {
    let curve = spline_boundary(xi)?;
    let op = NystromOperator::new(&curve, cfg)?;
    Ok(op.far_field(&op.solve(reference), obs)?.intensities())
}

/// Draws `m` samples from `prior` and solves for each in parallel. Sample `i`
/// uses its own RNG stream, so results do not depend on the thread count.
pub fn generate_training_data(
    prior: &AnnularPrior,
    m: usize,
    cfg: &NystromConfig<f64>,
    reference: Vec2<f64>,
    n_obs: usize,
    seed: u64,
) -> Result<TrainingSet> {
    let obs = observation_directions::<f64>(n_obs);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let xi = sample_for_index(prior, seed, i);
            let f = reference_intensity(&xi, cfg, reference, &obs)
                .map_err(|e| Error::Numeric(format!("training sample {i} (knots {xi:?}): {e}")))?;
            Ok((xi, f))
        })
        .collect::<Result<_>>()?;
    let mut inputs = Vec::with_capacity(m * prior.n_spline);
    let mut outputs = Vec::with_capacity(m * n_obs);
    for (xi, f) in rows {
        inputs.extend(xi);
        outputs.extend(f);
    }
    Ok(TrainingSet {
        inputs,
        outputs,
        meta: TrainingMeta {
            format_version: DATA_FORMAT_VERSION,
            wavenumber: cfg.k,
            nystrom_n: cfg.n,
            reference_direction: reference,
            prior: *prior,
            n_obs,
            seed,
        },
    })
}

/// CSV with header `xi_1..xi_Ns,f_1..f_No` plus a JSON metadata sidecar.
pub fn save_training_set(set: &TrainingSet, path: &Path) -> Result<()> {
    let (ns, no) = (set.n_spline(), set.n_obs());
    let header: Vec<String> = (1..=ns).map(|i| format!("xi_{i}")).chain((1..=no).map(|i| format!("f_{i}"))).collect();
    let rows = (0..set.len()).map(|m| set.input(m).iter().chain(set.output(m)).copied().collect());
    write_csv(path, &header, rows)?;
    write_json(&sidecar_path(path), &set.meta)
}

pub fn load_training_set(path: &Path) -> Result<TrainingSet> {
    let meta: TrainingMeta = read_json(&sidecar_path(path))?;
    if meta.format_version != DATA_FORMAT_VERSION {
        return Err(Error::Version { expected: DATA_FORMAT_VERSION, found: meta.format_version });
    }
    let (ns, no) = (meta.prior.n_spline, meta.n_obs);
    let (_, rows) = read_csv(path, ns + no)?;
    let mut inputs = Vec::with_capacity(rows.len() * ns);
    let mut outputs = Vec::with_capacity(rows.len() * no);
    for row in rows {
        inputs.extend_from_slice(&row[..ns]);
        outputs.extend_from_slice(&row[ns..]);
    }
    let set = TrainingSet { inputs, outputs, meta };
    set.validate()?;
    Ok(set)
}
