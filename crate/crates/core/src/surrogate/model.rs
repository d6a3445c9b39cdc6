//! The trained single-hidden-layer network and its symmetry extension to all
//! incident directions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::normalize::Normalization;
use crate::error::{Error, Result};
use crate::forward::{observation_directions, IntensityMatrix};
use crate::geometry::Vec2;
use crate::shape::rotate_knots;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Weights of `ŷ = W2 tanh(W1 x̃ + b1) + b2` in normalised coordinates.
/// Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    /// `n_hidden × n_in`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `n_out × n_hidden`.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Network {
    pub fn zeros(n_in: usize, n_hidden: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_hidden,
            n_out,
            w1: vec![0.0; n_hidden * n_in],
            b1: vec![0.0; n_hidden],
            w2: vec![0.0; n_out * n_hidden],
            b2: vec![0.0; n_out],
        }
    }

    fn check(&self) -> Result<()> {
        let sizes = [
            ("w1", self.n_hidden * self.n_in, self.w1.len()),
            ("b1", self.n_hidden, self.b1.len()),
            ("w2", self.n_out * self.n_hidden, self.w2.len()),
            ("b2", self.n_out, self.b2.len()),
        ];
        for (what, expected, found) in sizes {
            if expected != found {
                return Err(Error::Dimension { what, expected, found });
            }
        }
        Ok(())
    }

    /// `W1 x + b1` into `out`.
    pub fn preactivation(&self, x: &[f64], out: &mut [f64]) {
        for (h, o) in out.iter_mut().enumerate() {
            let row = &self.w1[h * self.n_in..(h + 1) * self.n_in];
            *o = self.b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// Output layer applied to hidden pre-activations `z` (tanh applied here).
    pub fn output_from_preactivation(&self, z: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        for (a, &v) in hidden.iter_mut().zip(z) {
            *a = v.tanh();
        }
        for (o, y) in out.iter_mut().enumerate() {
            let row = &self.w2[o * self.n_hidden..(o + 1) * self.n_hidden];
            *y = self.b2[o] + row.iter().zip(hidden.iter()).map(|(w, a)| w * a).sum::<f64>();
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.n_hidden];
        let mut a = vec![0.0; self.n_hidden];
        let mut y = vec![0.0; self.n_out];
        self.preactivation(x, &mut z);
        self.output_from_preactivation(&z, &mut a, &mut y);
        y
    }

    pub fn num_parameters(&self) -> usize {
        self.n_hidden * (self.n_in + 1) + self.n_out * (self.n_hidden + 1)
    }
}

/// Provenance and dimensions stored with a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub wavenumber: f64,
    pub n_spline: usize,
    pub n_obs: usize,
    pub n_hidden: usize,
    /// Reference incident direction the network was trained for.
    pub reference_direction: Vec2<f64>,
    /// Prior box the training inputs were drawn from.
    pub log_r_min: f64,
    pub log_r_max: f64,
    pub nystrom_n: usize,
    pub rmse_train: f64,
    pub rmse_val: f64,
    pub rmse_test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub network: Network,
    pub in_norm: Normalization,
    pub out_norm: Normalization,
    pub meta: ModelMeta,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: SurrogateModel,
}

/// Reusable buffers for repeated predictions.
#[derive(Debug, Clone)]
pub struct Workspace {
    x: Vec<f64>,
    z: Vec<f64>,
    a: Vec<f64>,
}

impl SurrogateModel {
    pub fn validate(&self) -> Result<()> {
        self.network.check()?;
        let m = &self.meta;
        let pairs = [
            ("network inputs", m.n_spline, self.network.n_in),
            ("network outputs", m.n_obs, self.network.n_out),
            ("hidden units", m.n_hidden, self.network.n_hidden),
            ("input normalisation", m.n_spline, self.in_norm.dim()),
            ("output normalisation", m.n_obs, self.out_norm.dim()),
        ];
        for (what, expected, found) in pairs {
            if expected != found {
                return Err(Error::Dimension { what, expected, found });
            }
        }
        Ok(())
    }

    pub fn n_spline(&self) -> usize {
        self.meta.n_spline
    }

    pub fn n_obs(&self) -> usize {
        self.meta.n_obs
    }

    pub fn workspace(&self) -> Workspace {
        let net = &self.network;
        Workspace {
            x: vec![0.0; net.n_in],
            z: vec![0.0; net.n_hidden],
            a: vec![0.0; net.n_hidden],
        }
    }

    fn check_input(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.n_spline() {
            return Err(Error::dim("knot vector", self.n_spline(), xi.len()));
        }
        Ok(())
    }

    /// `f¹(ξ)`: intensities at the observation directions for the reference
    /// incident direction, in physical units.
    pub fn predict_reference(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_input(xi)?;
        let mut ws = self.workspace();
        let mut out = vec![0.0; self.n_obs()];
        self.predict_into(xi, &mut ws, &mut out);
        Ok(out)
    }

    /// Unchecked allocation-free variant of [`Self::predict_reference`].
    pub fn predict_into(&self, xi: &[f64], ws: &mut Workspace, out: &mut [f64]) {
        ws.x.copy_from_slice(xi);
        self.in_norm.apply_row(&mut ws.x);
        self.network.preactivation(&ws.x, &mut ws.z);
        self.network.output_from_preactivation(&ws.z, &mut ws.a, out);
        self.out_norm.invert_row(out);
    }

    /// True if `xi` leaves the prior box seen in training. Predictions are
    /// still finite there (tanh saturates) but are extrapolations.
    pub fn is_extrapolating(&self, xi: &[f64]) -> bool {
        xi.iter().any(|&v| v < self.meta.log_r_min || v > self.meta.log_r_max)
    }

    /// `∂f¹_o/∂ξ_j`, row-major `n_obs × n_spline`.
    pub fn jacobian_reference(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_input(xi)?;
        let net = &self.network;
        let mut ws = self.workspace();
        ws.x.copy_from_slice(xi);
        self.in_norm.apply_row(&mut ws.x);
        net.preactivation(&ws.x, &mut ws.z);
        let d: Vec<f64> = ws.z.iter().map(|z| 1.0 - z.tanh().powi(2)).collect();
        let mut jac = vec![0.0; net.n_out * net.n_in];
        for o in 0..net.n_out {
            for h in 0..net.n_hidden {
                let c = net.w2[o * net.n_hidden + h] * d[h];
                for j in 0..net.n_in {
                    jac[o * net.n_in + j] += c * net.w1[h * net.n_in + j];
                }
            }
            for j in 0..net.n_in {
                jac[o * net.n_in + j] *= self.out_norm.unit(o) / self.in_norm.unit(j);
            }
        }
        Ok(jac)
    }

    /// Intensities for all `n_inc` equispaced incident directions
    /// `d̂_j = R_{2πj/n_inc} d̂_ref` via cyclic symmetry:
    /// `f_j[i] = f¹(σ^{−j·Ns/n_inc} ξ)[(i − j·No/n_inc) mod No]`.
    pub fn predict_all(&self, xi: &[f64], n_inc: usize) -> Result<IntensityMatrix<f64>> {
        self.check_input(xi)?;
        let plan = SymmetryPlan::new(self.n_spline(), self.n_obs(), n_inc)?;
        let mut ws = self.workspace();
        let mut cols = vec![vec![0.0; self.n_obs()]; n_inc];
        let mut f1 = vec![0.0; self.n_obs()];
        for (j, col) in cols.iter_mut().enumerate() {
            let rotated = rotate_knots(xi, -((j * plan.knot_step) as i64));
            self.predict_into(&rotated, &mut ws, &mut f1);
            plan.scatter_column(j, &f1, col);
        }
        IntensityMatrix::from_columns(&cols, observation_directions(self.n_obs()), plan.incident_directions(self.meta.reference_direction))
    }
}

/// Index bookkeeping for the cyclic-symmetry extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryPlan {
    pub n_spline: usize,
    pub n_obs: usize,
    pub n_inc: usize,
    /// Knot shift per incident-direction step, `Ns / n_inc`.
    pub knot_step: usize,
    /// Observation-index shift per step, `No / n_inc`.
    pub obs_step: usize,
}

impl SymmetryPlan {
    /// Requires `n_inc` to divide both `n_spline` and `n_obs`, so that every
    /// rotation mapping one incident direction to another also maps the knot
    /// and observation grids onto themselves.
    pub fn new(n_spline: usize, n_obs: usize, n_inc: usize) -> Result<Self> {
        if n_inc == 0 || n_spline % n_inc != 0 || n_obs % n_inc != 0 {
            return Err(Error::Config(format!(
                "symmetry extension needs N_inc to divide N_spline and N_obs (N_inc={n_inc}, N_spline={n_spline}, N_obs={n_obs})"
            )));
        }
        Ok(Self { n_spline, n_obs, n_inc, knot_step: n_spline / n_inc, obs_step: n_obs / n_inc })
    }

    /// Knot shift for column `j`, as passed to `rotate_knots`.
    pub fn knot_shift(&self, j: usize) -> i64 {
        -((j * self.knot_step) as i64)
    }

    /// Writes column `j` from the reference prediction at the rotated knots.
    pub fn scatter_column(&self, j: usize, f1: &[f64], col: &mut [f64]) {
        let shift = (j * self.obs_step) % self.n_obs;
        for (i, c) in col.iter_mut().enumerate() {
            *c = f1[(i + self.n_obs - shift) % self.n_obs];
        }
    }

    pub fn incident_directions(&self, reference: Vec2<f64>) -> Vec<Vec2<f64>> {
        (0..self.n_inc)
            .map(|j| reference.rotate(std::f64::consts::TAU * j as f64 / self.n_inc as f64))
            .collect()
    }
}

pub fn save_model(model: &SurrogateModel, path: &Path) -> Result<()> {
    model.validate()?;
    let file = ModelFile { format_version: MODEL_FORMAT_VERSION, model: model.clone() };
    let text = serde_json::to_string(&file).map_err(|e| Error::format(path, e))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SurrogateModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::format(path, "missing format_version"))?;
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(Error::Version { expected: MODEL_FORMAT_VERSION, found: version as u32 });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::format(path, e))?;
    file.model.validate()?;
    Ok(file.model)
}
