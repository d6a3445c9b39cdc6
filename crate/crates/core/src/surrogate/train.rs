//! Levenberg–Marquardt training of the single-hidden-layer network.
//!
//! Parameters split into hidden-layer rows `θ₁ = [W1 | b1]` and output rows
//! `θ₂ = [W2 | b2]`. With `x̃ = [x; 1]`, `ã = [tanh(W1x + b1); 1]`,
//! `d = 1 − a²` and `Z_s[(h,j)] = d_h x̃_j`, the Gauss–Newton blocks are
//!
//! * `J₁ᵀJ₁ = G ⊙ ZᵀZ` with `G[h,h'] = (W2ᵀW2)[h,h']` broadcast over `j`,
//! * `J₁ᵀJ₂[(h,j),(o,h')] = W2[o,h] (ZᵀÃ)[(h,j),h']`,
//! * `J₂ᵀJ₂ = I_o ⊗ ÃᵀÃ`,
//!
//! accumulated over sample chunks. The block-diagonal `θ₂` part is eliminated
//! through its Schur complement, leaving one dense Cholesky solve of size
//! `N_HL (N_in + 1)` per damping trial.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::TrainingSet;
use super::model::{ModelMeta, Network, SurrogateModel};
use super::normalize::Normalization;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden: usize,
    /// Train, validation and test fractions.
    pub split: [f64; 3],
    pub seed: u64,
    pub max_iterations: usize,
    /// Accepted steps without validation improvement before stopping.
    pub patience: usize,
    pub initial_damping: f64,
    pub damping_factor: f64,
    pub max_damping: f64,
    /// Rows per accumulation chunk.
    pub chunk: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 200,
            split: [0.70, 0.15, 0.15],
            seed: 0,
            max_iterations: 500,
            patience: 10,
            initial_damping: 1e-3,
            damping_factor: 10.0,
            max_damping: 1e10,
            chunk: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub rmse_train: f64,
    pub rmse_val: f64,
    pub rmse_test: f64,
    /// LM iterations performed (accepted and rejected).
    pub epochs: usize,
    pub accepted_steps: usize,
    pub final_damping: f64,
    pub optimizer: String,
    pub stop_reason: String,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
}

/// A network fitted to arbitrary `(x, y)` rows, with its normalisations.
#[derive(Debug, Clone)]
pub struct Fit {
    pub network: Network,
    pub in_norm: Normalization,
    pub out_norm: Normalization,
    pub report: TrainReport,
}

/// Trains on a [`TrainingSet`] and packages the result as a model.
pub fn train(data: &TrainingSet, cfg: &TrainConfig) -> Result<(SurrogateModel, TrainReport)> {
    data.validate()?;
    let fit = fit_network(&data.inputs, &data.outputs, data.n_spline(), data.n_obs(), cfg)?;
    let meta = ModelMeta {
        wavenumber: data.meta.wavenumber,
        n_spline: data.n_spline(),
        n_obs: data.n_obs(),
        n_hidden: cfg.hidden,
        reference_direction: data.meta.reference_direction,
        log_r_min: data.meta.prior.log_r_min,
        log_r_max: data.meta.prior.log_r_max,
        nystrom_n: data.meta.nystrom_n,
        rmse_train: fit.report.rmse_train,
        rmse_val: fit.report.rmse_val,
        rmse_test: fit.report.rmse_test,
    };
    let model = SurrogateModel { network: fit.network, in_norm: fit.in_norm, out_norm: fit.out_norm, meta };
    model.validate()?;
    Ok((model, fit.report))
}

struct Split {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

fn split_indices(m: usize, fractions: [f64; 3], seed: u64) -> Result<Split> {
    let total: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(*f >= 0.0)) || (total - 1.0).abs() > 1e-9 || fractions[0] <= 0.0 {
        return Err(Error::Config(format!("split fractions {fractions:?} must be non-negative and sum to 1")));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((fractions[0] * m as f64).round() as usize).min(m);
    let n_val = ((fractions[1] * m as f64).round() as usize).min(m - n_train);
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    if idx.len() < 2 {
        return Err(Error::Config(format!("training split has {} rows; need at least 2", idx.len())));
    }
    Ok(Split { train: idx, val, test })
}

/// Rows `idx` of a row-major matrix, normalised, with a trailing column of
/// ones when `bias` is set.
fn gather(data: &[f64], cols: usize, idx: &[usize], norm: &Normalization, bias: bool) -> DMatrix<f64> {
    let width = cols + usize::from(bias);
    let mut m = DMatrix::zeros(idx.len(), width);
    let mut row = vec![0.0; cols];
    for (r, &i) in idx.iter().enumerate() {
        row.copy_from_slice(&data[i * cols..(i + 1) * cols]);
        norm.apply_row(&mut row);
        for c in 0..cols {
            m[(r, c)] = row[c];
        }
        if bias {
            m[(r, cols)] = 1.0;
        }
    }
    m
}

/// Augmented weights `[W | b]`.
struct Params {
    w1: DMatrix<f64>,
    w2: DMatrix<f64>,
}

impl Params {
    fn to_network(&self) -> Network {
        let (nh, ni1) = self.w1.shape();
        let (no, nh1) = self.w2.shape();
        let mut net = Network::zeros(ni1 - 1, nh, no);
        for h in 0..nh {
            for j in 0..ni1 - 1 {
                net.w1[h * (ni1 - 1) + j] = self.w1[(h, j)];
            }
            net.b1[h] = self.w1[(h, ni1 - 1)];
        }
        for o in 0..no {
            for h in 0..nh1 - 1 {
                net.w2[o * (nh1 - 1) + h] = self.w2[(o, h)];
            }
            net.b2[o] = self.w2[(o, nh1 - 1)];
        }
        net
    }

    /// Hidden activations with bias column, `S × (nh + 1)`.
    fn hidden(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let pre = x * self.w1.transpose();
        let mut a = DMatrix::from_element(x.nrows(), pre.ncols() + 1, 1.0);
        a.view_mut((0, 0), (pre.nrows(), pre.ncols())).copy_from(&pre.map(f64::tanh));
        a
    }

    fn residual(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.hidden(x) * self.w2.transpose() - y
    }

    fn sse(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        if x.nrows() == 0 {
            return 0.0;
        }
        self.residual(x, y).norm_squared()
    }
}

fn rmse(sse: f64, entries: usize) -> f64 {
    if entries == 0 {
        f64::NAN
    } else {
        (sse / entries as f64).sqrt()
    }
}

/// Gauss–Newton quantities at the current parameters.
struct Normal {
    ztz: DMatrix<f64>,
    q: DMatrix<f64>,
    ata: DMatrix<f64>,
    g1: DMatrix<f64>,
    g2: DMatrix<f64>,
}

fn accumulate(p: &Params, x: &DMatrix<f64>, y: &DMatrix<f64>, chunk: usize) -> Normal {
    let (nh, ni1) = p.w1.shape();
    let no = p.w2.nrows();
    let p1 = nh * ni1;
    let w2 = p.w2.columns(0, nh).into_owned();
    let mut n = Normal {
        ztz: DMatrix::zeros(p1, p1),
        q: DMatrix::zeros(p1, nh + 1),
        ata: DMatrix::zeros(nh + 1, nh + 1),
        g1: DMatrix::zeros(nh, ni1),
        g2: DMatrix::zeros(no, nh + 1),
    };
    let mut start = 0;
    while start < x.nrows() {
        let rows = chunk.min(x.nrows() - start);
        let xc = x.rows(start, rows).into_owned();
        let yc = y.rows(start, rows);
        let a = p.hidden(&xc);
        let e = &a * p.w2.transpose() - yc;
        let d = a.columns(0, nh).map(|v| 1.0 - v * v);
        // Built transposed so the products below run through the blocked gemm kernel.
        let mut zt = DMatrix::zeros(p1, rows);
        for s in 0..rows {
            for h in 0..nh {
                let dh = d[(s, h)];
                for j in 0..ni1 {
                    zt[(h * ni1 + j, s)] = dh * xc[(s, j)];
                }
            }
        }
        let z = zt.transpose();
        let at = a.transpose();
        n.ztz.gemm(1.0, &zt, &z, 1.0);
        n.q.gemm(1.0, &zt, &a, 1.0);
        n.ata.gemm(1.0, &at, &a, 1.0);
        let vd = (&e * &w2).component_mul(&d);
        n.g1.gemm(1.0, &vd.transpose(), &xc, 1.0);
        n.g2.gemm(1.0, &e.transpose(), &a, 1.0);
        start += rows;
    }
    n
}

fn damping_diag(d: f64) -> f64 {
    d.max(1e-12)
}

/// Solves `(JᵀJ + μ diag(JᵀJ)) δ = −Jᵀe`; `None` if the damped system is
/// not numerically positive definite.
fn lm_step(p: &Params, n: &Normal, mu: f64) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let (nh, ni1) = p.w1.shape();
    let p1 = nh * ni1;
    let w2 = p.w2.columns(0, nh).into_owned();
    let g = w2.transpose() * &w2;

    // Marquardt scaling: damping proportional to the diagonal of JᵀJ.
    let mut b = n.ata.clone();
    for i in 0..b.nrows() {
        b[(i, i)] += mu * damping_diag(n.ata[(i, i)]);
    }
    let b_inv = b.cholesky()?.inverse();
    let qb = &n.q * &b_inv;
    let mut s = &n.ztz - &qb * n.q.transpose();
    for r in 0..p1 {
        let h = r / ni1;
        for c in 0..p1 {
            s[(r, c)] *= g[(h, c / ni1)];
        }
        s[(r, r)] += mu * damping_diag(g[(h, h)] * n.ztz[(r, r)]);
    }

    let r2 = -&n.g2;
    let y = &r2 * &b_inv;
    let wy = w2.transpose() * &y;
    let mut rhs = DVector::zeros(p1);
    for h in 0..nh {
        for j in 0..ni1 {
            let row = h * ni1 + j;
            let coupling: f64 = (0..=nh).map(|k| n.q[(row, k)] * wy[(h, k)]).sum();
            rhs[row] = -n.g1[(h, j)] - coupling;
        }
    }
    let delta1 = s.cholesky()?.solve(&rhs);
    if delta1.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let d1 = DMatrix::from_fn(nh, ni1, |h, j| delta1[h * ni1 + j]);
    let mut u = DMatrix::zeros(nh, nh + 1);
    for h in 0..nh {
        for j in 0..ni1 {
            let v = d1[(h, j)];
            for k in 0..=nh {
                u[(h, k)] += v * n.q[(h * ni1 + j, k)];
            }
        }
    }
    let d2 = (r2 - &w2 * u) * &b_inv;
    Some((d1, d2))
}

/// Fits `y ≈ net(x)` on row-major data with the LM optimiser.
pub fn fit_network(inputs: &[f64], outputs: &[f64], n_in: usize, n_out: usize, cfg: &TrainConfig) -> Result<Fit> {
    if n_in == 0 || n_out == 0 || inputs.len() % n_in != 0 {
        return Err(Error::Config("input matrix does not have whole rows".into()));
    }
    let m = inputs.len() / n_in;
    if outputs.len() != m * n_out {
        return Err(Error::dim("output rows", m, outputs.len() / n_out));
    }
    if cfg.hidden == 0 {
        return Err(Error::Config("hidden layer must have at least one unit".into()));
    }
    let split = split_indices(m, cfg.split, cfg.seed)?;

    let gather_rows = |data: &[f64], cols: usize, idx: &[usize]| -> Vec<f64> {
        idx.iter().flat_map(|&i| data[i * cols..(i + 1) * cols].iter().copied()).collect()
    };
    let in_norm = Normalization::fit(&gather_rows(inputs, n_in, &split.train), n_in);
    let out_norm = Normalization::fit(&gather_rows(outputs, n_out, &split.train), n_out);
    let x_of = |idx: &[usize]| gather(inputs, n_in, idx, &in_norm, true);
    let y_of = |idx: &[usize]| gather(outputs, n_out, idx, &out_norm, false);
    let (xt, yt) = (x_of(&split.train), y_of(&split.train));
    let (xv, yv) = (x_of(&split.val), y_of(&split.val));
    let (xs, ys) = (x_of(&split.test), y_of(&split.test));

    let nh = cfg.hidden;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let lim1 = (6.0 / (n_in + nh) as f64).sqrt();
    let lim2 = (6.0 / (nh + n_out) as f64).sqrt();
    let mut params = Params {
        w1: DMatrix::from_fn(nh, n_in + 1, |_, j| if j == n_in { 0.0 } else { rng.random_range(-lim1..=lim1) }),
        w2: DMatrix::from_fn(n_out, nh + 1, |_, h| if h == nh { 0.0 } else { rng.random_range(-lim2..=lim2) }),
    };

    let mut mu = cfg.initial_damping;
    let mut loss = params.sse(&xt, &yt);
    if !loss.is_finite() {
        return Err(Error::Numeric("initial training loss is not finite".into()));
    }
    let has_val = !split.val.is_empty();
    let mut best_val = if has_val { params.sse(&xv, &yv) } else { loss };
    let mut best = Params { w1: params.w1.clone(), w2: params.w2.clone() };
    let mut since_best = 0;
    let mut epochs = 0;
    let mut accepted = 0;
    let mut stop_reason = "iteration limit".to_string();
    let mut normal = accumulate(&params, &xt, &yt, cfg.chunk.max(1));

    while epochs < cfg.max_iterations {
        epochs += 1;
        let trial = lm_step(&params, &normal, mu).map(|(d1, d2)| Params { w1: &params.w1 + d1, w2: &params.w2 + d2 });
        let trial_loss = trial.as_ref().map_or(f64::INFINITY, |t| t.sse(&xt, &yt));
        if trial_loss.is_nan() {
            return Err(Error::Numeric(format!(
                "training loss became NaN at iteration {epochs} (damping {mu:e}, last loss {loss:e})"
            )));
        }
        if trial_loss < loss {
            let improvement = (loss - trial_loss) / loss.max(f64::MIN_POSITIVE);
            params = trial.expect("finite loss implies a step");
            loss = trial_loss;
            accepted += 1;
            mu = (mu / cfg.damping_factor).max(1e-15);
            if has_val {
                let v = params.sse(&xv, &yv);
                if v < best_val {
                    best_val = v;
                    best = Params { w1: params.w1.clone(), w2: params.w2.clone() };
                    since_best = 0;
                } else {
                    since_best += 1;
                    if since_best >= cfg.patience {
                        stop_reason = format!("validation did not improve for {} steps", cfg.patience);
                        break;
                    }
                }
            } else {
                best = Params { w1: params.w1.clone(), w2: params.w2.clone() };
            }
            if loss <= f64::EPSILON * (xt.nrows() * n_out) as f64 || improvement < 1e-14 {
                stop_reason = "converged".into();
                break;
            }
            normal = accumulate(&params, &xt, &yt, cfg.chunk.max(1));
            } else {
            mu *= cfg.damping_factor;
            if mu > cfg.max_damping {
                stop_reason = "damping limit reached".into();
                break;
            }
        }
    }

    let report = TrainReport {
        rmse_train: rmse(best.sse(&xt, &yt), xt.nrows() * n_out),
        rmse_val: rmse(best.sse(&xv, &yv), xv.nrows() * n_out),
        rmse_test: rmse(best.sse(&xs, &ys), xs.nrows() * n_out),
        epochs,
        accepted_steps: accepted,
        final_damping: mu,
        optimizer: "levenberg-marquardt".into(),
        stop_reason,
        n_train: split.train.len(),
        n_val: split.val.len(),
        n_test: split.test.len(),
    };
    Ok(Fit { network: best.to_network(), in_norm, out_norm, report })
}
