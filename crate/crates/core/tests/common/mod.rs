//! Helpers shared by integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use serde_json::Value;

pub fn oracles() -> Value {
    serde_json::from_str(include_str!("../fixtures/oracles.json")).unwrap()
}

/// Frozen separation-of-variables coefficients `c_m = J_m(ka)/H_m(ka)`,
/// `m = 0..=60`, for the case with wavenumber `k` and radius `a`.
pub fn circle_coefficients(k: f64, radius: f64) -> Vec<Complex64> {
    let o = oracles();
    let case = o["circle"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| (c["k"].as_f64().unwrap() - k).abs() < 1e-12 && c["radius"].as_f64().unwrap() == radius)
        .expect("no frozen circle case for this k/radius");
    case["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| Complex64::new(p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
        .collect()
}

/// Exact far field of a sound-soft disc centred at the origin for incidence
/// from angle `theta_d`: `−e^{−iπ/4} √(2/(πk)) Σ_m c_|m| e^{im(θ−θ_d)}`.
pub fn circle_far_field(coeffs: &[Complex64], k: f64, theta: f64, theta_d: f64) -> Complex64 {
    let mut s = coeffs[0];
    for (m, cm) in coeffs.iter().enumerate().skip(1) {
        s += cm * 2.0 * (m as f64 * (theta - theta_d)).cos();
    }
    let pre = -Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4) * (2.0 / (std::f64::consts::PI * k)).sqrt();
    pre * s
}

/// A small deterministic surrogate with non-trivial weights and normalisations.
pub fn toy_model(ns: usize, no: usize, nh: usize, seed: u64) -> phaseless::surrogate::SurrogateModel {
    use phaseless::surrogate::{ModelMeta, Network, Normalization, SurrogateModel};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::zeros(ns, nh, no);
    for w in net.w1.iter_mut().chain(&mut net.b1).chain(&mut net.w2).chain(&mut net.b2) {
        *w = rng.random_range(-0.5..0.5);
    }
    let norm = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| Normalization {
        mean: (0..n).map(|_| rng.random_range(-0.1..0.1)).collect(),
        std: (0..n).map(|_| rng.random_range(0.2..0.4)).collect(),
    };
    let in_norm = norm(ns, &mut rng);
    let out_norm = norm(no, &mut rng);
    SurrogateModel {
        network: net,
        in_norm,
        out_norm,
        meta: ModelMeta {
            wavenumber: std::f64::consts::PI,
            n_spline: ns,
            n_obs: no,
            n_hidden: nh,
            reference_direction: phaseless::Vec2::new(-1.0, 0.0),
            log_r_min: -0.5,
            log_r_max: 0.5,
            nystrom_n: 100,
            rmse_train: 0.0,
            rmse_val: 0.0,
            rmse_test: 0.0,
        },
    }
}

/// Observation data with all entries equal to `value` on equispaced directions.
pub fn flat_observations(n_obs: usize, n_inc: usize, value: f64) -> phaseless::bayes::ObservationData {
    use phaseless::bayes::{ObservationData, ObservationMeta, OBSERVATION_FORMAT_VERSION};
    use phaseless::forward::{incident_directions, observation_directions, IntensityMatrix};
    ObservationData {
        delta: IntensityMatrix::from_rows(
            vec![value; n_obs * n_inc],
            observation_directions(n_obs),
            incident_directions(n_inc),
        )
        .unwrap(),
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

/// Empirical distribution of grid indices.
pub fn grid_histogram(values: impl Iterator<Item = f64>, grid: &[f64]) -> Vec<f64> {
    let mut counts = vec![0.0; grid.len()];
    let mut total = 0.0;
    for v in values {
        let i = grid
            .iter()
            .position(|g| (g - v).abs() <= 1e-12 * (1.0 + g.abs()))
            .unwrap_or_else(|| panic!("value {v} is not a grid point"));
        counts[i] += 1.0;
        total += 1.0;
    }
    counts.iter_mut().for_each(|c| *c /= total);
    counts
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// The joint target of griddy Gibbs for a mock backend whose residual depends
/// only on `ξ_1`: `p(g, h) ∝ exp(loglik(ξ_1 = x_g, σ = e^{u_h}))`. Returns the
/// `ξ_1` and `σ` marginals.
pub fn mock_grid_target(
    x_grid: &[f64],
    u_grid: &[f64],
    sse_of: impl Fn(f64) -> f64,
    count: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut logp = vec![vec![0.0; u_grid.len()]; x_grid.len()];
    let mut max = f64::NEG_INFINITY;
    for (g, &x) in x_grid.iter().enumerate() {
        for (h, &u) in u_grid.iter().enumerate() {
            let s = u.exp();
            let l = -(count as f64) * u - sse_of(x) / (2.0 * s * s);
            logp[g][h] = l;
            max = max.max(l);
        }
    }
    let p: Vec<Vec<f64>> = logp.iter().map(|r| r.iter().map(|l| (l - max).exp()).collect()).collect();
    let total: f64 = p.iter().flatten().sum();
    let px = p.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let pu = (0..u_grid.len()).map(|h| p.iter().map(|r| r[h]).sum::<f64>() / total).collect();
    (px, pu)
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
