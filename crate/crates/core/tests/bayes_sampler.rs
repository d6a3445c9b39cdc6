mod common;

use common::*;
use phaseless::bayes::*;
use phaseless::forward::{forward_intensity, incident_directions, observation_directions, NystromConfig};
use phaseless::shape::{AnnularPrior, Kite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn likelihood_matches_product_of_normal_densities() {
    let o = oracles();
    let case = &o["gaussian"];
    let v = |k: &str| case[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect::<Vec<_>>();
    let sigma = case["sigma"].as_f64().unwrap();
    let expected = case["log_likelihood"].as_f64().unwrap();
    let got = log_likelihood(&v("delta"), &v("f"), sigma).unwrap();
    assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{got} vs {expected}");
}

#[test]
fn noise_has_requested_relative_level() {
    let cfg = NystromConfig::new(40, std::f64::consts::PI).unwrap();
    let (inc, obs) = (incident_directions(100), observation_directions(100));
    let data = synthesize_observations(&Kite, Some("kite"), &cfg, &inc, &obs, 0.02, 42).unwrap();
    let f = forward_intensity(&Kite, &cfg, &inc, &obs).unwrap();
    let scale = f.max_abs();
    let r: Vec<f64> = data.values().iter().zip(f.as_slice()).map(|(d, f)| (d - f) / scale).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let std = (r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
    assert_eq!(r.len(), 10_000);
    assert!((std / 0.02 - 1.0).abs() < 0.05, "empirical relative std {std}");
    assert!((data.meta.sigma - 0.02 * scale).abs() < 1e-15);
}

fn mock_config(ns: usize, grid: usize, sweeps: usize, sigma: (f64, f64), seed: u64) -> PosteriorConfig {
    let mut c = PosteriorConfig::new(
        AnnularPrior::new(-0.5, 0.5, ns).unwrap(),
        SigmaPrior::new(sigma.0, sigma.1).unwrap(),
        seed,
    );
    c.grid_points = grid;
    c.chain_length = sweeps;
    c.burn_in = 0;
    c
}

#[test]
fn flat_conditionals_sample_the_grid_uniformly() {
    let data = flat_observations(2, 2, 1.0);
    let mut backend = MockBackend::constant(4, 2, 2, vec![1.0; 4]);
    let cfg = mock_config(4, 20, 2500, (1e-3, 1.0), 3);
    let chain = run_gibbs(&data, &cfg, &mut backend).unwrap();
    let grid = linspace(-0.5, 0.5, 20);
    let draws = chain.samples.iter().flat_map(|s| s.xi.iter().copied());
    let p = grid_histogram(draws, &grid);
    let n = 10_000.0;
    let chi2: f64 = p.iter().map(|q| (q * n - n / 20.0).powi(2) / (n / 20.0)).sum();
    // 99th percentile of χ² with 19 degrees of freedom.
    assert!(chi2 < 36.19, "χ² = {chi2}");
}

#[test]
fn gibbs_marginals_match_grid_normalised_target() {
    // Residual depends on ξ_1 only: sse(x) = Σ (δ_i − x)².
    let delta: Vec<f64> = (0..16).map(|i| 0.1 + 0.05 * ((i * 7 % 5) as f64 - 2.0)).collect();
    let mut data = flat_observations(4, 4, 0.0);
    data.delta = phaseless::forward::IntensityMatrix::from_rows(
        delta.clone(),
        data.delta.obs_directions.clone(),
        data.delta.inc_directions.clone(),
    )
    .unwrap();
    let mut backend = MockBackend::new(4, 4, 4, |x: &[f64]| vec![x[0]; 16]);
    let (grid_n, sweeps) = (25, 10_000);
    let cfg = mock_config(4, grid_n, sweeps, (0.01, 1.0), 17);
    let chain = run_gibbs(&data, &cfg, &mut backend).unwrap();

    let x_grid = linspace(-0.5, 0.5, grid_n);
    let u_grid = linspace(0.01f64.ln(), 0.0, grid_n);
    let sse = |x: f64| delta.iter().map(|d| (d - x).powi(2)).sum::<f64>();
    let (px, pu) = mock_grid_target(&x_grid, &u_grid, sse, 16);

    let kept = &chain.samples[1..];
    let ex = grid_histogram(kept.iter().map(|s| s.xi[0]), &x_grid);
    let eu = grid_histogram(kept.iter().map(|s| s.sigma.ln()), &u_grid);
    let flat = grid_histogram(kept.iter().map(|s| s.xi[2]), &x_grid);
    let tv_x = total_variation(&ex, &px);
    let tv_u = total_variation(&eu, &pu);
    let tv_flat = total_variation(&flat, &vec![1.0 / grid_n as f64; grid_n]);
    assert!(tv_x <= 0.05 && tv_u <= 0.05 && tv_flat <= 0.05, "TV ξ1 {tv_x}, σ {tv_u}, flat {tv_flat}");
}

#[test]
fn surrogate_backend_cost_accounting() {
    let model = toy_model(12, 12, 16, 8);
    let data = flat_observations(12, 12, 0.5);
    let mut backend = SurrogateBackend::new(&model, 12).unwrap();
    let cfg = mock_config(12, 10, 3, (1e-3, 2.0), 1);
    let chain = run_gibbs(&data, &cfg, &mut backend).unwrap();
    // One initial evaluation plus L evaluations per knot per sweep; σ updates are free.
    let expected = 1 + 3 * 10 * 12;
    assert_eq!(chain.counters.forward_evaluations, expected);
    assert_eq!(chain.counters.network_passes, expected * 12);
    assert_eq!(chain.counters.pde_solves, 0);

    let mut again = SurrogateBackend::new(&model, 12).unwrap();
    assert_eq!(run_gibbs(&data, &cfg, &mut again).unwrap().samples, chain.samples);
}

#[test]
fn surrogate_backend_rejects_foreign_directions() {
    let model = toy_model(12, 12, 8, 2);
    let mut data = flat_observations(12, 12, 0.5);
    data.delta.inc_directions = observation_directions(12);
    let mut backend = SurrogateBackend::new(&model, 12).unwrap();
    assert!(run_gibbs(&data, &mock_config(12, 10, 2, (1e-3, 1.0), 0), &mut backend).is_err());
}

#[test]
fn noiseless_truth_is_a_local_maximum() {
    let cfg = NystromConfig::new(40, std::f64::consts::PI).unwrap();
    let mut solver = SolverBackend::new(cfg, 12, observation_directions(12), incident_directions(12));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truth: Vec<f64> = (0..12).map(|_| rng.random_range(-0.3..0.3)).collect();
    let mut f = vec![0.0; 144];
    solver.evaluate(&truth, &mut f).unwrap();
    let mut data = flat_observations(12, 12, 0.0);
    data.delta = phaseless::forward::IntensityMatrix::from_rows(
        f,
        observation_directions(12),
        incident_directions(12),
    )
    .unwrap();
    let post = mock_config(12, 10, 2, (1e-3, 1.0), 0);
    let sigma = 0.05;
    let at_truth = log_posterior(&truth, sigma, &data, &post, &mut solver).unwrap();
    for _ in 0..20 {
        let p: Vec<f64> = (0..12).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = p.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
        let moved: Vec<f64> = truth.iter().zip(&p).map(|(t, d)| t + 0.05 * d / norm).collect();
        let lp = log_posterior(&moved, sigma, &data, &post, &mut solver).unwrap();
        assert!(at_truth >= lp, "{at_truth} < {lp}");
    }
    let outside = vec![0.7; 12];
    assert_eq!(log_posterior(&outside, sigma, &data, &post, &mut solver).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn noiseless_conditionals_peak_at_the_truth() {
    // A truth on the conditional grid: every coordinate's conditional mode is
    // the true knot value.
    let cfg = NystromConfig::new(40, std::f64::consts::PI).unwrap();
    let (obs, inc) = (observation_directions(8), incident_directions(4));
    let mut solver = SolverBackend::new(cfg, 4, obs, inc);
    let grid = linspace(-0.5, 0.5, 11);
    let truth = [grid[7], grid[4], grid[8], grid[5]];
    let mut delta = vec![0.0; 32];
    solver.evaluate(&truth, &mut delta).unwrap();
    let mut line = vec![0.0; 11 * 32];
    for c in 0..4 {
        solver.evaluate_line(&truth, c, &grid, &mut line).unwrap();
        let sse: Vec<f64> = line.chunks(32).map(|f| f.iter().zip(&delta).map(|(a, b)| (a - b).powi(2)).sum()).collect();
        let best = (0..11).min_by(|&a, &b| sse[a].total_cmp(&sse[b])).unwrap();
        assert_eq!(grid[best], truth[c], "coordinate {c}: {sse:?}");
    }
    assert_eq!(solver.counters().pde_solves, (1 + 44) * 4);
}

#[test]
fn iid_series_has_full_sample_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let s: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let d = chain_diagnostics(&s).unwrap();
    let ess = d.ess.unwrap();
    assert!((ess / 1e4 - 1.0).abs() < 0.15, "ESS {ess}");
}

fn ar1(rho: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: f64 = StandardNormal.sample(&mut rng);
    x /= (1.0 - rho * rho).sqrt();
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = rho * x + e;
            x
        })
        .collect()
}

#[test]
fn ar1_integrated_time_matches_analytic_value() {
    // τ_int = 1/2 + Σ_{t≥1} ρ^t = (1 + ρ)/(2(1 − ρ)), so 9.5 at ρ = 0.9.
    let rho = 0.9;
    let s = ar1(rho, 100_000, 4);
    let d = chain_diagnostics(&s).unwrap();
    let tau = d.tau_int.unwrap();
    let exact = (1.0 + rho) / (2.0 * (1.0 - rho));
    assert!((tau / exact - 1.0).abs() < 0.2, "τ {tau} vs {exact}");

    // Brute-force ACF summation up to the selected window.
    let w = d.window.unwrap();
    let n = s.len();
    let mean = s.iter().sum::<f64>() / n as f64;
    let gamma = |t: usize| (0..n - t).map(|i| (s[i] - mean) * (s[i + t] - mean)).sum::<f64>() / (n - t) as f64;
    let g0 = gamma(0);
    let brute = 0.5 + (1..=w).map(|t| gamma(t) / g0).sum::<f64>();
    // The estimator adds an O(W/N) bias correction on top of the raw sum.
    assert!((tau / brute - 1.0).abs() < 2.0 * (2 * w + 1) as f64 / n as f64 + 1e-12, "{tau} vs {brute}");
    assert!((d.acf[1] - rho).abs() < 0.01);
}

#[test]
fn constant_series_has_undefined_ess() {
    let d = chain_diagnostics(&vec![3.25; 1000]).unwrap();
    assert!(d.ess.is_none());
}
