//! Nyström far fields against the separation-of-variables series for discs,
//! and geometric invariances of the intensity map.

mod common;

use std::f64::consts::{PI, TAU};

use phaseless::forward::{
    assemble_and_solve, disc_far_field, far_field, forward_intensity, incident_directions, observation_directions,
    self_convergence_error, spline_boundary, NystromConfig,
};
use phaseless::shape::{rotate_knots, AnnularPrior, Circle, Rotated, Translated};
use phaseless::Vec2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mie_error(k: f64, radius: f64, n: usize) -> f64 {
    let coeffs = common::circle_coefficients(k, radius);
    let curve = Circle { center: Vec2::zero(), radius };
    let cfg = NystromConfig::new(n, k).unwrap();
    let d = Vec2::new(-1.0, 0.0);
    let dens = assemble_and_solve(&curve, &cfg, d).unwrap();
    let obs = observation_directions::<f64>(64);
    let ff = far_field(&curve, &cfg, &dens, &obs).unwrap();
    let exact: Vec<_> = obs.iter().map(|x| common::circle_far_field(&coeffs, k, x.angle(), PI)).collect();
    let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    ff.values.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn unit_disc_matches_series_at_k_pi_and_2pi() {
    for k in [PI, 2.0 * PI] {
        let err = mie_error(k, 1.0, 100);
        assert!(err <= 1e-8, "k = {k}: relative sup error {err:e}");
    }
}

#[test]
fn runtime_disc_series_matches_frozen_coefficients() {
    for (k, radius) in [(PI, 1.0), (2.0 * PI, 1.0), (1.0, 2.0)] {
        let coeffs = common::circle_coefficients(k, radius);
        let obs = observation_directions::<f64>(37);
        let d = Vec2::new(0.6, -0.8);
        let series = disc_far_field(k, radius, d, &obs).unwrap();
        for (x, v) in obs.iter().zip(&series) {
            let exact = common::circle_far_field(&coeffs, k, x.angle(), d.angle());
            assert!((v - exact).norm() <= 1e-13 * exact.norm().max(1.0), "k={k}: {v} vs {exact}");
        }
    }
}

#[test]
fn larger_disc_and_coarse_rule() {
    assert!(mie_error(1.0, 2.0, 40) <= 1e-8);
    // Coarse rules are still accurate to several digits.
    assert!(mie_error(PI, 1.0, 12) <= 1e-3);
}

#[test]
fn disc_density_is_mirror_symmetric() {
    let cfg = NystromConfig::new(50, PI).unwrap();
    let dens = assemble_and_solve(&Circle::unit(), &cfg, Vec2::new(-1.0, 0.0)).unwrap();
    let m = dens.values.len();
    for j in 1..m {
        assert!((dens.values[j] - dens.values[m - j]).norm() < 1e-10);
    }
    let obs = observation_directions::<f64>(36);
    let ff = far_field(&Circle::unit(), &cfg, &dens, &obs).unwrap();
    // Incidence axis is the x-axis.
    for i in 1..36 {
        assert!((ff.values[i].norm() - ff.values[36 - i].norm()).abs() < 1e-10);
    }
}

#[test]
fn disc_columns_are_index_rotations() {
    let cfg = NystromConfig::new(40, PI).unwrap();
    let f = forward_intensity(&Circle::unit(), &cfg, &incident_directions(6), &observation_directions(12)).unwrap();
    for j in 0..6 {
        for i in 0..12 {
            let shifted = (i + 12 - 2 * j) % 12;
            assert!((f.get(i, j) - f.get(shifted, 0)).abs() < 1e-10);
        }
    }
}

fn random_spline(seed: u64, n: usize) -> Vec<f64> {
    AnnularPrior::new(-0.5, 0.5, n).unwrap().sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn reciprocity() {
    let xi = random_spline(3, 12);
    let curve = spline_boundary(&xi).unwrap();
    let cfg = NystromConfig::new(200, PI).unwrap();
    let d = Vec2::from_angle(0.7);
    let x = Vec2::from_angle(2.3);
    let a = far_field(&curve, &cfg, &assemble_and_solve(&curve, &cfg, d).unwrap(), &[x]).unwrap();
    let b = far_field(&curve, &cfg, &assemble_and_solve(&curve, &cfg, -x).unwrap(), &[-d]).unwrap();
    assert!((a.values[0] - b.values[0]).norm() <= 1e-8 * a.values[0].norm().max(1e-3));
}

#[test]
fn translation_and_rotation_invariance() {
    let xi = random_spline(9, 12);
    let curve = spline_boundary(&xi).unwrap();
    let cfg = NystromConfig::new(100, PI).unwrap();
    let inc = incident_directions::<f64>(4);
    let obs = observation_directions::<f64>(12);
    let base = forward_intensity(&curve, &cfg, &inc, &obs).unwrap();
    let scale = base.max_abs();

    let moved = Translated { inner: &curve, offset: Vec2::new(0.3, -0.2) };
    let f = forward_intensity(&moved, &cfg, &inc, &obs).unwrap();
    assert!(f.max_abs_diff(&base) <= 1e-8 * scale);

    let theta = TAU / 12.0;
    let rotated = Rotated { inner: &curve, angle: theta };
    let inc_r: Vec<_> = inc.iter().map(|d| d.rotate(theta)).collect();
    let obs_r: Vec<_> = obs.iter().map(|x| x.rotate(theta)).collect();
    let f = forward_intensity(&rotated, &cfg, &inc_r, &obs_r).unwrap();
    assert!(f.max_abs_diff(&base) <= 1e-8 * scale);

    // The same rotation through a cyclic knot shift; the quadrature nodes
    // move relative to the boundary, so agreement is at discretisation level.
    let shifted = spline_boundary(&rotate_knots(&xi, 1)).unwrap();
    let f = forward_intensity(&shifted, &cfg, &inc_r, &obs_r).unwrap();
    assert!(f.max_abs_diff(&base) <= 1e-6 * scale);
}

#[test]
fn self_convergence() {
    let obs = observation_directions::<f64>(12);
    let d = Vec2::new(-1.0, 0.0);
    let cfg = NystromConfig::new(100, PI).unwrap();
    let circle = self_convergence_error(&[0.0; 12], &cfg, d, &obs).unwrap();
    assert!(circle <= 1e-12, "circle {circle:e}");
    let coarse_cfg = NystromConfig::new(40, PI).unwrap();
    for seed in 0..5 {
        let xi = random_spline(100 + seed, 12);
        let fine = self_convergence_error(&xi, &cfg, d, &obs).unwrap();
        let coarse = self_convergence_error(&xi, &coarse_cfg, d, &obs).unwrap();
        assert!(fine <= 1e-6, "seed {seed}: {fine:e}");
        assert!(coarse >= fine);
    }
}

#[test]
fn rejects_bad_config() {
    assert!(NystromConfig::new(7, PI).is_err());
    assert!(NystromConfig::new(10, 0.0).is_err());
    assert!(NystromConfig::new(10, f64::NAN).is_err());
}

#[test]
fn single_precision_runs() {
    let cfg = NystromConfig::new(30, std::f32::consts::PI).unwrap();
    let f = forward_intensity(&Circle::<f32>::unit(), &cfg, &incident_directions(1), &observation_directions(8)).unwrap();
    let g = forward_intensity(&Circle::<f64>::unit(), &NystromConfig::new(30, PI).unwrap(), &incident_directions(1), &observation_directions(8)).unwrap();
    for i in 0..8 {
        assert!((f.get(i, 0) as f64 - g.get(i, 0)).abs() < 1e-3 * g.max_abs());
    }
}
