//! Star-shaped boundaries: log-radius splines, the annular prior, reference
//! scatterers and centroid computation.

pub mod curve;
pub mod scatterers;
pub mod spline;

pub use curve::{
    center_of_mass, polygon_centroid, sample_polyline, BoundaryCurve, Circle, CosineLogRadius, Kite,
    KnotGraded, LogRadial, PolarCurve, Rotated, Translated, COM_RESOLUTION,
};
pub use scatterers::{named_scatterer, NamedScatterer, ScattererCurve, ScattererOptions};
pub use spline::{SplineShape, MIN_KNOTS};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Independent uniform prior `ξ_ℓ ~ U(log R0, log R)` on every knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularPrior {
    pub log_r_min: f64,
    pub log_r_max: f64,
    pub n_spline: usize,
}

impl AnnularPrior {
    /// `log_r_min == log_r_max` is accepted and gives a point mass.
    pub fn new(log_r_min: f64, log_r_max: f64, n_spline: usize) -> Result<Self> {
        if !(log_r_min.is_finite() && log_r_max.is_finite()) || log_r_min > log_r_max {
            return Err(Error::Config(format!(
                "prior bounds must satisfy log_r_min <= log_r_max, got [{log_r_min}, {log_r_max}]"
            )));
        }
        if n_spline < MIN_KNOTS {
            return Err(Error::Config(format!("n_spline must be at least {MIN_KNOTS}, got {n_spline}")));
        }
        Ok(Self { log_r_min, log_r_max, n_spline })
    }

    pub fn width(&self) -> f64 {
        self.log_r_max - self.log_r_min
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        xi.len() == self.n_spline && xi.iter().all(|&x| x >= self.log_r_min && x <= self.log_r_max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        sample_prior(self, rng)
    }
}

pub fn sample_prior<R: Rng + ?Sized>(prior: &AnnularPrior, rng: &mut R) -> Vec<f64> {
    let (lo, w) = (prior.log_r_min, prior.width());
    (0..prior.n_spline).map(|_| lo + w * rng.random::<f64>()).collect()
}

/// Cyclic shift `out[ℓ] = ξ[(ℓ − j) mod N]`: the boundary rotates by `2πj/N`.
pub fn rotate_knots<T: Scalar>(xi: &[T], j: i64) -> Vec<T> {
    let n = xi.len();
    if n == 0 {
        return Vec::new();
    }
    let shift = j.rem_euclid(n as i64) as usize;
    (0..n).map(|l| xi[(l + n - shift) % n]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prior_containment() {
        let prior = AnnularPrior::new(-0.5, 0.5, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let xi = prior.sample(&mut rng);
            assert!(prior.contains(&xi));
        }
    }

    #[test]
    fn degenerate_prior_is_point_mass() {
        let prior = AnnularPrior::new(0.2, 0.2, 8).unwrap();
        let xi = sample_prior(&prior, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(xi.iter().all(|&x| x == 0.2));
        assert!(AnnularPrior::new(0.3, 0.2, 8).is_err());
        assert!(AnnularPrior::new(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn prior_mean_within_three_standard_errors() {
        let prior = AnnularPrior::new(-0.5, 0.5, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut sum = [0.0; 4];
        for _ in 0..draws {
            for (s, x) in sum.iter_mut().zip(prior.sample(&mut rng)) {
                *s += x;
            }
        }
        let se = (1.0 / 12.0_f64).sqrt() / (draws as f64).sqrt();
        for s in sum {
            assert!((s / draws as f64).abs() < 3.0 * se);
        }
    }

    #[test]
    fn rotation_is_cyclic() {
        let xi = [0.1, 0.2, 0.3, 0.4, 0.5];
        assert_eq!(rotate_knots(&xi, 0), xi.to_vec());
        assert_eq!(rotate_knots(&xi, 5), xi.to_vec());
        assert_eq!(rotate_knots(&xi, 1), vec![0.5, 0.1, 0.2, 0.3, 0.4]);
        assert_eq!(rotate_knots(&xi, -1), rotate_knots(&xi, 4));
    }

    #[test]
    fn knot_rotation_rotates_the_curve() {
        let n = 10;
        let prior = AnnularPrior::new(-0.5, 0.5, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0_f64;
        for _ in 0..100 {
            let xi = prior.sample(&mut rng);
            let base = SplineShape::new(xi.clone()).unwrap().as_boundary_curve();
            for j in 0..n {
                let rot = SplineShape::new(rotate_knots(&xi, j as i64)).unwrap().as_boundary_curve();
                let theta = std::f64::consts::TAU * j as f64 / n as f64;
                for t in [0.0, 0.37, 1.9, 4.4, 6.1] {
                    let want: Vec2<f64> = base.position(t - theta).rotate(theta);
                    worst = worst.max((rot.position(t) - want).norm());
                }
            }
        }
        assert!(worst <= 1e-12, "worst {worst}");
    }
}
