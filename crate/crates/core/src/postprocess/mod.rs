//! Translation alignment of posterior shape samples and their summaries.
//!
//! Phaseless data cannot see translations, so every sample is moved to put
//! its centre of mass at a common target before radii are compared.

mod optimize;
mod radial;
mod report;

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::shape::{center_of_mass, BoundaryCurve, SplineShape, Translated, COM_RESOLUTION};

pub use optimize::nelder_mead_2d;
pub use radial::{interpolate_periodic, radial_function, RAY_POLYLINE};
pub use report::{save_histogram, save_summary, summary_svg, write_summary_svg};

/// Angles per aligned radial function.
pub const M_EVAL: usize = 360;
pub const NELDER_MEAD_ITERATIONS: usize = 200;

/// Radial function of one sample after moving its centre of mass to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSample {
    /// `r(θ_m)` about the target at `θ_m = 2πm/M`.
    pub radius: Vec<f64>,
    pub com_original: Vec2<f64>,
    pub translation: Vec2<f64>,
}

/// Aligns an arbitrary boundary: translates by `target − c` and reads the
/// radii about `target` on `m_eval` equispaced angles. Fails when the curve
/// is not star-shaped about its centre of mass.
pub fn align_curve<C: BoundaryCurve<f64> + ?Sized>(curve: &C, target: Vec2<f64>, m_eval: usize) -> Result<AlignedSample> {
    let c = center_of_mass(curve, COM_RESOLUTION)?;
    // Translating the curve to the target and reading radii about the target
    // is the same as reading radii about c on the original curve.
    let radius = radial_function(curve, c, m_eval)?;
    Ok(AlignedSample { radius, com_original: c, translation: target - c })
}

/// Aligns the shape with log-radius knots `xi`.
pub fn align_sample(xi: &[f64], target: Vec2<f64>, m_eval: usize) -> Result<AlignedSample> {
    let curve = SplineShape::new(xi.to_vec())?.as_boundary_curve();
    align_curve(&curve, target, m_eval)
}

/// Aligned samples plus the count of those that could not be aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub samples: Vec<AlignedSample>,
    pub excluded: usize,
}

/// Aligns many knot vectors in parallel, dropping (and counting) shapes that
/// are not star-shaped about their centre of mass. Order is preserved.
pub fn align_samples(xis: &[Vec<f64>], target: Vec2<f64>, m_eval: usize) -> Alignment {
    let aligned: Vec<Option<AlignedSample>> =
        xis.par_iter().map(|xi| align_sample(xi, target, m_eval).ok()).collect();
    let excluded = aligned.iter().filter(|a| a.is_none()).count();
    Alignment { samples: aligned.into_iter().flatten().collect(), excluded }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub angles: Vec<f64>,
    pub mean_radius: Vec<f64>,
    /// Pointwise sample standard deviation.
    pub std_radius: Vec<f64>,
    pub band_low: Vec<f64>,
    pub band_high: Vec<f64>,
    pub n_samples: usize,
    /// Truth radii about the target after the optimal translation.
    pub true_radius: Option<Vec<f64>>,
    pub t_opt: Option<Vec2<f64>>,
    pub mean_shape_l2: Option<f64>,
    pub per_sample_l2: Vec<f64>,
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Pointwise mean, standard deviation and `±2σ` band over aligned samples.
///
/// With a truth curve, the translation `t` minimising the radial L2 distance
/// between the mean and the truth moved by `t` (radii about `target`) is
/// found by Nelder–Mead from `t = 0`, and relative errors are reported
/// against that translated truth.
pub fn summarize<C: BoundaryCurve<f64> + ?Sized>(
    samples: &[AlignedSample],
    truth: Option<&C>,
    target: Vec2<f64>,
) -> Result<ShapeSummary> {
    if samples.len() < 2 {
        return Err(Error::Config(format!("need at least two aligned samples, got {}", samples.len())));
    }
    let m = samples[0].radius.len();
    if let Some(s) = samples.iter().find(|s| s.radius.len() != m) {
        return Err(Error::dim("aligned radii", m, s.radius.len()));
    }
    let n = samples.len() as f64;
    let mut mean = vec![0.0; m];
    for s in samples {
        mean.iter_mut().zip(&s.radius).for_each(|(a, r)| *a += r);
    }
    mean.iter_mut().for_each(|a| *a /= n);
    let mut var = vec![0.0; m];
    for s in samples {
        var.iter_mut().zip(s.radius.iter().zip(&mean)).for_each(|(v, (r, mu))| *v += (r - mu) * (r - mu));
    }
    let std: Vec<f64> = var.iter().map(|v| (v / (n - 1.0)).sqrt()).collect();
    let band_low = mean.iter().zip(&std).map(|(a, s)| a - 2.0 * s).collect();
    let band_high = mean.iter().zip(&std).map(|(a, s)| a + 2.0 * s).collect();
    let angles = (0..m).map(|q| TAU * q as f64 / m as f64).collect();

    let mut summary = ShapeSummary {
        angles,
        mean_radius: mean,
        std_radius: std,
        band_low,
        band_high,
        n_samples: samples.len(),
        true_radius: None,
        t_opt: None,
        mean_shape_l2: None,
        per_sample_l2: vec![],
    };
    if let Some(truth) = truth {
        let radii_at = |t: Vec2<f64>| radial_function(&Translated { inner: truth, offset: t }, target, m);
        let mean = &summary.mean_radius;
        let objective = |t: Vec2<f64>| radii_at(t).map(|r| relative_l2(mean, &r)).unwrap_or(f64::INFINITY);
        let diameter = 2.0 * mean.iter().copied().fold(0.0, f64::max);
        let (t_opt, _) = nelder_mead_2d(objective, Vec2::zero(), 0.05 * diameter, NELDER_MEAD_ITERATIONS, 1e-10);
        let r_true = radii_at(t_opt)?;
        summary.mean_shape_l2 = Some(relative_l2(&summary.mean_radius, &r_true));
        summary.per_sample_l2 = samples.iter().map(|s| relative_l2(&s.radius, &r_true)).collect();
        summary.t_opt = Some(t_opt);
        summary.true_radius = Some(r_true);
    }
    Ok(summary)
}

/// Counts with explicit bin edges (`edges.len() = counts.len() + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Histogram of `r(θ)` over the samples (linear interpolation between grid
/// angles), on `bins` equal bins spanning the observed range.
pub fn radius_histogram(samples: &[AlignedSample], theta: f64, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if !(0.0..TAU).contains(&theta) {
        return Err(Error::Domain(format!("angle must lie in [0, 2π), got {theta}")));
    }
    let values: Vec<f64> = samples.iter().map(|s| interpolate_periodic(&s.radius, theta)).collect();
    let (mut lo, mut hi) = values.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    if values.is_empty() {
        (lo, hi) = (0.0, 1.0);
    } else if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        let pad = 1e-6 * hi.abs().max(1.0);
        (lo, hi) = (lo - pad, hi + pad);
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|b| if b == bins { hi } else { lo + width * b as f64 }).collect();
    let mut counts = vec![0; bins];
    for v in values {
        let b = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{named_scatterer, Circle, ScattererOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn unit_circle_radii() {
        let a = align_sample(&[0.0; 12], Vec2::zero(), M_EVAL).unwrap();
        assert_eq!(a.radius.len(), M_EVAL);
        assert!(a.radius.iter().all(|r| (r - 1.0).abs() < 1e-8));
    }

    #[test]
    fn off_centre_circle_is_recentred() {
        let c = Circle { center: Vec2::new(0.35, -0.2), radius: 1.0 };
        let a = align_curve(&c, Vec2::zero(), M_EVAL).unwrap();
        assert!(a.radius.iter().all(|r| (r - 1.0).abs() < 1e-6));
        assert!((a.translation + c.center).norm() < 1e-10);
    }

    #[test]
    fn aligning_twice_is_idempotent() {
        let xi: Vec<f64> = (0..12).map(|i| 0.3 * (0.9 * i as f64).sin()).collect();
        let target = Vec2::new(0.1, 0.2);
        let a = align_sample(&xi, target, M_EVAL).unwrap();
        let curve = SplineShape::new(xi).unwrap().as_boundary_curve();
        let moved = Translated { inner: curve, offset: a.translation };
        let b = align_curve(&moved, target, M_EVAL).unwrap();
        assert!(b.translation.norm() < 1e-10);
        let diff = a.radius.iter().zip(&b.radius).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "{diff}");
    }

    #[test]
    fn identical_samples_collapse_band() {
        let a = align_sample(&[0.1; 12], Vec2::zero(), 90).unwrap();
        let s = summarize::<Circle<f64>>(&[a.clone(), a.clone(), a], None, Vec2::zero()).unwrap();
        assert!(s.std_radius.iter().all(|v| *v == 0.0));
        assert_eq!(s.band_low, s.mean_radius);
        assert_eq!(s.band_high, s.mean_radius);
    }

    #[test]
    fn truth_equal_to_samples_gives_zero_error() {
        let tref = named_scatterer("trefoil", &ScattererOptions::default()).unwrap();
        let a = align_curve(&tref, Vec2::zero(), M_EVAL).unwrap();
        let s = summarize(&[a.clone(), a], Some(&tref), Vec2::zero()).unwrap();
        assert!(s.mean_shape_l2.unwrap() < 1e-6, "{:?}", s.mean_shape_l2);
        // The truth must move by the same translation the samples received.
        let t = s.t_opt.unwrap();
        let expected = -center_of_mass(&tref, COM_RESOLUTION).unwrap();
        assert!((t - expected).norm() < 1e-5);
    }

    #[test]
    fn summary_needs_two_samples() {
        let a = align_sample(&[0.0; 4], Vec2::zero(), 20).unwrap();
        assert!(summarize::<Circle<f64>>(&[a], None, Vec2::zero()).is_err());
    }

    #[test]
    fn band_coverage_on_gaussian_radii() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(1.0, 0.05).unwrap();
        let samples: Vec<AlignedSample> = (0..10_000)
            .map(|_| AlignedSample {
                radius: (0..8).map(|_| normal.sample(&mut rng)).collect(),
                com_original: Vec2::zero(),
                translation: Vec2::zero(),
            })
            .collect();
        let s = summarize::<Circle<f64>>(&samples, None, Vec2::zero()).unwrap();
        for q in 0..8 {
            let inside = samples
                .iter()
                .filter(|a| a.radius[q] >= s.band_low[q] && a.radius[q] <= s.band_high[q])
                .count() as f64
                / 1e4;
            assert!((inside - 0.9545).abs() < 0.02, "coverage {inside}");
        }
    }

    #[test]
    fn histogram_of_identical_samples_has_one_bin() {
        let a = align_sample(&[0.0; 4], Vec2::zero(), 36).unwrap();
        let h = radius_histogram(&vec![a; 7], 2.93, 10).unwrap();
        assert_eq!(h.counts.iter().filter(|c| **c > 0).count(), 1);
        assert_eq!(h.total(), 7);
        assert_eq!(h.edges.len(), 11);
    }

    #[test]
    fn histogram_of_uniform_radii_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<AlignedSample> = (0..10_000)
            .map(|_| {
                let r = rng.random_range(0.5..1.5);
                AlignedSample { radius: vec![r; 4], com_original: Vec2::zero(), translation: Vec2::zero() }
            })
            .collect();
        let h = radius_histogram(&samples, 1.0, 20).unwrap();
        assert_eq!(h.total(), 10_000);
        let e = 500.0;
        let chi2: f64 = h.counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 99th percentile of χ² with 19 degrees of freedom.
        assert!(chi2 < 36.19, "χ² = {chi2}");
        assert!(radius_histogram(&samples, TAU, 20).is_err());
    }

    #[test]
    fn exclusions_are_counted() {
        let good = vec![0.0; 12];
        // Two long lobes 60° apart: the centroid falls in the notch between them.
        let bad: Vec<f64> = (0..12).map(|i| if i == 0 || i == 2 { 2.0 } else { -2.0 }).collect();
        let al = align_samples(&[good.clone(), bad, good], Vec2::zero(), 36);
        assert_eq!(al.samples.len() + al.excluded, 3);
        assert_eq!(al.samples.len(), 2);
        assert_eq!(al.excluded, 1);
    }
}
