//! Radial functions of star-shaped curves by ray intersection.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::shape::BoundaryCurve;

/// Polyline resolution used to bracket each ray crossing.
pub const RAY_POLYLINE: usize = 2048;

/// `r(θ_m)` about `center` for `θ_m = 2πm/count`.
///
/// The curve is sampled at [`RAY_POLYLINE`] parameters. It counts as
/// star-shaped about `center` when the polar angle of the samples increases
/// strictly and winds exactly once; each ray then crosses exactly one
/// polyline segment, and the crossing is refined on the true curve inside
/// that parameter bracket.
pub fn radial_function<C: BoundaryCurve<f64> + ?Sized>(curve: &C, center: Vec2<f64>, count: usize) -> Result<Vec<f64>> {
    let m = RAY_POLYLINE;
    let params: Vec<f64> = (0..=m).map(|i| TAU * i as f64 / m as f64).collect();
    let pts: Vec<Vec2<f64>> = params[..m].iter().map(|&t| curve.position(t) - center).collect();

    // Unwrapped polar angles, checking monotonicity as we go.
    let mut phi = Vec::with_capacity(m + 1);
    phi.push(pts[0].angle());
    for i in 1..=m {
        let (a, b) = (pts[i - 1], pts[i % m]);
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::Numeric("curve passes through the centre".into()));
        }
        let step = a.cross(b).atan2(a.dot(b));
        if step <= 0.0 {
            return Err(Error::Numeric("curve is not star-shaped about the centre".into()));
        }
        phi.push(phi[i - 1] + step);
    }
    if ((phi[m] - phi[0]) - TAU).abs() > 1e-6 {
        return Err(Error::Numeric("curve does not wind once around the centre".into()));
    }

    let mut out = Vec::with_capacity(count);
    for q in 0..count {
        let theta = TAU * q as f64 / count as f64;
        // Lift θ into [φ_0, φ_0 + 2π).
        let lifted = phi[0] + (theta - phi[0]).rem_euclid(TAU);
        let seg = match phi.partition_point(|&p| p <= lifted) {
            0 => 0,
            s => (s - 1).min(m - 1),
        };
        let dir = Vec2::from_angle(theta);
        // Rounding in the unwrapped angles can misplace a ray that passes
        // through a vertex by one segment; take the neighbour that brackets.
        let brackets = |s: usize| {
            let (a, b) = (pts[s], pts[(s + 1) % m]);
            dir.cross(a) <= 0.0 && dir.cross(b) >= 0.0 && (dir.dot(a) > 0.0 || dir.dot(b) > 0.0)
        };
        let seg = [seg, (seg + m - 1) % m, (seg + 1) % m].into_iter().find(|&s| brackets(s)).unwrap_or(seg);
        out.push(refine(curve, center, dir, params[seg], params[seg + 1]));
    }
    Ok(out)
}

/// Illinois-modified regula falsi for `dir × (p(t) − c) = 0` on `[a, b]`.
fn refine<C: BoundaryCurve<f64> + ?Sized>(curve: &C, center: Vec2<f64>, dir: Vec2<f64>, mut a: f64, mut b: f64) -> f64 {
    let g = |t: f64| dir.cross(curve.position(t) - center);
    let (mut ga, mut gb) = (g(a), g(b));
    let mut side = 0i8;
    for _ in 0..60 {
        if ga == 0.0 {
            b = a;
            break;
        }
        if gb == 0.0 || (b - a).abs() <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        let c = if ga.signum() == gb.signum() { 0.5 * (a + b) } else { (a * gb - b * ga) / (gb - ga) };
        let gc = g(c);
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
    }
    let t = if gb.abs() < ga.abs() { b } else { a };
    dir.dot(curve.position(t) - center)
}

/// Linear interpolation of a radial function sampled on the equispaced grid.
pub fn interpolate_periodic(values: &[f64], theta: f64) -> f64 {
    let n = values.len();
    let x = theta.rem_euclid(TAU) / TAU * n as f64;
    let i = (x.floor() as usize).min(n - 1);
    let w = x - i as f64;
    values[i] * (1.0 - w) + values[(i + 1) % n] * w
}
