//! Periodic cubic spline of the log-radius at equispaced knots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Scalar};

/// Smallest admissible number of knots.
pub const MIN_KNOTS: usize = 4;

/// Log-radius `s(θ)` as the C², 2π-periodic cubic interpolant of the knot
/// values `ξ_ℓ` at `ϑ_ℓ = 2πℓ/N` (zero-based `ℓ`).
///
/// The second derivatives at the knots (the spline moments) are computed once
/// at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineShape<T> {
    knots: Vec<T>,
    moments: Vec<T>,
}

impl<T: Scalar> SplineShape<T> {
    /// Builds the periodic interpolant through `knots`.
    pub fn new(knots: Vec<T>) -> Result<Self> {
        if knots.len() < MIN_KNOTS {
            return Err(Error::Config(format!(
                "a periodic spline needs at least {MIN_KNOTS} knots, got {}",
                knots.len()
            )));
        }
        if let Some(bad) = knots.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite knot value {bad}")));
        }
        let n = knots.len();
        let h = T::two_pi() / T::from_usize_lossy(n);
        let scale = T::lit(6.0) / (h * h);
        let rhs: Vec<T> = (0..n)
            .map(|l| {
                let prev = knots[(l + n - 1) % n];
                let next = knots[(l + 1) % n];
                scale * (next - T::lit(2.0) * knots[l] + prev)
            })
            .collect();
        let moments = solve_cyclic_tridiagonal(T::one(), T::lit(4.0), T::one(), &rhs);
        Ok(Self { knots, moments })
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// The knot values `ξ`.
    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn second_derivatives(&self) -> &[T] {
        &self.moments
    }

    pub fn knot_spacing(&self) -> T {
        T::two_pi() / T::from_usize_lossy(self.len())
    }

    /// `ϑ_ℓ` for zero-based `ℓ`.
    pub fn knot_angle(&self, l: usize) -> T {
        T::two_pi() * T::from_usize_lossy(l) / T::from_usize_lossy(self.len())
    }

    /// `(s, s', s'')` at `theta` (any real; reduced modulo 2π).
    pub fn eval(&self, theta: T) -> (T, T, T) {
        let n = self.len();
        let nf = T::from_usize_lossy(n);
        let theta = wrap_angle(theta);
        let pos = theta * nf / T::two_pi();
        let l = pos.floor().to_usize().unwrap_or(0).min(n - 1);
        self.eval_segment(l, theta - self.knot_angle(l))
    }

    /// Cubic on segment `l` at offset `u ∈ [0, h]` from its left knot,
    /// written about the left knot so that `u = 0` returns `ξ_l` exactly.
    pub(crate) fn eval_segment(&self, l: usize, u: T) -> (T, T, T) {
        let n = self.len();
        let h = self.knot_spacing();
        let (y0, y1) = (self.knots[l], self.knots[(l + 1) % n]);
        let (m0, m1) = (self.moments[l], self.moments[(l + 1) % n]);
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        let d0 = (y1 - y0) / h - h * (two * m0 + m1) / six;
        let c3 = (m1 - m0) / (six * h);
        let half = m0 / two;
        let s = y0 + u * (d0 + u * (half + u * c3));
        let ds = d0 + u * (m0 + T::lit(3.0) * c3 * u);
        let dds = m0 + six * c3 * u;
        (s, ds, dds)
    }
}

/// Solves the cyclic system with constant bands
/// `sub·x[i-1] + diag·x[i] + sup·x[i+1] = rhs[i]` (indices mod n) by a
/// Sherman–Morrison correction of two tridiagonal solves.
pub(crate) fn solve_cyclic_tridiagonal<T: Scalar>(sub: T, diag: T, sup: T, rhs: &[T]) -> Vec<T> {
    let n = rhs.len();
    debug_assert!(n >= 3);
    // corners: A[0][n-1] = sub (beta), A[n-1][0] = sup (alpha)
    let alpha = sup;
    let beta = sub;
    let gamma = -diag;
    let mut d = vec![diag; n];
    d[0] = diag - gamma;
    d[n - 1] = diag - alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &d, sup, rhs);
    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &d, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (T::one() + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(&xi, &zi)| xi - fact * zi).collect()
}

fn solve_tridiagonal<T: Scalar>(sub: T, diag: &[T], sup: T, rhs: &[T]) -> Vec<T> {
    let n = rhs.len();
    let mut c = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];
    let mut denom = diag[0];
    x[0] = rhs[0] / denom;
    for i in 1..n {
        c[i] = sup / denom;
        denom = diag[i] - sub * c[i];
        x[i] = (rhs[i] - sub * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i + 1] * next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn too_few_knots() {
        assert!(matches!(
            SplineShape::new(vec![0.0_f64; 3]),
            Err(Error::Config(_))
        ));
        assert!(SplineShape::new(vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn constants_are_reproduced() {
        for c in [0.0, 0.3] {
            let s = SplineShape::<f64>::new(vec![c; 9]).unwrap();
            assert!(s.second_derivatives().iter().all(|m| m.abs() < 1e-14));
            for i in 0..50 {
                let (v, d, dd) = s.eval(i as f64 * 0.37 - 3.0);
                assert!((v - c).abs() < 1e-14 && d.abs() < 1e-13 && dd.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cyclic_solver_matches_dense_residual() {
        let rhs: Vec<f64> = (0..7).map(|i| (i as f64 * 1.3).sin()).collect();
        let x = solve_cyclic_tridiagonal(1.0, 4.0, 1.0, &rhs);
        for i in 0..7 {
            let r = x[(i + 6) % 7] + 4.0 * x[i] + x[(i + 1) % 7];
            assert!((r - rhs[i]).abs() < 1e-14);
        }
    }

    /// Independent route: the 4N coefficients of the piecewise cubic
    /// `a + b u + c u² + d u³` on each interval, fixed by interpolation and
    /// periodic C¹/C² continuity, solved densely.
    fn dense_piecewise_cubic(knots: &[f64]) -> Vec<[f64; 4]> {
        let n = knots.len();
        let h = TAU / n as f64;
        let m = 4 * n;
        let mut a = vec![vec![0.0; m]; m];
        let mut b = vec![0.0; m];
        let mut row = 0;
        for l in 0..n {
            let nx = (l + 1) % n;
            // value at left end
            a[row][4 * l] = 1.0;
            b[row] = knots[l];
            row += 1;
            // value at right end equals next knot
            a[row][4 * l] = 1.0;
            a[row][4 * l + 1] = h;
            a[row][4 * l + 2] = h * h;
            a[row][4 * l + 3] = h * h * h;
            b[row] = knots[nx];
            row += 1;
            // first derivative continuity
            a[row][4 * l + 1] = 1.0;
            a[row][4 * l + 2] = 2.0 * h;
            a[row][4 * l + 3] = 3.0 * h * h;
            a[row][4 * nx + 1] -= 1.0;
            row += 1;
            // second derivative continuity
            a[row][4 * l + 2] = 2.0;
            a[row][4 * l + 3] = 6.0 * h;
            a[row][4 * nx + 2] -= 2.0;
            row += 1;
        }
        // Gaussian elimination with partial pivoting.
        for col in 0..m {
            let p = (col..m)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, p);
            b.swap(col, p);
            for r in col + 1..m {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..m {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        let mut x = vec![0.0; m];
        for r in (0..m).rev() {
            let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        (0..n)
            .map(|l| [x[4 * l], x[4 * l + 1], x[4 * l + 2], x[4 * l + 3]])
            .collect()
    }

    #[test]
    fn unit_impulse_matches_dense_oracle() {
        let mut knots = vec![0.0; 12];
        knots[0] = 1.0;
        let s = SplineShape::new(knots.clone()).unwrap();
        assert_eq!(s.eval(0.0).0, 1.0);
        let coeffs = dense_piecewise_cubic(&knots);
        let h = TAU / 12.0;
        for (l, c) in coeffs.iter().enumerate() {
            for frac in [0.25, 0.5, 0.75] {
                let u = frac * h;
                let want = c[0] + c[1] * u + c[2] * u * u + c[3] * u * u * u;
                let dwant = c[1] + 2.0 * c[2] * u + 3.0 * c[3] * u * u;
                let (v, d, _) = s.eval(l as f64 * h + u);
                assert!((v - want).abs() < 1e-13, "segment {l}: {v} vs {want}");
                assert!((d - dwant).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let knots: Vec<f64> = (0..12).map(|i| 0.4 * ((i * 7 % 5) as f64 / 5.0 - 0.5)).collect();
        let s = SplineShape::new(knots).unwrap();
        let eps = 1e-5;
        for l in 0..12 {
            let mid = (l as f64 + 0.5) * TAU / 12.0;
            let (_, d, dd) = s.eval(mid);
            let fd = (s.eval(mid + eps).0 - s.eval(mid - eps).0) / (2.0 * eps);
            let fdd = (s.eval(mid + eps).1 - s.eval(mid - eps).1) / (2.0 * eps);
            assert!((d - fd).abs() < 1e-8, "{d} vs {fd}");
            assert!((dd - fdd).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn interpolates_and_closes_smoothly(knots in proptest::collection::vec(-0.5f64..0.5, 4..40)) {
            let s = SplineShape::new(knots.clone()).unwrap();
            for (l, &k) in knots.iter().enumerate() {
                prop_assert!((s.eval(s.knot_angle(l)).0 - k).abs() <= 1e-13);
            }
            let a = s.eval(0.0);
            let b = s.eval_segment(knots.len() - 1, s.knot_spacing());
            prop_assert!((a.0 - b.0).abs() <= 1e-10);
            prop_assert!((a.1 - b.1).abs() <= 1e-10);
            prop_assert!((a.2 - b.2).abs() <= 1e-10);
        }
    }
}
