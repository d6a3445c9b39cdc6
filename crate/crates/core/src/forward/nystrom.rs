//! Kress's Nyström rule with logarithmic splitting of the kernels
//! (Kussmaul–Martensen), at `2N` nodes `t_j = πj/N` with `N = n + 1`.
//!
//! The parametrised equation is
//! `ψ(t) − ∫ [L(t,τ) + ik M(t,τ)] ψ(τ) dτ = −2 u^inc(z(t))`, with each kernel
//! split as `K = K₁ ln(4 sin²((t−τ)/2)) + K₂`.

use num_complex::Complex;

use super::linalg::ComplexLu;
use super::{DensitySolution, FarField, IntensityMatrix, NystromConfig};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scalar::Scalar;
use crate::shape::BoundaryCurve;
use crate::specfun::bessel_jy01;

/// Systems whose estimated 1-norm condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
struct Nodes<T> {
    t: Vec<T>,
    pos: Vec<Vec2<T>>,
    d: Vec<Vec2<T>>,
    speed: Vec<T>,
}

impl<T: Scalar> Nodes<T> {
    fn sample<C: BoundaryCurve<T> + ?Sized>(curve: &C, count: usize) -> Result<Self> {
        let mut nodes = Self {
            t: Vec::with_capacity(count),
            pos: Vec::with_capacity(count),
            d: Vec::with_capacity(count),
            speed: Vec::with_capacity(count),
        };
        let h = T::two_pi() / T::from_usize_lossy(count);
        for j in 0..count {
            let t = h * T::from_usize_lossy(j);
            let (p, d, _) = curve.eval(t);
            let speed = d.norm();
            if !(speed > T::zero() && speed.is_finite() && p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Numeric(format!("boundary curve is not regular at t = {t}")));
            }
            nodes.t.push(t);
            nodes.pos.push(p);
            nodes.d.push(d);
            nodes.speed.push(speed);
        }
        Ok(nodes)
    }
}

fn c<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Log-quadrature weights `R_m`, `m = 0..2N`, for node offset `m`.
fn log_weights<T: Scalar>(half: usize) -> Vec<T> {
    let nf = T::from_usize_lossy(half);
    let pi = T::PI();
    (0..2 * half)
        .map(|m| {
            let mut s = T::zero();
            for p in 1..half {
                let arg = T::from_usize_lossy((p * m) % (2 * half)) * pi / nf;
                s += arg.cos() / T::from_usize_lossy(p);
            }
            let sign = if m % 2 == 0 { T::one() } else { -T::one() };
            -T::two_pi() / nf * s - pi / (nf * nf) * sign
        })
        .collect()
}

/// An assembled and factorised Nyström system for one boundary curve and
/// wavenumber; solves for any number of incident directions.
#[derive(Debug, Clone)]
pub struct NystromOperator<T> {
    cfg: NystromConfig<T>,
    nodes: Nodes<T>,
    lu: ComplexLu<T>,
    condition: T,
}

impl<T: Scalar> NystromOperator<T> {
    pub fn new<C: BoundaryCurve<T> + ?Sized>(curve: &C, cfg: &NystromConfig<T>) -> Result<Self> {
        let cfg = NystromConfig::new(cfg.n, cfg.k)?;
        let size = cfg.num_nodes();
        let half = size / 2;
        let nodes = Nodes::sample(curve, size)?;
        let matrix = assemble(curve, &cfg, &nodes, half);
        let lu = ComplexLu::new(size, matrix)?;
        let condition = lu.condition_estimate();
        if !(condition <= T::lit(MAX_CONDITION)) {
            return Err(Error::Numeric(format!(
                "Nyström system is ill-conditioned (condition estimate {condition})"
            )));
        }
        Ok(Self { cfg, nodes, lu, condition })
    }

    pub fn config(&self) -> &NystromConfig<T> {
        &self.cfg
    }

    /// Estimated 1-norm condition number of the system matrix.
    pub fn condition(&self) -> T {
        self.condition
    }

    /// Density for the plane wave `e^{ik x·d̂}`.
    pub fn solve(&self, incident: Vec2<T>) -> DensitySolution<T> {
        let k = self.cfg.k;
        let two = T::lit(2.0);
        let rhs: Vec<Complex<T>> = self
            .nodes
            .pos
            .iter()
            .map(|p| {
                let (s, co) = (k * p.dot(incident)).sin_cos();
                c(-two * co, -two * s)
            })
            .collect();
        DensitySolution { nodes: self.nodes.t.clone(), values: self.lu.solve(&rhs) }
    }

    /// `u∞(x̂) = e^{−iπ/4}/√(8πk) ∫ (k ν·x̂ + k) e^{−ik x̂·y} φ(y) ds(y)` by the
    /// trapezoidal rule at the nodes.
    pub fn far_field(&self, density: &DensitySolution<T>, obs_dirs: &[Vec2<T>]) -> Result<FarField<T>> {
        eval_far_field(self.cfg.k, &self.nodes, density, obs_dirs)
    }

    pub fn intensities(&self, inc_dirs: &[Vec2<T>], obs_dirs: &[Vec2<T>]) -> Result<IntensityMatrix<T>> {
        let columns = inc_dirs
            .iter()
            .map(|&d| Ok(self.far_field(&self.solve(d), obs_dirs)?.intensities()))
            .collect::<Result<Vec<_>>>()?;
        IntensityMatrix::from_columns(&columns, obs_dirs.to_vec(), inc_dirs.to_vec())
    }
}

fn assemble<T: Scalar, C: BoundaryCurve<T> + ?Sized>(
    curve: &C,
    cfg: &NystromConfig<T>,
    nodes: &Nodes<T>,
    half: usize,
) -> Vec<Complex<T>> {
    let size = 2 * half;
    let k = cfg.k;
    let pi = T::PI();
    let two = T::lit(2.0);
    let inv_two_pi = T::one() / T::two_pi();
    let trap = pi / T::from_usize_lossy(half);
    let weights = log_weights::<T>(half);
    // ln(4 sin²(mπ/2N)) for offsets m ≥ 1.
    let logs: Vec<T> = (0..size)
        .map(|m| {
            if m == 0 {
                T::zero()
            } else {
                let s = (T::from_usize_lossy(m) * pi / T::from_usize_lossy(size)).sin();
                (T::lit(4.0) * s * s).ln()
            }
        })
        .collect();

    let mut a = vec![c(T::zero(), T::zero()); size * size];
    // Kernel pieces (K₁, K₂) at (i, j), where j is the integration node.
    let mut put = |i: usize, j: usize, k1: Complex<T>, k2: Complex<T>| {
        let m = if i >= j { i - j } else { j - i };
        let delta = if i == j { T::one() } else { T::zero() };
        a[i * size + j] = c(delta, T::zero()) - k1 * weights[m] - k2 * trap;
    };

    let euler = T::euler_gamma();
    for i in 0..size {
        let (_, d, dd) = curve.eval(nodes.t[i]);
        let speed = nodes.speed[i];
        let l2 = d.cross(dd) * inv_two_pi / (speed * speed);
        let m1 = -speed * inv_two_pi;
        let m2 = c(
            (-euler / pi - (k * speed / two).ln() / pi) * speed,
            speed / two,
        );
        let k1 = c(T::zero(), k * m1);
        let k2 = c(l2, T::zero()) + c(T::zero(), k) * m2;
        put(i, i, k1, k2);

        for j in i + 1..size {
            let delta = nodes.pos[j] - nodes.pos[i];
            let r = delta.norm();
            let jy = bessel_jy01(k * r);
            let ln4 = logs[j - i];
            // (i, j): integration node j; bracket uses z'(τ) = d_j and z(τ) − z(t).
            for (row, col, dvec, sgn) in [(i, j, nodes.d[j], T::one()), (j, i, nodes.d[i], -T::one())] {
                let bracket = sgn * delta.cross(dvec) / r;
                let sp = nodes.speed[col];
                let l = c(-jy.y1, jy.j1) * (k / two * bracket);
                let l1 = -k * inv_two_pi * bracket * jy.j1;
                let m = c(-jy.y0, jy.j0) * (sp / two);
                let m1 = -inv_two_pi * jy.j0 * sp;
                let l2 = l - c(l1 * ln4, T::zero());
                let m2 = m - c(m1 * ln4, T::zero());
                let k1 = c(l1, k * m1);
                let k2 = l2 + c(T::zero(), k) * m2;
                put(row, col, k1, k2);
            }
        }
    }
    a
}

/// Density for one incident direction.
pub fn assemble_and_solve<T: Scalar, C: BoundaryCurve<T> + ?Sized>(
    curve: &C,
    cfg: &NystromConfig<T>,
    incident: Vec2<T>,
) -> Result<DensitySolution<T>> {
    Ok(NystromOperator::new(curve, cfg)?.solve(incident))
}

/// Far field of a density previously computed for the same curve and `cfg`.
pub fn far_field<T: Scalar, C: BoundaryCurve<T> + ?Sized>(
    curve: &C,
    cfg: &NystromConfig<T>,
    density: &DensitySolution<T>,
    obs_dirs: &[Vec2<T>],
) -> Result<FarField<T>> {
    let cfg = NystromConfig::new(cfg.n, cfg.k)?;
    let nodes = Nodes::sample(curve, cfg.num_nodes())?;
    eval_far_field(cfg.k, &nodes, density, obs_dirs)
}

/// `u∞(x̂) = e^{−iπ/4}/√(8πk) ∫ (k ν·x̂ + k) e^{−ik x̂·y} φ(y) ds(y)` by the
/// trapezoidal rule at the nodes.
fn eval_far_field<T: Scalar>(
    k: T,
    nodes: &Nodes<T>,
    density: &DensitySolution<T>,
    obs_dirs: &[Vec2<T>],
) -> Result<FarField<T>> {
    let size = nodes.t.len();
    if density.values.len() != size {
        return Err(Error::dim("density length", size, density.values.len()));
    }
    let half = T::from_usize_lossy(size / 2);
    let amp = T::PI() / half / (T::lit(8.0) * T::PI() * k).sqrt();
    let (s4, c4) = (-T::FRAC_PI_4()).sin_cos();
    let prefactor = c(c4, s4) * amp;
    let values = obs_dirs
        .iter()
        .map(|&xh| {
            let mut acc = c(T::zero(), T::zero());
            for j in 0..size {
                let d = nodes.d[j];
                // ν|z'| = (z₂', −z₁').
                let weight = k * (d.y * xh.x - d.x * xh.y + nodes.speed[j]);
                let (s, co) = (-k * xh.dot(nodes.pos[j])).sin_cos();
                acc += c(co, s) * density.values[j] * weight;
            }
            acc * prefactor
        })
        .collect();
    Ok(FarField { directions: obs_dirs.to_vec(), values })
}
