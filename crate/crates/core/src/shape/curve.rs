//! Closed 2π-periodic boundary curves.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scalar::Scalar;
use crate::shape::spline::SplineShape;

/// A regular, closed, 2π-periodic parametrised curve, traversed
/// counter-clockwise. This is the only view of geometry the forward solver has.
pub trait BoundaryCurve<T: Scalar>: Send + Sync {
    fn position(&self, t: T) -> Vec2<T>;
    fn d_position(&self, t: T) -> Vec2<T>;
    fn dd_position(&self, t: T) -> Vec2<T>;

    /// Position with first and second derivatives. Implementations sharing
    /// work between the three override this.
    fn eval(&self, t: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        (self.position(t), self.d_position(t), self.dd_position(t))
    }
}

impl<T: Scalar, C: BoundaryCurve<T> + ?Sized> BoundaryCurve<T> for &C {
    fn position(&self, t: T) -> Vec2<T> {
        (**self).position(t)
    }
    fn d_position(&self, t: T) -> Vec2<T> {
        (**self).d_position(t)
    }
    fn dd_position(&self, t: T) -> Vec2<T> {
        (**self).dd_position(t)
    }
    fn eval(&self, t: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        (**self).eval(t)
    }
}

impl<T: Scalar, C: BoundaryCurve<T> + ?Sized> BoundaryCurve<T> for Box<C> {
    fn position(&self, t: T) -> Vec2<T> {
        (**self).position(t)
    }
    fn d_position(&self, t: T) -> Vec2<T> {
        (**self).d_position(t)
    }
    fn dd_position(&self, t: T) -> Vec2<T> {
        (**self).dd_position(t)
    }
    fn eval(&self, t: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        (**self).eval(t)
    }
}

/// A log-radius function `s(θ)` with two derivatives.
pub trait LogRadial<T: Scalar>: Send + Sync {
    fn log_radius(&self, theta: T) -> (T, T, T);
}

impl<T: Scalar> LogRadial<T> for SplineShape<T> {
    fn log_radius(&self, theta: T) -> (T, T, T) {
        self.eval(theta)
    }
}

/// `s(θ) = amplitude · cos(lobes · θ)`; with three lobes this is the trefoil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineLogRadius<T> {
    pub amplitude: T,
    pub lobes: u32,
}

impl<T: Scalar> LogRadial<T> for CosineLogRadius<T> {
    fn log_radius(&self, theta: T) -> (T, T, T) {
        let m = T::lit(self.lobes as f64);
        let (s, c) = (m * theta).sin_cos();
        (
            self.amplitude * c,
            -self.amplitude * m * s,
            -self.amplitude * m * m * c,
        )
    }
}

/// Star-shaped curve `χ(θ) = e^{s(θ)} (cos θ, sin θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCurve<R> {
    pub radial: R,
}

impl<R> PolarCurve<R> {
    pub fn new(radial: R) -> Self {
        Self { radial }
    }
}

impl<T: Scalar, R: LogRadial<T>> BoundaryCurve<T> for PolarCurve<R> {
    fn position(&self, t: T) -> Vec2<T> {
        self.eval(t).0
    }
    fn d_position(&self, t: T) -> Vec2<T> {
        self.eval(t).1
    }
    fn dd_position(&self, t: T) -> Vec2<T> {
        self.eval(t).2
    }
    fn eval(&self, t: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        let (s, ds, dds) = self.radial.log_radius(t);
        let r = s.exp();
        let radial = Vec2::from_angle(t);
        let tangential = Vec2::new(-radial.y, radial.x);
        let p = radial * r;
        let dp = (radial * ds + tangential) * r;
        let ddp = (radial * (dds + ds * ds - T::one()) + tangential * (T::lit(2.0) * ds)) * r;
        (p, dp, ddp)
    }
}

impl<T: Scalar> SplineShape<T> {
    /// The boundary `e^{s(θ)} x̂(θ)` described by this spline.
    pub fn as_boundary_curve(&self) -> PolarCurve<SplineShape<T>> {
        PolarCurve::new(self.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle<T> {
    pub center: Vec2<T>,
    pub radius: T,
}

impl<T: Scalar> Circle<T> {
    pub fn unit() -> Self {
        Self {
            center: Vec2::zero(),
            radius: T::one(),
        }
    }
}

impl<T: Scalar> BoundaryCurve<T> for Circle<T> {
    fn position(&self, t: T) -> Vec2<T> {
        self.center + Vec2::from_angle(t) * self.radius
    }
    fn d_position(&self, t: T) -> Vec2<T> {
        let u = Vec2::from_angle(t);
        Vec2::new(-u.y, u.x) * self.radius
    }
    fn dd_position(&self, t: T) -> Vec2<T> {
        -Vec2::from_angle(t) * self.radius
    }
}

/// The kite `(cos t + 0.65 cos 2t − 0.65, 1.5 sin t)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Kite;

impl<T: Scalar> BoundaryCurve<T> for Kite {
    fn position(&self, t: T) -> Vec2<T> {
        let a = T::lit(0.65);
        Vec2::new(t.cos() + a * (t + t).cos() - a, T::lit(1.5) * t.sin())
    }
    fn d_position(&self, t: T) -> Vec2<T> {
        let a = T::lit(0.65);
        Vec2::new(-t.sin() - T::lit(2.0) * a * (t + t).sin(), T::lit(1.5) * t.cos())
    }
    fn dd_position(&self, t: T) -> Vec2<T> {
        let a = T::lit(0.65);
        Vec2::new(-t.cos() - T::lit(4.0) * a * (t + t).cos(), -T::lit(1.5) * t.sin())
    }
}

/// A curve shifted by a fixed offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Translated<C, T> {
    pub inner: C,
    pub offset: Vec2<T>,
}

impl<T: Scalar, C: BoundaryCurve<T>> BoundaryCurve<T> for Translated<C, T> {
    fn position(&self, t: T) -> Vec2<T> {
        self.inner.position(t) + self.offset
    }
    fn d_position(&self, t: T) -> Vec2<T> {
        self.inner.d_position(t)
    }
    fn dd_position(&self, t: T) -> Vec2<T> {
        self.inner.dd_position(t)
    }
    fn eval(&self, t: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        let (p, d, dd) = self.inner.eval(t);
        (p + self.offset, d, dd)
    }
}

/// A curve rotated counter-clockwise about the origin (same parametrisation).
#[derive(Debug, Clone, PartialEq)]
pub struct Rotated<C, T> {
    pub inner: C,
    pub angle: T,
}

impl<T: Scalar, C: BoundaryCurve<T>> BoundaryCurve<T> for Rotated<C, T> {
    fn position(&self, t: T) -> Vec2<T> {
        self.inner.position(t).rotate(self.angle)
    }
    fn d_position(&self, t: T) -> Vec2<T> {
        self.inner.d_position(t).rotate(self.angle)
    }
    fn dd_position(&self, t: T) -> Vec2<T> {
        self.inner.dd_position(t).rotate(self.angle)
    }
    fn eval(&self, t: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        let (p, d, dd) = self.inner.eval(t);
        (
            p.rotate(self.angle),
            d.rotate(self.angle),
            dd.rotate(self.angle),
        )
    }
}

/// The same curve traversed with parameter `t = s − a sin(m s)/m`.
///
/// With `m` equal to the knot count of a spline boundary, the traversal slows
/// to speed factor `1 − a` at every knot and `w''` vanishes there, so jumps in
/// the third derivative of the composite curve shrink by `(1 − a)³`. The
/// geometry is unchanged; quadrature on the new parameter converges faster.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotGraded<C, T> {
    pub inner: C,
    pub knots: usize,
    pub strength: T,
}

impl<C, T: Scalar> KnotGraded<C, T> {
    fn warp(&self, s: T) -> (T, T, T) {
        let m = T::from_usize_lossy(self.knots);
        let (sn, cs) = (m * s).sin_cos();
        let a = self.strength;
        (s - a * sn / m, T::one() - a * cs, a * m * sn)
    }
}

impl<T: Scalar, C: BoundaryCurve<T>> BoundaryCurve<T> for KnotGraded<C, T> {
    fn position(&self, s: T) -> Vec2<T> {
        self.inner.position(self.warp(s).0)
    }
    fn d_position(&self, s: T) -> Vec2<T> {
        self.eval(s).1
    }
    fn dd_position(&self, s: T) -> Vec2<T> {
        self.eval(s).2
    }
    fn eval(&self, s: T) -> (Vec2<T>, Vec2<T>, Vec2<T>) {
        let (t, w1, w2) = self.warp(s);
        let (p, d, dd) = self.inner.eval(t);
        (p, d * w1, dd * (w1 * w1) + d * w2)
    }
}

/// `m` points at the equispaced parameters `2πi/m`.
pub fn sample_polyline<T: Scalar, C: BoundaryCurve<T> + ?Sized>(curve: &C, m: usize) -> Vec<Vec2<T>> {
    let mf = T::from_usize_lossy(m);
    (0..m)
        .map(|i| curve.position(T::two_pi() * T::from_usize_lossy(i) / mf))
        .collect()
}

/// Default polyline resolution for [`center_of_mass`].
pub const COM_RESOLUTION: usize = 1024;

/// Centroid of the region enclosed by a closed polygon (vertices in order,
/// implicitly closed), from the signed-area shoelace formulas.
pub fn polygon_centroid<T: Scalar>(points: &[Vec2<T>]) -> Result<Vec2<T>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Numeric(format!("polygon with {n} vertices has no area")));
    }
    // Shift to the first vertex to limit cancellation for far-off polygons.
    let o = points[0];
    let mut area2 = T::zero();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for i in 0..n {
        let p = points[i] - o;
        let q = points[(i + 1) % n] - o;
        let cr = p.cross(q);
        area2 += cr;
        cx += (p.x + q.x) * cr;
        cy += (p.y + q.y) * cr;
    }
    let scale = points
        .iter()
        .map(|p| (*p - o).norm())
        .fold(T::zero(), T::max);
    if area2.abs() <= T::epsilon() * T::lit(16.0) * scale * scale {
        return Err(Error::Numeric("degenerate polygon: near-zero signed area".into()));
    }
    let f = T::one() / (T::lit(3.0) * area2);
    Ok(o + Vec2::new(cx * f, cy * f))
}

/// Centre of mass of the region bounded by `curve`.
///
/// The area and first-moment boundary integrals (Green's theorem) are
/// evaluated by the trapezoidal rule at `resolution` equispaced parameters,
/// which converges spectrally for smooth periodic curves where the inscribed
/// polygon only converges at second order.
pub fn center_of_mass<T: Scalar, C: BoundaryCurve<T> + ?Sized>(
    curve: &C,
    resolution: usize,
) -> Result<Vec2<T>> {
    if resolution < 64 {
        return Err(Error::Config(format!(
            "center_of_mass resolution must be at least 64, got {resolution}"
        )));
    }
    let o = curve.position(T::zero());
    let mf = T::from_usize_lossy(resolution);
    let (mut area2, mut mx, mut my) = (T::zero(), T::zero(), T::zero());
    let mut scale = T::zero();
    for i in 0..resolution {
        let t = T::two_pi() * T::from_usize_lossy(i) / mf;
        let p = curve.position(t) - o;
        let d = curve.d_position(t);
        area2 += p.cross(d);
        mx += p.x * p.x * d.y;
        my -= p.y * p.y * d.x;
        scale = scale.max(p.norm());
    }
    if area2.abs() * T::two_pi() / mf <= T::epsilon() * T::lit(16.0) * scale * scale {
        return Err(Error::Numeric("degenerate curve: near-zero enclosed area".into()));
    }
    Ok(o + Vec2::new(mx / area2, my / area2))
}
