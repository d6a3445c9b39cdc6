//! Reference scatterers: analytic smooth shapes and corner-rounded polygons.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scalar::Scalar;
use crate::shape::curve::{BoundaryCurve, Circle, CosineLogRadius, Kite, PolarCurve};
use crate::shape::spline::SplineShape;

pub const DEFAULT_ROUNDING_RADIUS: f64 = 0.05;
pub const DEFAULT_RESAMPLE: usize = 720;

/// Names accepted by [`named_scatterer`].
pub const SCATTERER_NAMES: &[&str] = &["circle", "trefoil", "kite", "hexagon", "star5", "polygon-file"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScattererOptions {
    /// Corner rounding radius for polygons.
    pub rounding_radius: f64,
    /// Number of angles at which polygon radii are resampled.
    pub resample: usize,
    /// Vertex file for `polygon-file`.
    pub vertex_file: Option<PathBuf>,
}

impl Default for ScattererOptions {
    fn default() -> Self {
        Self {
            rounding_radius: DEFAULT_ROUNDING_RADIUS,
            resample: DEFAULT_RESAMPLE,
            vertex_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScattererCurve<T> {
    Circle(Circle<T>),
    Trefoil(PolarCurve<CosineLogRadius<T>>),
    Kite(Kite),
    /// Corner-rounded polygon resampled as a dense periodic log-radius spline.
    Polygon(PolarCurve<SplineShape<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedScatterer<T> {
    pub name: String,
    pub curve: ScattererCurve<T>,
}

impl<T: Scalar> BoundaryCurve<T> for NamedScatterer<T> {
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
        match &self.curve {
            ScattererCurve::Circle(c) => c.eval(t),
            ScattererCurve::Trefoil(c) => c.eval(t),
            ScattererCurve::Kite(c) => BoundaryCurve::<T>::eval(c, t),
            ScattererCurve::Polygon(c) => c.eval(t),
        }
    }
}

/// Looks up one of the reference scatterers by name.
///
/// `circle` is the unit circle, `trefoil` is `r(θ) = exp(0.25 cos 3θ)`, `kite`
/// is the classical kite. `hexagon` (unit circumradius) and `star5` (five
/// points, radii 1.5 and 0.75) are rounded polygons; `polygon-file` reads
/// vertices from `options.vertex_file`.
pub fn named_scatterer<T: Scalar>(name: &str, options: &ScattererOptions) -> Result<NamedScatterer<T>> {
    let curve = match name {
        "circle" => ScattererCurve::Circle(Circle::unit()),
        "trefoil" => ScattererCurve::Trefoil(PolarCurve::new(CosineLogRadius {
            amplitude: T::lit(0.25),
            lobes: 3,
        })),
        "kite" => ScattererCurve::Kite(Kite),
        "hexagon" => polygon_curve(&regular_polygon(6, 1.0, 0.0), options)?,
        "star5" => polygon_curve(&star_polygon(5, 1.5, 0.75, std::f64::consts::FRAC_PI_2), options)?,
        "polygon-file" => {
            let path = options.vertex_file.as_ref().ok_or_else(|| {
                Error::Config("scatterer `polygon-file` needs a vertex file".into())
            })?;
            polygon_curve(&read_vertex_file(path)?, options)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown scatterer `{other}` (known: {})",
                SCATTERER_NAMES.join(", ")
            )))
        }
    };
    Ok(NamedScatterer {
        name: name.to_string(),
        curve,
    })
}

fn polygon_curve<T: Scalar>(vertices: &[Vec2<f64>], options: &ScattererOptions) -> Result<ScattererCurve<T>> {
    let rounded = RoundedPolygon::new(vertices, options.rounding_radius)?;
    let spline = rounded.resample_log_radius::<T>(options.resample)?;
    Ok(ScattererCurve::Polygon(PolarCurve::new(spline)))
}

pub fn regular_polygon(sides: usize, circumradius: f64, phase: f64) -> Vec<Vec2<f64>> {
    (0..sides)
        .map(|i| Vec2::from_angle(phase + std::f64::consts::TAU * i as f64 / sides as f64) * circumradius)
        .collect()
}

pub fn star_polygon(points: usize, outer: f64, inner: f64, phase: f64) -> Vec<Vec2<f64>> {
    let n = 2 * points;
    (0..n)
        .map(|i| {
            let r = if i % 2 == 0 { outer } else { inner };
            Vec2::from_angle(phase + std::f64::consts::TAU * i as f64 / n as f64) * r
        })
        .collect()
}

/// Parses a vertex file: one `x y` pair per line, counter-clockwise,
/// implicitly closed. Blank lines and `#` comments are skipped.
pub fn read_vertex_file(path: &Path) -> Result<Vec<Vec2<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vertices(&text).map_err(|msg| Error::format(path, msg))
}

pub fn parse_vertices(text: &str) -> std::result::Result<Vec<Vec2<f64>>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            return Err(format!("line {}: expected `x y`, got `{raw}`", lineno + 1));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("line {}: bad number `{s}`", lineno + 1))
        };
        out.push(Vec2::new(parse(fields[0])?, parse(fields[1])?));
    }
    if out.len() < 3 {
        return Err(format!("need at least 3 vertices, found {}", out.len()));
    }
    let area2: f64 = (0..out.len()).map(|i| out[i].cross(out[(i + 1) % out.len()])).sum();
    if area2 <= 0.0 {
        return Err("vertices must be listed counter-clockwise".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Segment { a: Vec2<f64>, b: Vec2<f64> },
    /// Arc of `radius` about `center`, from angle `start` sweeping `sweep`
    /// (signed, counter-clockwise positive).
    Arc { center: Vec2<f64>, radius: f64, start: f64, sweep: f64 },
}

/// Polygon whose corners are replaced by circular arcs tangent to both edges.
#[derive(Debug, Clone)]
pub struct RoundedPolygon {
    pieces: Vec<Piece>,
}

impl RoundedPolygon {
    pub fn new(vertices: &[Vec2<f64>], radius: f64) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Config("polygon needs at least 3 vertices".into()));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("invalid rounding radius {radius}")));
        }
        // Tangent points (entry, exit) and arcs per corner.
        let mut corners = Vec::with_capacity(n);
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let v = vertices[i];
            let next = vertices[(i + 1) % n];
            let e_in = v - prev;
            let e_out = next - v;
            let (len_in, len_out) = (e_in.norm(), e_out.norm());
            if len_in == 0.0 || len_out == 0.0 {
                return Err(Error::Config(format!("repeated vertex at index {i}")));
            }
            let (e_in, e_out) = (e_in * (1.0 / len_in), e_out * (1.0 / len_out));
            let turn = e_in.cross(e_out).atan2(e_in.dot(e_out));
            let d = radius * (turn.abs() / 2.0).tan();
            if 2.0 * d > len_in.min(len_out) + 1e-12 {
                return Err(Error::Config(format!(
                    "rounding radius {radius} too large for the edges at vertex {i}"
                )));
            }
            let p_in = v - e_in * d;
            let p_out = v + e_out * d;
            let left = Vec2::new(-e_in.y, e_in.x);
            let center = p_in + left * (radius * turn.signum());
            corners.push((p_in, p_out, center, turn));
        }
        let mut pieces = Vec::with_capacity(2 * n);
        for i in 0..n {
            let (p_in, p_out, center, turn) = corners[i];
            if radius > 0.0 && turn != 0.0 {
                pieces.push(Piece::Arc {
                    center,
                    radius,
                    start: (p_in - center).angle(),
                    sweep: turn,
                });
            }
            let next_in = corners[(i + 1) % n].0;
            pieces.push(Piece::Segment { a: p_out, b: next_in });
        }
        Ok(Self { pieces })
    }

    /// Distance from the origin to the boundary along the ray at `theta`,
    /// or `None` if the ray misses (origin outside or not star-shaped).
    pub fn radius_at(&self, theta: f64) -> Option<f64> {
        let u = Vec2::from_angle(theta);
        let mut best: Option<f64> = None;
        let mut consider = |lam: f64| {
            if lam > 0.0 && lam.is_finite() {
                best = Some(best.map_or(lam, |b: f64| b.max(lam)));
            }
        };
        for piece in &self.pieces {
            match *piece {
                Piece::Segment { a, b } => {
                    let w = b - a;
                    let den = u.cross(w);
                    if den.abs() < 1e-300 {
                        continue;
                    }
                    let s = a.cross(u) / den;
                    if (-1e-12..=1.0 + 1e-12).contains(&s) {
                        consider(a.cross(w) / den);
                    }
                }
                Piece::Arc { center, radius, start, sweep } => {
                    let b = u.dot(center);
                    let disc = b * b - (center.dot(center) - radius * radius);
                    if disc < 0.0 {
                        continue;
                    }
                    for lam in [b - disc.sqrt(), b + disc.sqrt()] {
                        let p = u * lam - center;
                        let mut rel = (p.angle() - start) * sweep.signum();
                        rel = rel.rem_euclid(std::f64::consts::TAU);
                        if rel <= sweep.abs() + 1e-12 {
                            consider(lam);
                        }
                    }
                }
            }
        }
        best
    }

    /// Log-radius at `count` equispaced angles, interpolated by a periodic spline.
    pub fn resample_log_radius<T: Scalar>(&self, count: usize) -> Result<SplineShape<T>> {
        let knots = (0..count)
            .map(|i| {
                let theta = std::f64::consts::TAU * i as f64 / count as f64;
                self.radius_at(theta)
                    .map(|r| T::lit(r.ln()))
                    .ok_or_else(|| Error::Config(format!(
                        "polygon is not star-shaped about the origin (ray at {theta:.4} misses)"
                    )))
            })
            .collect::<Result<Vec<T>>>()?;
        SplineShape::new(knots)
    }
}
