//! Shape reconstruction from phaseless far-field intensities: a Nyström
//! forward solver, a symmetry-extended neural surrogate, a griddy Gibbs
//! sampler and posterior post-processing.
//!
//! The numerical core (`specfun`, `shape`, `forward`) is generic over
//! [`Scalar`]; the aliases below fix it to `f64`.

pub mod error;
pub mod bayes;
pub mod forward;
pub mod geometry;
pub mod io;
pub mod postprocess;
pub mod scalar;
pub mod shape;
pub mod specfun;
pub mod surrogate;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use scalar::Scalar;

pub type Point = Vec2<f64>;
pub type SolverConfig = forward::NystromConfig<f64>;
pub type Intensities = forward::IntensityMatrix<f64>;
pub type Spline = shape::SplineShape<f64>;
pub type SplineCurve = forward::SplineBoundary<f64>;
pub type FarFieldPattern = forward::FarField<f64>;
pub type Density = forward::DensitySolution<f64>;
pub type Scatterer = shape::NamedScatterer<f64>;
