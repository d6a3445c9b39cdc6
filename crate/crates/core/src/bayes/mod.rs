//! Posterior over spline knots and noise level, griddy Gibbs sampling and
//! synthetic phaseless data.

mod backend;
mod diagnostics;
mod gibbs;
mod observe;
mod posterior;

pub use backend::{
    BackendCounters, ForwardBackend, MockBackend, SolverBackend, SurrogateBackend,
};
pub use diagnostics::{chain_diagnostics, Diagnostics, WOLFF_S};
pub use gibbs::{load_chain, run_gibbs, save_chain, Chain, ChainSample, CHAIN_FORMAT_VERSION};
pub use observe::{
    load_observations, save_observations, synthesize_observations, ObservationData,
    ObservationMeta, OBSERVATION_FORMAT_VERSION,
};
pub use posterior::{
    log_likelihood, log_posterior, log_prior, PosteriorConfig, SigmaPrior, DEFAULT_BURN_IN,
    DEFAULT_CHAIN_LENGTH, DEFAULT_GRID_POINTS, DEFAULT_INITIAL_SIGMA, DEFAULT_SIGMA_BOUNDS,
};
