use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{spline_boundary, NystromConfig, NystromOperator};
use crate::geometry::Vec2;
use crate::surrogate::{SurrogateModel, SymmetryPlan};

/// Work done by a backend since construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendCounters {
    /// Evaluations of the full map `ξ ↦ f(ξ)` over all directions.
    pub forward_evaluations: u64,
    /// Surrogate output-layer passes, one per incident direction.
    pub network_passes: u64,
    /// Boundary-integral solves, one per incident direction.
    pub pde_solves: u64,
}

/// Source of model intensities `f(ξ)`, row-major `n_obs × n_inc`.
pub trait ForwardBackend {
    fn name(&self) -> &'static str;

    fn n_spline(&self) -> usize;

    /// `(n_obs, n_inc)`.
    fn dims(&self) -> (usize, usize);

    /// Observation and incident directions, if the backend is tied to any.
    fn directions(&self) -> Option<(Vec<Vec2<f64>>, Vec<Vec2<f64>>)> {
        None
    }

    fn evaluate(&mut self, xi: &[f64], out: &mut [f64]) -> Result<()>;

    /// `f` at `xi` with coordinate `coord` replaced by each of `values`,
    /// written as consecutive blocks of `n_obs·n_inc`.
    fn evaluate_line(&mut self, xi: &[f64], coord: usize, values: &[f64], out: &mut [f64]) -> Result<()> {
        let block = self.block_len();
        let mut x = xi.to_vec();
        for (v, chunk) in values.iter().zip(out.chunks_exact_mut(block)) {
            x[coord] = *v;
            self.evaluate(&x, chunk)?;
        }
        Ok(())
    }

    fn counters(&self) -> BackendCounters;

    fn block_len(&self) -> usize {
        let (o, i) = self.dims();
        o * i
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::dim(what, expected, found));
    }
    Ok(())
}

/// Surrogate network extended to all incident directions by cyclic symmetry.
/// Line evaluations update the cached hidden pre-activations by a rank-one
/// term instead of recomputing the first layer.
pub struct SurrogateBackend<'a> {
    model: &'a SurrogateModel,
    plan: SymmetryPlan,
    counters: BackendCounters,
    // Scratch: base pre-activations per incident direction, then per-value buffers.
    z_base: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
    hidden: Vec<f64>,
    f1: Vec<f64>,
}

impl<'a> SurrogateBackend<'a> {
    pub fn new(model: &'a SurrogateModel, n_inc: usize) -> Result<Self> {
        model.validate()?;
        let plan = SymmetryPlan::new(model.n_spline(), model.n_obs(), n_inc)?;
        let nh = model.network.n_hidden;
        Ok(Self {
            model,
            plan,
            counters: BackendCounters::default(),
            z_base: vec![0.0; n_inc * nh],
            x: vec![0.0; model.n_spline()],
            z: vec![0.0; nh],
            hidden: vec![0.0; nh],
            f1: vec![0.0; model.n_obs()],
        })
    }

    fn rotated_input(&mut self, xi: &[f64], j: usize) {
        // Column j sees knots rotated by −j·step: x[l] = ξ[(l + j·step) mod Ns].
        let ns = self.plan.n_spline;
        for l in 0..ns {
            self.x[l] = xi[(l + j * self.plan.knot_step) % ns];
        }
        self.model.in_norm.apply_row(&mut self.x);
    }

    fn finish_column(&mut self, j: usize, out: &mut [f64]) {
        let (no, ni) = (self.plan.n_obs, self.plan.n_inc);
        self.model.network.output_from_preactivation(&self.z, &mut self.hidden, &mut self.f1);
        self.model.out_norm.invert_row(&mut self.f1);
        let shift = (j * self.plan.obs_step) % no;
        for i in 0..no {
            out[i * ni + j] = self.f1[(i + no - shift) % no];
        }
    }
}

impl ForwardBackend for SurrogateBackend<'_> {
    fn name(&self) -> &'static str {
        "surrogate"
    }

    fn n_spline(&self) -> usize {
        self.plan.n_spline
    }

    fn dims(&self) -> (usize, usize) {
        (self.plan.n_obs, self.plan.n_inc)
    }

    fn directions(&self) -> Option<(Vec<Vec2<f64>>, Vec<Vec2<f64>>)> {
        Some((
            crate::forward::observation_directions(self.plan.n_obs),
            self.plan.incident_directions(self.model.meta.reference_direction),
        ))
    }

    fn evaluate(&mut self, xi: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("knot vector", self.plan.n_spline, xi.len())?;
        check_len("output block", self.block_len(), out.len())?;
        for j in 0..self.plan.n_inc {
            self.rotated_input(xi, j);
            self.model.network.preactivation(&self.x, &mut self.z);
            self.finish_column(j, out);
        }
        self.counters.forward_evaluations += 1;
        self.counters.network_passes += self.plan.n_inc as u64;
        Ok(())
    }

    fn evaluate_line(&mut self, xi: &[f64], coord: usize, values: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("knot vector", self.plan.n_spline, xi.len())?;
        check_len("output blocks", values.len() * self.block_len(), out.len())?;
        if coord >= self.plan.n_spline {
            return Err(Error::Config(format!("coordinate {coord} out of range")));
        }
        let (ns, ni) = (self.plan.n_spline, self.plan.n_inc);
        let net = &self.model.network;
        let nh = net.n_hidden;
        let mut z_base = std::mem::take(&mut self.z_base);
        for j in 0..ni {
            self.rotated_input(xi, j);
            net.preactivation(&self.x, &mut z_base[j * nh..(j + 1) * nh]);
        }
        let block = self.block_len();
        for (v, chunk) in values.iter().zip(out.chunks_exact_mut(block)) {
            for j in 0..ni {
                // In column j, knot `coord` sits at input position `coord − j·step`.
                let pos = (coord + ns - (j * self.plan.knot_step) % ns) % ns;
                let dx = (v - xi[coord]) / self.model.in_norm.unit(pos);
                for h in 0..nh {
                    self.z[h] = z_base[j * nh + h] + net.w1[h * ns + pos] * dx;
                }
                self.finish_column(j, chunk);
            }
        }
        self.z_base = z_base;
        self.counters.forward_evaluations += values.len() as u64;
        self.counters.network_passes += (values.len() * ni) as u64;
        Ok(())
    }

    fn counters(&self) -> BackendCounters {
        self.counters
    }
}

/// Direct boundary-integral solves on the graded spline boundary.
pub struct SolverBackend {
    cfg: NystromConfig<f64>,
    obs: Vec<Vec2<f64>>,
    inc: Vec<Vec2<f64>>,
    n_spline: usize,
    counters: BackendCounters,
}

impl SolverBackend {
    pub fn new(cfg: NystromConfig<f64>, n_spline: usize, obs: Vec<Vec2<f64>>, inc: Vec<Vec2<f64>>) -> Self {
        Self { cfg, obs, inc, n_spline, counters: BackendCounters::default() }
    }

    fn solve(&self, xi: &[f64], out: &mut [f64]) -> Result<()> {
        let curve = spline_boundary(xi)?;
        let f = NystromOperator::new(&curve, &self.cfg)?.intensities(&self.inc, &self.obs)?;
        out.copy_from_slice(f.as_slice());
        Ok(())
    }
}

impl ForwardBackend for SolverBackend {
    fn name(&self) -> &'static str {
        "solver"
    }

    fn n_spline(&self) -> usize {
        self.n_spline
    }

    fn dims(&self) -> (usize, usize) {
        (self.obs.len(), self.inc.len())
    }

    fn directions(&self) -> Option<(Vec<Vec2<f64>>, Vec<Vec2<f64>>)> {
        Some((self.obs.clone(), self.inc.clone()))
    }

    fn evaluate(&mut self, xi: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("knot vector", self.n_spline, xi.len())?;
        check_len("output block", self.block_len(), out.len())?;
        self.solve(xi, out)?;
        self.counters.forward_evaluations += 1;
        self.counters.pde_solves += self.inc.len() as u64;
        Ok(())
    }

    /// Grid points are independent solves and run in parallel.
    fn evaluate_line(&mut self, xi: &[f64], coord: usize, values: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("knot vector", self.n_spline, xi.len())?;
        let block = self.block_len();
        check_len("output blocks", values.len() * block, out.len())?;
        let this = &*self;
        out.par_chunks_exact_mut(block).zip(values.par_iter()).try_for_each(|(chunk, &v)| {
            let mut x = xi.to_vec();
            x[coord] = v;
            this.solve(&x, chunk)
        })?;
        self.counters.forward_evaluations += values.len() as u64;
        self.counters.pde_solves += (values.len() * self.inc.len()) as u64;
        Ok(())
    }

    fn counters(&self) -> BackendCounters {
        self.counters
    }
}

type MockFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Backend defined by an arbitrary closure; used to test the sampler on
/// targets with known conditionals.
#[derive(Clone)]
pub struct MockBackend {
    n_spline: usize,
    n_obs: usize,
    n_inc: usize,
    func: Arc<MockFn>,
    counters: BackendCounters,
}

impl MockBackend {
    pub fn new(
        n_spline: usize,
        n_obs: usize,
        n_inc: usize,
        func: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { n_spline, n_obs, n_inc, func: Arc::new(func), counters: BackendCounters::default() }
    }

    /// Returns the same intensities for every shape.
    pub fn constant(n_spline: usize, n_obs: usize, n_inc: usize, f: Vec<f64>) -> Self {
        Self::new(n_spline, n_obs, n_inc, move |_| f.clone())
    }
}

impl ForwardBackend for MockBackend {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn n_spline(&self) -> usize {
        self.n_spline
    }

    fn dims(&self) -> (usize, usize) {
        (self.n_obs, self.n_inc)
    }

    fn evaluate(&mut self, xi: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("knot vector", self.n_spline, xi.len())?;
        let f = (self.func)(xi);
        check_len("mock output", out.len(), f.len())?;
        out.copy_from_slice(&f);
        self.counters.forward_evaluations += 1;
        Ok(())
    }

    fn counters(&self) -> BackendCounters {
        self.counters
    }
}
