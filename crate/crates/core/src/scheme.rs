//! The forward-in-time nonlocal scheme
//!
//! ```text
//! u_j^{n+1} = u_j^n - dt * sum_{k=1}^{max(r,1)} [g(u_j, u_{j+k}) - g(u_{j-k}, u_j)] W_k
//! ```
//!
//! together with its conservative rewrite through a wide interface flux,
//! time-step selection and the driver loop.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::TwoPointFlux;
use crate::grid::{GridState, Trajectory};
use crate::kernel::{compute_weights, Kernel, QuadratureWeights};

/// Below this many flux evaluations per step the update runs serially.
const PARALLEL_THRESHOLD: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub kernel: Kernel,
    pub flux: TwoPointFlux,
    /// Mesh ratio `dt / dx`, held fixed under refinement.
    pub mesh_ratio: f64,
    pub final_time: f64,
    /// Fraction of the CFL limit used by [`cfl_dt`].
    pub safety: f64,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mesh_ratio.is_finite() && self.mesh_ratio > 0.0) {
            return Err(Error::InvalidParameter { name: "lambda", reason: format!("must be positive, got {}", self.mesh_ratio) });
        }
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return Err(Error::InvalidParameter { name: "T", reason: format!("must be nonnegative, got {}", self.final_time) });
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::InvalidParameter { name: "safety", reason: format!("must lie in (0, 1], got {}", self.safety) });
        }
        Ok(())
    }

    /// Checks `lambda * (L1 + L2) <= 1` on the data box `[b1, b2]`.
    pub fn check_cfl(&self, b1: f64, b2: f64) -> Result<()> {
        self.flux.check_monotone_on(b1, b2)?;
        let (l1, l2) = self.flux.lipschitz_box_bound(b1, b2)?;
        let sum = l1 + l2;
        let value = self.mesh_ratio * sum;
        if value > 1.0 + 1e-12 {
            return Err(Error::CflViolation { ratio: self.mesh_ratio, lipschitz_sum: sum, value, bound: 1.0 / sum });
        }
        Ok(())
    }

    /// Largest admissible mesh ratio on the data box.
    pub fn max_mesh_ratio(&self, b1: f64, b2: f64) -> Result<f64> {
        let (l1, l2) = self.flux.lipschitz_box_bound(b1, b2)?;
        Ok(if l1 + l2 > 0.0 { 1.0 / (l1 + l2) } else { f64::INFINITY })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflStep {
    pub dt: f64,
    /// Set when `L1 + L2 = 0`, in which case `dt = safety * dx`.
    pub degenerate: bool,
}

/// `dt = safety * dx / (L1 + L2)` with the bounds taken over the initial data range.
pub fn cfl_dt(state: &GridState, config: &SchemeConfig) -> Result<CflStep> {
    let (l1, l2) = config.flux.lipschitz_box_bound(state.min(), state.max())?;
    let sum = l1 + l2;
    if sum <= 0.0 {
        log::warn!("vanishing flux Lipschitz bound; using dt = safety * dx");
        return Ok(CflStep { dt: config.safety * state.dx, degenerate: true });
    }
    Ok(CflStep { dt: config.safety * state.dx / sum, degenerate: false })
}

fn check_mesh(state: &GridState, weights: &QuadratureWeights) -> Result<()> {
    if (state.dx - weights.dx).abs() > 1e-12 * state.dx {
        return Err(Error::MeshMismatch { weights_dx: weights.dx, state_dx: state.dx });
    }
    Ok(())
}

#[inline]
fn update_cell(u: &[f64], j: usize, w: &[f64], flux: &TwoPointFlux, dt: f64) -> f64 {
    let uj = u[j];
    let mut acc = 0.0;
    for (i, &wk) in w.iter().enumerate() {
        let k = i + 1;
        acc += (flux.eval(uj, u[j + k]) - flux.eval(u[j - k], uj)) * wk;
    }
    uj - dt * acc
}

fn advance(state: &GridState, weights: &QuadratureWeights, flux: &TwoPointFlux, dt: f64, parallel: bool) -> GridState {
    let m = weights.width();
    let u = state.padded(m);
    let w = &weights.weights;
    let n = state.n_cells();
    let values: Vec<f64> = if parallel && n * m >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().with_min_len(64).map(|j| update_cell(&u, j + m, w, flux, dt)).collect()
    } else {
        (0..n).map(|j| update_cell(&u, j + m, w, flux, dt)).collect()
    };
    GridState { values, time: state.time + dt, ..state.clone() }
}

/// One step of the nonlocal scheme. Does not enforce the CFL condition; see
/// [`Solver`] for the checked driver.
pub fn step(state: &GridState, weights: &QuadratureWeights, flux: &TwoPointFlux, dt: f64) -> Result<GridState> {
    check_mesh(state, weights)?;
    Ok(advance(state, weights, flux, dt, false))
}

/// Wide flux at the left edge of padded index `i`:
/// `dx * sum_k W_k sum_{l=1}^{k} g(u_{i-l}, u_{i-l+k})`.
fn wide_flux_padded(u: &[f64], i: usize, weights: &QuadratureWeights, flux: &TwoPointFlux) -> f64 {
    let mut acc = 0.0;
    for (k, wk) in weights.iter() {
        let mut inner = 0.0;
        for l in 1..=k {
            inner += flux.eval(u[i - l], u[i - l + k]);
        }
        acc += inner * wk;
    }
    acc * weights.dx
}

/// The wide numerical flux at the left edge of cell `i` (`0 <= i <= n`).
pub fn interface_flux(state: &GridState, weights: &QuadratureWeights, flux: &TwoPointFlux, i: usize) -> Result<f64> {
    check_mesh(state, weights)?;
    let m = weights.width();
    let u = state.padded(m);
    Ok(wide_flux_padded(&u, i + m, weights, flux))
}

/// The same update written as a difference of wide interface fluxes,
/// `u_j - (dt/dx) (G_{j+1/2} - G_{j-1/2})`.
pub fn step_conservative_form(
    state: &GridState,
    weights: &QuadratureWeights,
    flux: &TwoPointFlux,
    dt: f64,
) -> Result<GridState> {
    check_mesh(state, weights)?;
    let m = weights.width();
    let u = state.padded(m);
    let n = state.n_cells();
    let fluxes: Vec<f64> = (0..=n).map(|i| wide_flux_padded(&u, i + m, weights, flux)).collect();
    let ratio = dt / state.dx;
    let values = (0..n).map(|j| state.values[j] - ratio * (fluxes[j + 1] - fluxes[j])).collect();
    Ok(GridState { values, time: state.time + dt, ..state.clone() })
}

/// Classical three-point conservative scheme with numerical flux `g`.
pub fn step_three_point(state: &GridState, flux: &TwoPointFlux, dt: f64) -> GridState {
    let u = state.padded(1);
    let ratio = dt / state.dx;
    let values = (1..=state.n_cells())
        .map(|j| u[j] - ratio * (flux.eval(u[j], u[j + 1]) - flux.eval(u[j - 1], u[j])))
        .collect();
    GridState { values, time: state.time + dt, ..state.clone() }
}

/// Which states a run keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputSchedule {
    /// Every state, initial included.
    EveryStep,
    /// The initial state, each listed time in `(0, T]`, and `T`.
    Times(Vec<f64>),
}

impl OutputSchedule {
    /// `count` equally spaced snapshots over `[0, T]`, endpoints included.
    pub fn uniform(final_time: f64, count: usize) -> Self {
        let count = count.max(2);
        Self::Times((1..count).map(|i| final_time * i as f64 / (count - 1) as f64).collect())
    }
}

/// Degree of parallelism for the per-cell update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    Serial,
    /// The global rayon pool.
    #[default]
    Global,
    Threads(usize),
}

/// Checked driver: fixed `dt = lambda * dx`, CFL verified on the initial data.
#[derive(Debug, Clone)]
pub struct Solver {
    pub config: SchemeConfig,
    pub weights: QuadratureWeights,
    pub dt: f64,
    pool: Option<Arc<rayon::ThreadPool>>,
    parallel: bool,
}

impl Solver {
    pub fn new(config: SchemeConfig, dx: f64) -> Result<Self> {
        config.validate()?;
        let weights = compute_weights(&config.kernel, dx)?;
        Ok(Self { config, weights, dt: config.mesh_ratio * dx, pool: None, parallel: true })
    }

    pub fn with_workers(mut self, workers: Workers) -> Result<Self> {
        match workers {
            Workers::Serial => {
                self.parallel = false;
                self.pool = None;
            }
            Workers::Global => {
                self.parallel = true;
                self.pool = None;
            }
            Workers::Threads(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
                self.parallel = n > 1;
                self.pool = Some(Arc::new(pool));
            }
        }
        Ok(self)
    }

    pub fn step(&self, state: &GridState, dt: f64) -> Result<GridState> {
        check_mesh(state, &self.weights)?;
        let flux = &self.config.flux;
        Ok(match &self.pool {
            Some(pool) => pool.install(|| advance(state, &self.weights, flux, dt, self.parallel)),
            None => advance(state, &self.weights, flux, dt, self.parallel),
        })
    }

    pub fn run(&self, initial: GridState, schedule: &OutputSchedule) -> Result<Trajectory> {
        self.run_observed(initial, schedule, |_, _, _| {})
    }

    /// Runs to the final time, calling `observer(previous, next, step_index)`
    /// after every step. Steps are shortened to land exactly on output times.
    pub fn run_observed(
        &self,
        initial: GridState,
        schedule: &OutputSchedule,
        mut observer: impl FnMut(&GridState, &GridState, usize),
    ) -> Result<Trajectory> {
        check_mesh(&initial, &self.weights)?;
        self.config.check_cfl(initial.min(), initial.max())?;
        let final_time = self.config.final_time;

        let mut targets: Vec<f64> = match schedule {
            OutputSchedule::EveryStep => Vec::new(),
            OutputSchedule::Times(ts) => ts.iter().copied().filter(|&t| t > 0.0 && t < final_time).collect(),
        };
        if final_time > 0.0 {
            targets.push(final_time);
        }
        targets.sort_by(f64::total_cmp);
        targets.dedup();

        let every = matches!(schedule, OutputSchedule::EveryStep);
        let dt = self.dt;
        let mut state = initial;
        let mut out = vec![state.clone()];
        let mut index = 0usize;

        for target in targets {
            let start = state.time;
            let mut taken = 0usize;
            loop {
                let remaining = target - state.time;
                if remaining <= 1e-12 * dt {
                    state.time = target;
                    break;
                }
                let (h, lands) = if remaining <= dt * (1.0 + 1e-9) { (remaining.min(dt), true) } else { (dt, false) };
                let mut next = self.step(&state, h)?;
                index += 1;
                taken += 1;
                if let Some(cell) = next.values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { step: index, cell });
                }
                next.time = if lands { target } else { start + taken as f64 * dt };
                observer(&state, &next, index);
                if every {
                    out.push(next.clone());
                }
                state = next;
                if lands {
                    break;
                }
            }
            if !every {
                out.push(state.clone());
            }
        }
        Ok(Trajectory::new(out))
    }
}
