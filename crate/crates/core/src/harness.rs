//! Refinement studies for the two limits: fixed horizon with `dx -> 0`
//! (self-convergence) and the joint limit `delta = c dx -> 0` measured
//! against a closed-form local entropy solution.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{InvariantMonitor, InvariantReport};
use crate::error::{Error, Result};
use crate::flux::LocalFlux;
use crate::grid::{cell_average_init, Boundary, Geometry, GridState, InitialData, PiecewiseConstant, Trajectory};
use crate::kernel::Kernel;
use crate::reference::{l1_error, BurgersRiemann, ExactSolution, LinearAdvection, SmoothBump};
use crate::scheme::{OutputSchedule, SchemeConfig, Solver, Workers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    BurgersShock,
    BurgersRarefaction,
    AdvectBump,
    Constant,
}

impl ProblemKind {
    pub const KEYS: [&'static str; 4] = ["burgers_shock", "burgers_rarefaction", "advect_bump", "constant"];

    pub fn key(self) -> &'static str {
        match self {
            ProblemKind::BurgersShock => "burgers_shock",
            ProblemKind::BurgersRarefaction => "burgers_rarefaction",
            ProblemKind::AdvectBump => "advect_bump",
            ProblemKind::Constant => "constant",
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "burgers_shock" => Ok(ProblemKind::BurgersShock),
            "burgers_rarefaction" => Ok(ProblemKind::BurgersRarefaction),
            "advect_bump" => Ok(ProblemKind::AdvectBump),
            "constant" => Ok(ProblemKind::Constant),
            other => Err(Error::Config(format!(
                "unknown problem `{other}`; valid keys: {}",
                ProblemKind::KEYS.join(", ")
            ))),
        }
    }
}

/// A reference problem: initial data, computational domain and boundary rule.
///
/// For Riemann problems `left`/`right` are the states on either side of the
/// jump at `origin`; for the bump they are the base level and the peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub kind: ProblemKind,
    pub left: f64,
    pub right: f64,
    pub origin: f64,
    pub domain: (f64, f64),
    pub boundary: Boundary,
}

impl Problem {
    pub fn burgers_shock() -> Self {
        Self {
            kind: ProblemKind::BurgersShock,
            left: 1.0,
            right: 0.0,
            origin: 0.0,
            domain: (-1.0, 2.0),
            boundary: Boundary::ConstantExtension,
        }
    }

    pub fn burgers_rarefaction() -> Self {
        Self {
            kind: ProblemKind::BurgersRarefaction,
            left: -1.0,
            right: 1.0,
            origin: 0.0,
            domain: (-1.5, 1.5),
            boundary: Boundary::ConstantExtension,
        }
    }

    pub fn advect_bump() -> Self {
        Self {
            kind: ProblemKind::AdvectBump,
            left: 0.0,
            right: 1.0,
            origin: 0.5,
            domain: (0.0, 1.0),
            boundary: Boundary::Periodic,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            kind: ProblemKind::Constant,
            left: value,
            right: value,
            origin: 0.0,
            domain: (0.0, 1.0),
            boundary: Boundary::Periodic,
        }
    }

    pub fn from_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::BurgersShock => Self::burgers_shock(),
            ProblemKind::BurgersRarefaction => Self::burgers_rarefaction(),
            ProblemKind::AdvectBump => Self::advect_bump(),
            ProblemKind::Constant => Self::constant(0.5),
        }
    }

    pub fn length(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    fn bump(&self) -> SmoothBump {
        SmoothBump { center: self.origin, width: 0.5 * self.length(), base: self.left, amplitude: self.right - self.left }
    }

    pub fn initial_data(&self) -> Arc<dyn InitialData + Send> {
        match self.kind {
            ProblemKind::BurgersShock | ProblemKind::BurgersRarefaction => {
                Arc::new(PiecewiseConstant::riemann(self.left, self.right, self.origin))
            }
            ProblemKind::AdvectBump => Arc::new(self.bump()),
            ProblemKind::Constant => Arc::new(PiecewiseConstant::constant(self.left)),
        }
    }

    /// Range of the initial data.
    pub fn data_box(&self) -> (f64, f64) {
        (self.left.min(self.right), self.left.max(self.right))
    }

    /// Closed-form local entropy solution, when one exists for this flux.
    pub fn exact(&self, local: &LocalFlux) -> Option<Arc<dyn ExactSolution>> {
        match (self.kind, local) {
            (ProblemKind::BurgersShock | ProblemKind::BurgersRarefaction, LocalFlux::Burgers) => {
                Some(Arc::new(BurgersRiemann { left: self.left, right: self.right, origin: self.origin }))
            }
            (ProblemKind::AdvectBump, LocalFlux::LinearAdvection { speed }) => {
                let initial: Arc<dyn InitialData + Send> = Arc::new(self.bump());
                Some(Arc::new(LinearAdvection::periodic(initial, *speed, self.domain.0, self.length())))
            }
            (ProblemKind::Constant, _) => Some(Arc::new(BurgersRiemann {
                left: self.left,
                right: self.left,
                origin: self.origin,
            })),
            _ => None,
        }
    }

    pub fn geometry(&self, dx: f64) -> Result<Geometry> {
        let cells = self.length() / dx;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::NonNesting(format!("domain length {} is not a multiple of dx = {dx}", self.length())));
        }
        Geometry::covering(self.domain.0, self.domain.1, dx, self.boundary)
    }

    pub fn initial_state(&self, dx: f64) -> Result<GridState> {
        cell_average_init(self.initial_data().as_ref(), &self.geometry(dx)?)
    }

    /// Default measurement window: the domain shrunk on each side by
    /// `min(L / 4, delta + max|f'| T)`; the whole domain when periodic.
    pub fn default_window(&self, local: &LocalFlux, delta: f64, final_time: f64) -> (f64, f64) {
        if self.boundary == Boundary::Periodic {
            return self.domain;
        }
        let (lo, hi) = self.data_box();
        let (dlo, dhi) = local.df_range(lo, hi);
        let speed = dlo.abs().max(dhi.abs());
        let margin = (0.25 * self.length()).min(delta + speed * final_time);
        (self.domain.0 + margin, self.domain.1 - margin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FixedDelta,
    JointLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    /// Snapshot count over `[0, T]`, endpoints included.
    pub snapshots: usize,
    pub check_entropy: bool,
    pub workers: Workers,
    pub window: Option<(f64, f64)>,
    /// Record wall-clock time per level (makes reports non-reproducible).
    pub timing: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self { snapshots: 9, check_entropy: true, workers: Workers::Global, window: None, timing: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub dx: f64,
    pub delta: f64,
    pub dt: f64,
    pub r: usize,
    pub n_cells: usize,
    pub n_steps: usize,
    /// Error against the reference (joint limit) or Cauchy distance to the
    /// next level (fixed delta; absent on the finest level).
    pub error: Option<f64>,
    /// Final-time value at the problem origin.
    pub origin_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub invariants: Vec<InvariantReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub regime: Regime,
    pub problem: Problem,
    pub config: SchemeConfig,
    pub window: (f64, f64),
    pub levels: Vec<LevelRecord>,
    pub eoc: Vec<f64>,
    /// Errors (or Cauchy distances) strictly decrease level to level.
    pub monotone: bool,
    pub invariants_passed: bool,
}

impl StudyReport {
    pub fn errors(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.error).collect()
    }
}

/// `log2(e_m / e_{m+1})`; zero for equal errors, including two zeros.
pub fn eoc(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| if w[0] == w[1] { 0.0 } else { (w[0] / w[1]).log2() }).collect()
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// `int_window |fine - coarse|` for grids that nest under halving.
pub fn nested_distance(coarse: &GridState, fine: &GridState, window: (f64, f64)) -> Result<f64> {
    let ok = fine.n_cells() == 2 * coarse.n_cells()
        && (2.0 * fine.dx - coarse.dx).abs() <= 1e-12 * coarse.dx
        && fine.x0 == coarse.x0;
    if !ok {
        return Err(Error::NonNesting(format!(
            "fine grid ({} cells, dx {}) is not a halving of coarse grid ({} cells, dx {})",
            fine.n_cells(),
            fine.dx,
            coarse.n_cells(),
            coarse.dx
        )));
    }
    let (a, b) = window;
    if !(a <= b) || a < fine.x_left() - 1e-12 || b > fine.x_right() + 1e-12 {
        return Err(Error::WindowOutsideDomain { a, b, lo: fine.x_left(), hi: fine.x_right() });
    }
    let mut total = 0.0;
    for (j, &v) in fine.values.iter().enumerate() {
        let cl = (fine.x0 + j as f64 * fine.dx).max(a);
        let cr = (fine.x0 + (j + 1) as f64 * fine.dx).min(b);
        if cr > cl {
            total += (cr - cl) * (v - coarse.values[j / 2]).abs();
        }
    }
    Ok(total)
}

struct LevelRun {
    record: LevelRecord,
    snapshots: Trajectory,
}

fn run_level(
    problem: &Problem,
    config: &SchemeConfig,
    level: usize,
    dx: f64,
    options: &StudyOptions,
) -> Result<LevelRun> {
    let started = Instant::now();
    let initial = problem.initial_state(dx)?;
    let solver = Solver::new(*config, dx)?.with_workers(options.workers)?;
    let mut monitor = InvariantMonitor::new(&initial, &solver.weights, &config.flux, options.check_entropy);
    let mut steps = 0;
    let snapshots = solver.run_observed(initial, &OutputSchedule::uniform(config.final_time, options.snapshots), |p, n, i| {
        monitor.observe(p, n, i);
        steps = i;
    })?;
    let invariants = monitor.finish()?;
    let origin_value = snapshots.last().map_or(f64::NAN, |s| s.reconstruct(problem.origin));
    Ok(LevelRun {
        record: LevelRecord {
            level,
            dx,
            delta: config.kernel.delta,
            dt: solver.dt,
            r: solver.weights.r,
            n_cells: snapshots.states[0].n_cells(),
            n_steps: steps,
            error: None,
            origin_value,
            wall_time_s: options.timing.then(|| started.elapsed().as_secs_f64()),
            invariants,
        },
        snapshots,
    })
}

fn check_levels(n_levels: usize, dx0: f64) -> Result<()> {
    if n_levels < 2 {
        return Err(Error::InvalidParameter { name: "levels", reason: format!("need at least 2 levels, got {n_levels}") });
    }
    if !(dx0.is_finite() && dx0 > 0.0) {
        return Err(Error::InvalidParameter { name: "dx", reason: format!("must be positive, got {dx0}") });
    }
    Ok(())
}

fn resolve_window(problem: &Problem, config: &SchemeConfig, options: &StudyOptions) -> Result<(f64, f64)> {
    let window = options
        .window
        .unwrap_or_else(|| problem.default_window(&config.flux.local, config.kernel.delta, config.final_time));
    let (lo, hi) = problem.domain;
    if !(window.0 <= window.1) || window.0 < lo || window.1 > hi {
        return Err(Error::WindowOutsideDomain { a: window.0, b: window.1, lo, hi });
    }
    Ok(window)
}

/// Fixed horizon, `dx` halving from `dx0`: Cauchy distances between
/// consecutive levels, maximized over the snapshot times.
pub fn refine_fixed_delta(
    problem: &Problem,
    config: &SchemeConfig,
    dx0: f64,
    n_levels: usize,
    options: &StudyOptions,
) -> Result<StudyReport> {
    check_levels(n_levels, dx0)?;
    let window = resolve_window(problem, config, options)?;
    let runs: Vec<LevelRun> = (0..n_levels)
        .into_par_iter()
        .map(|m| run_level(problem, config, m, dx0 / f64::powi(2.0, m as i32), options))
        .collect::<Result<_>>()?;
    let mut levels: Vec<LevelRecord> = runs.iter().map(|r| r.record.clone()).collect();
    for m in 0..n_levels - 1 {
        let (coarse, fine) = (&runs[m].snapshots, &runs[m + 1].snapshots);
        let mut worst = 0.0f64;
        for (c, f) in coarse.states.iter().zip(&fine.states) {
            if c.time != f.time {
                return Err(Error::NonNesting(format!("snapshot times differ: {} vs {}", c.time, f.time)));
            }
            worst = worst.max(nested_distance(c, f, window)?);
        }
        levels[m].error = Some(worst);
    }
    Ok(finish_report(Regime::FixedDelta, problem, config, window, levels))
}

/// Joint limit with `delta = coupling * dx`: windowed L1 error against the
/// local entropy solution, maximized over the snapshot times.
pub fn refine_joint_limit(
    problem: &Problem,
    config: &SchemeConfig,
    coupling: f64,
    dx0: f64,
    n_levels: usize,
    options: &StudyOptions,
) -> Result<StudyReport> {
    check_levels(n_levels, dx0)?;
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::InvalidParameter { name: "coupling", reason: format!("must be positive, got {coupling}") });
    }
    let exact = problem.exact(&config.flux.local).ok_or_else(|| {
        Error::Config(format!("no closed-form solution for `{}` with a {} flux", problem.kind.key(), config.flux.local.key()))
    })?;
    let coarse_config = SchemeConfig { kernel: Kernel::new(coupling * dx0, config.kernel.profile)?, ..*config };
    let window = resolve_window(problem, &coarse_config, options)?;

    let levels: Vec<LevelRecord> = (0..n_levels)
        .into_par_iter()
        .map(|m| {
            let dx = dx0 / f64::powi(2.0, m as i32);
            let level_config = SchemeConfig { kernel: Kernel::new(coupling * dx, config.kernel.profile)?, ..*config };
            let run = run_level(problem, &level_config, m, dx, options)?;
            let mut worst = 0.0f64;
            for s in &run.snapshots.states {
                worst = worst.max(l1_error(s, exact.as_ref(), s.time, window)?);
            }
            Ok(LevelRecord { error: Some(worst), ..run.record })
        })
        .collect::<Result<_>>()?;
    Ok(finish_report(Regime::JointLimit, problem, &coarse_config, window, levels))
}

fn finish_report(
    regime: Regime,
    problem: &Problem,
    config: &SchemeConfig,
    window: (f64, f64),
    levels: Vec<LevelRecord>,
) -> StudyReport {
    let errors: Vec<f64> = levels.iter().filter_map(|l| l.error).collect();
    let invariants_passed = levels.iter().all(|l| l.invariants.iter().all(|r| r.passed));
    StudyReport {
        regime,
        problem: *problem,
        config: *config,
        window,
        eoc: eoc(&errors),
        monotone: strictly_decreasing(&errors),
        invariants_passed,
        levels,
    }
}
