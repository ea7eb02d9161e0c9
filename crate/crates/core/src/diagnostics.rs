//! Discrete norms and invariant checks producing [`InvariantReport`]s.
//!
//! Every check is a pure function of the states it is given. Sums run in
//! index order so reports are reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::TwoPointFlux;
use crate::grid::{Boundary, GridState, Trajectory};
use crate::kernel::QuadratureWeights;

/// Number of Kruzkov constants sampled by the entropy checks.
pub const KRUZKOV_SAMPLES: usize = 17;
/// Round-off budget for the cell entropy residual, relative to `1 + max|u0|`.
pub const ENTROPY_TOLERANCE: f64 = 1e-10;
/// Round-off budget for the maximum principle, TVD and contraction checks.
pub const INVARIANT_TOLERANCE: f64 = 1e-12;
/// Per-step round-off budget for mass conservation.
pub const CONSERVATION_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub name: String,
    pub passed: bool,
    /// Worst violation, never negative.
    pub violation: f64,
    pub tolerance: f64,
    pub step: Option<usize>,
    pub cell: Option<usize>,
    /// Kruzkov constant of the worst entropy residual.
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InvariantReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            violation: 0.0,
            tolerance,
            step: None,
            cell: None,
            constant: None,
            note: None,
        }
    }

    fn record(&mut self, violation: f64, step: usize, cell: Option<usize>, constant: Option<f64>) {
        if violation > self.violation {
            self.violation = violation;
            self.step = Some(step);
            self.cell = cell;
            self.constant = constant;
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.violation <= self.tolerance;
        self
    }
}

/// `dx * sum |u_j|`
pub fn discrete_l1_norm(state: &GridState) -> f64 {
    state.dx * state.values.iter().map(|v| v.abs()).sum::<f64>()
}

/// `sum |u_{j+1} - u_j|`, including the wrap-around pair on periodic grids.
pub fn total_variation(state: &GridState) -> f64 {
    let v = &state.values;
    let interior: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    match state.boundary {
        Boundary::Periodic => interior + (v[0] - v[v.len() - 1]).abs(),
        Boundary::ConstantExtension => interior,
    }
}

/// `dx * sum |u_{j+1} - u_j|`
pub fn discrete_bv_norm_paper(state: &GridState) -> f64 {
    state.dx * total_variation(state)
}

/// `dx * sum u_j`
pub fn discrete_mass(state: &GridState) -> f64 {
    state.dx * state.values.iter().sum::<f64>()
}

/// `dx * sum |u_j - v_j|` for grids of equal shape.
pub fn l1_distance(a: &GridState, b: &GridState) -> Result<f64> {
    if a.n_cells() != b.n_cells() || a.dx != b.dx {
        return Err(Error::InvalidParameter { name: "state", reason: "grids differ in shape".into() });
    }
    Ok(a.dx * a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// `KRUZKOV_SAMPLES` equally spaced constants on `[lo - 0.1, hi + 0.1]`.
pub fn kruzkov_constants(lo: f64, hi: f64) -> Vec<f64> {
    let a = lo - 0.1;
    let b = hi + 0.1;
    (0..KRUZKOV_SAMPLES).map(|i| a + (b - a) * i as f64 / (KRUZKOV_SAMPLES - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyResidual {
    pub worst: f64,
    pub cell: usize,
}

fn step_size(prev: &GridState, next: &GridState) -> Result<f64> {
    if prev.n_cells() != next.n_cells() || prev.dx != next.dx || prev.boundary != next.boundary {
        return Err(Error::NotConsecutive("grids differ".into()));
    }
    let dt = next.time - prev.time;
    if !(dt > 0.0) {
        return Err(Error::NotConsecutive(format!("time does not advance ({} -> {})", prev.time, next.time)));
    }
    Ok(dt)
}

/// Worst value over cells of
/// `|u1_j - c| - |u0_j - c| + dt sum_k [q(u0_j, u0_{j+k}; c) - q(u0_{j-k}, u0_j; c)] W_k`,
/// which is nonpositive for an entropy-satisfying step.
pub fn cell_entropy_residual(
    prev: &GridState,
    next: &GridState,
    weights: &QuadratureWeights,
    flux: &TwoPointFlux,
    c: f64,
) -> Result<EntropyResidual> {
    let dt = step_size(prev, next)?;
    let m = weights.width();
    let u = prev.padded(m);
    Ok(entropy_residual_padded(&u, m, &next.values, weights, flux, dt, c))
}

fn entropy_residual_padded(
    u: &[f64],
    m: usize,
    next: &[f64],
    weights: &QuadratureWeights,
    flux: &TwoPointFlux,
    dt: f64,
    c: f64,
) -> EntropyResidual {
    let mut worst = EntropyResidual { worst: f64::NEG_INFINITY, cell: 0 };
    for (j, &un) in next.iter().enumerate() {
        let p = j + m;
        let uj = u[p];
        let mut acc = 0.0;
        for (i, &wk) in weights.weights.iter().enumerate() {
            let k = i + 1;
            acc += (flux.entropy_flux(uj, u[p + k], c) - flux.entropy_flux(u[p - k], uj, c)) * wk;
        }
        let r = (un - c).abs() - (uj - c).abs() + dt * acc;
        if r > worst.worst {
            worst = EntropyResidual { worst: r, cell: j };
        }
    }
    worst
}

fn initial_of(traj: &Trajectory) -> Option<&GridState> {
    traj.first()
}

/// `min u0 <= u^n_j <= max u0` at every stored state.
pub fn check_max_principle(traj: &Trajectory) -> InvariantReport {
    let Some(first) = initial_of(traj) else {
        return InvariantReport::new("max_principle", 0.0);
    };
    let mut monitor = MaxPrinciple::new(first);
    for (n, s) in traj.states.iter().enumerate().skip(1) {
        monitor.observe(s, n);
    }
    monitor.report.finish()
}

/// `TV(u^{n+1}) <= TV(u^n)` between consecutive stored states.
pub fn check_tvd(traj: &Trajectory) -> InvariantReport {
    let Some(first) = initial_of(traj) else {
        return InvariantReport::new("tvd", 0.0);
    };
    let mut monitor = Tvd::new(first);
    for (n, s) in traj.states.iter().enumerate().skip(1) {
        monitor.observe(s, n);
    }
    monitor.report.finish()
}

/// Discrete mass is constant on periodic grids.
pub fn check_conservation(traj: &Trajectory) -> InvariantReport {
    let Some(first) = initial_of(traj) else {
        return InvariantReport::new("conservation", 0.0);
    };
    let mut monitor = Conservation::new(first);
    for (n, s) in traj.states.iter().enumerate().skip(1) {
        monitor.observe(s, n);
    }
    monitor.finish()
}

/// Stepwise non-increasing L1 distance between two runs stored at equal times.
pub fn check_l1_contraction(a: &Trajectory, b: &Trajectory) -> Result<InvariantReport> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter { name: "trajectory", reason: "lengths differ".into() });
    }
    let Some(first) = a.first() else {
        return Ok(InvariantReport::new("l1_contraction", 0.0));
    };
    let scale = 1.0 + first.max_abs().max(b.first().map_or(0.0, |s| s.max_abs()));
    let mut report = InvariantReport::new("l1_contraction", INVARIANT_TOLERANCE * scale);
    let mut prev = l1_distance(first, &b.states[0])?;
    for n in 1..a.len() {
        let d = l1_distance(&a.states[n], &b.states[n])?;
        report.record(d - prev, n, None, None);
        prev = d;
    }
    Ok(report.finish())
}

/// Componentwise ordering `u0 <= v0` carries over to every stored state.
pub fn check_ordering(lower: &Trajectory, upper: &Trajectory) -> Result<InvariantReport> {
    if lower.len() != upper.len() {
        return Err(Error::InvalidParameter { name: "trajectory", reason: "lengths differ".into() });
    }
    let Some(first) = lower.first() else {
        return Ok(InvariantReport::new("ordering", 0.0));
    };
    let scale = 1.0 + first.max_abs().max(upper.states[0].max_abs());
    let mut report = InvariantReport::new("ordering", INVARIANT_TOLERANCE * scale);
    let ordered = first.values.iter().zip(&upper.states[0].values).all(|(u, v)| u <= v);
    if !ordered {
        report.note = Some("initial data not ordered; check is vacuous".into());
        return Ok(report.finish());
    }
    for n in 1..lower.len() {
        for (j, (u, v)) in lower.states[n].values.iter().zip(&upper.states[n].values).enumerate() {
            report.record(u - v, n, Some(j), None);
        }
    }
    Ok(report.finish())
}

/// Cell entropy inequality for every consecutive pair and every sampled constant.
pub fn check_entropy(traj: &Trajectory, weights: &QuadratureWeights, flux: &TwoPointFlux) -> Result<InvariantReport> {
    let Some(first) = traj.first() else {
        return Ok(InvariantReport::new("entropy", 0.0));
    };
    let mut monitor = Entropy::new(first, weights.clone(), *flux);
    for n in 1..traj.len() {
        monitor.observe(&traj.states[n - 1], &traj.states[n], n)?;
    }
    Ok(monitor.report.finish())
}

struct MaxPrinciple {
    lo: f64,
    hi: f64,
    report: InvariantReport,
}

impl MaxPrinciple {
    fn new(first: &GridState) -> Self {
        let (lo, hi) = (first.min(), first.max());
        let tol = INVARIANT_TOLERANCE * (1.0 + lo.abs().max(hi.abs()));
        Self { lo, hi, report: InvariantReport::new("max_principle", tol) }
    }

    fn observe(&mut self, s: &GridState, step: usize) {
        for (j, &v) in s.values.iter().enumerate() {
            let excess = (self.lo - v).max(v - self.hi);
            self.report.record(excess, step, Some(j), None);
        }
    }
}

struct Tvd {
    prev: f64,
    report: InvariantReport,
}

impl Tvd {
    fn new(first: &GridState) -> Self {
        let tol = INVARIANT_TOLERANCE * (1.0 + first.max_abs());
        Self { prev: total_variation(first), report: InvariantReport::new("tvd", tol) }
    }

    fn observe(&mut self, s: &GridState, step: usize) {
        let tv = total_variation(s);
        self.report.record(tv - self.prev, step, None, None);
        self.prev = tv;
    }
}

struct Conservation {
    mass0: f64,
    scale: f64,
    steps: usize,
    periodic: bool,
    report: InvariantReport,
}

impl Conservation {
    fn new(first: &GridState) -> Self {
        let scale = 1.0 + discrete_l1_norm(first);
        Self {
            mass0: discrete_mass(first),
            scale,
            steps: 0,
            periodic: first.boundary == Boundary::Periodic,
            report: InvariantReport::new("conservation", 0.0),
        }
    }

    fn observe(&mut self, s: &GridState, step: usize) {
        self.steps = step;
        if self.periodic {
            self.report.record((discrete_mass(s) - self.mass0).abs(), step, None, None);
        }
    }

    fn finish(mut self) -> InvariantReport {
        self.report.tolerance = CONSERVATION_TOLERANCE * self.scale * self.steps.max(1) as f64;
        if !self.periodic {
            self.report.note = Some("boundary flux present; mass not checked".into());
        }
        self.report.finish()
    }
}

struct Entropy {
    constants: Vec<f64>,
    weights: QuadratureWeights,
    flux: TwoPointFlux,
    report: InvariantReport,
}

impl Entropy {
    fn new(first: &GridState, weights: QuadratureWeights, flux: TwoPointFlux) -> Self {
        let tol = ENTROPY_TOLERANCE * (1.0 + first.max_abs());
        Self {
            constants: kruzkov_constants(first.min(), first.max()),
            weights,
            flux,
            report: InvariantReport::new("entropy", tol),
        }
    }

    fn observe(&mut self, prev: &GridState, next: &GridState, step: usize) -> Result<()> {
        let dt = step_size(prev, next)?;
        let m = self.weights.width();
        let u = prev.padded(m);
        for &c in &self.constants {
            let r = entropy_residual_padded(&u, m, &next.values, &self.weights, &self.flux, dt, c);
            self.report.record(r.worst, step, Some(r.cell), Some(c));
        }
        Ok(())
    }
}

/// Streaming version of the full invariant suite, fed one step at a time
/// so long runs need not be stored.
pub struct InvariantMonitor {
    max_principle: MaxPrinciple,
    tvd: Tvd,
    conservation: Conservation,
    entropy: Option<Entropy>,
    error: Option<Error>,
}

impl InvariantMonitor {
    pub fn new(initial: &GridState, weights: &QuadratureWeights, flux: &TwoPointFlux, with_entropy: bool) -> Self {
        Self {
            max_principle: MaxPrinciple::new(initial),
            tvd: Tvd::new(initial),
            conservation: Conservation::new(initial),
            entropy: with_entropy.then(|| Entropy::new(initial, weights.clone(), *flux)),
            error: None,
        }
    }

    pub fn observe(&mut self, prev: &GridState, next: &GridState, step: usize) {
        self.max_principle.observe(next, step);
        self.tvd.observe(next, step);
        self.conservation.observe(next, step);
        if let Some(entropy) = &mut self.entropy {
            if let Err(e) = entropy.observe(prev, next, step) {
                self.error.get_or_insert(e);
            }
        }
    }

    pub fn finish(self) -> Result<Vec<InvariantReport>> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let mut out = vec![self.max_principle.report.finish(), self.tvd.report.finish(), self.conservation.finish()];
        if let Some(entropy) = self.entropy {
            out.push(entropy.report.finish());
        }
        Ok(out)
    }
}
