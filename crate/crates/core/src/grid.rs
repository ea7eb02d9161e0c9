//! Uniform one-dimensional grids of cell averages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Ghost cells repeat the nearest edge value.
    ConstantExtension,
}

impl Boundary {
    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "periodic" => Ok(Boundary::Periodic),
            "constant_extension" => Ok(Boundary::ConstantExtension),
            other => Err(Error::Config(format!(
                "unknown boundary `{other}`; valid keys: periodic, constant_extension"
            ))),
        }
    }
}

/// Cell `j` covers the half-open interval `[x0 + j dx, x0 + (j + 1) dx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub dx: f64,
    pub x0: f64,
    pub values: Vec<f64>,
    pub boundary: Boundary,
    pub time: f64,
}

impl GridState {
    pub fn new(dx: f64, x0: f64, values: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidParameter { name: "dx", reason: format!("must be positive, got {dx}") });
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter { name: "n_cells", reason: "grid has no cells".into() });
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInitial { cell });
        }
        Ok(Self { dx, x0, values, boundary, time: 0.0 })
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn x_left(&self) -> f64 {
        self.x0
    }

    pub fn x_right(&self) -> f64 {
        self.x0 + self.values.len() as f64 * self.dx
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.dx
    }

    /// Value at a possibly out-of-range index, using the boundary rule.
    #[inline]
    pub fn at(&self, j: isize) -> f64 {
        let n = self.values.len() as isize;
        let idx = match self.boundary {
            Boundary::Periodic => j.rem_euclid(n),
            Boundary::ConstantExtension => j.clamp(0, n - 1),
        };
        self.values[idx as usize]
    }

    /// Copy of the values with `ghost` extra cells on each side.
    pub fn padded(&self, ghost: usize) -> Vec<f64> {
        let g = ghost as isize;
        let n = self.values.len() as isize;
        (-g..n + g).map(|j| self.at(j)).collect()
    }

    /// Cell index of `x` (half-open cells), unbounded.
    pub fn cell_index(&self, x: f64) -> isize {
        ((x - self.x0) / self.dx).floor() as isize
    }

    /// Value of the piecewise-constant field at `x`. A point on an edge
    /// belongs to the cell on its right.
    pub fn reconstruct(&self, x: f64) -> f64 {
        let mut j = self.cell_index(x);
        // guard against x0 + j dx rounding: keep x inside [left, right)
        let left = self.x0 + j as f64 * self.dx;
        if x < left {
            j -= 1;
        } else if x >= left + self.dx {
            j += 1;
        }
        self.at(j)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Initial data that can report exact averages over sub-intervals.
pub trait InitialData: Sync {
    fn value(&self, x: f64) -> f64;

    /// Average over `[a, b]`; composite 5-point Gauss-Legendre by default.
    fn average(&self, a: f64, b: f64) -> f64 {
        gauss5(|x| self.value(x), a, b) / (b - a)
    }
}

impl<F: Fn(f64) -> f64 + Sync> InitialData for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Piecewise constant data: `values[i]` on `[breaks[i-1], breaks[i])`, with
/// `values[0]` left of `breaks[0]` and the last value right of the last break.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("{} breaks need {} values, got {}", breaks.len(), breaks.len() + 1, values.len()),
            });
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter { name: "breaks", reason: "must be strictly increasing".into() });
        }
        Ok(Self { breaks, values })
    }

    /// Riemann data with a single jump at `x_jump`.
    pub fn riemann(left: f64, right: f64, x_jump: f64) -> Self {
        Self { breaks: vec![x_jump], values: vec![left, right] }
    }

    pub fn constant(c: f64) -> Self {
        Self { breaks: Vec::new(), values: vec![c] }
    }
}

impl InitialData for PiecewiseConstant {
    fn value(&self, x: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b <= x);
        self.values[i]
    }

    fn average(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        let start = self.breaks.partition_point(|&br| br <= a);
        for (i, &br) in self.breaks.iter().enumerate().skip(start) {
            if br >= b {
                break;
            }
            total += (br - lo) * self.values[i];
            lo = br;
        }
        let i = self.breaks.partition_point(|&br| br <= lo);
        total += (b - lo) * self.values[i];
        total / (b - a)
    }
}

const GAUSS5_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

/// 5-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let s: f64 = GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()).map(|(&x, &w)| w * f(mid + half * x)).sum();
    s * half
}

/// Grid geometry used to build an initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub x0: f64,
    pub dx: f64,
    pub n_cells: usize,
    pub boundary: Boundary,
}

impl Geometry {
    /// Geometry covering `[left, right]` with spacing `dx` (rounded to whole cells).
    pub fn covering(left: f64, right: f64, dx: f64, boundary: Boundary) -> Result<Self> {
        if !(right > left) {
            return Err(Error::InvalidParameter { name: "domain", reason: format!("empty domain [{left}, {right}]") });
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidParameter { name: "dx", reason: format!("must be positive, got {dx}") });
        }
        let n_cells = ((right - left) / dx).round().max(1.0) as usize;
        Ok(Self { x0: left, dx, n_cells, boundary })
    }
}

/// Cell averages `u_j = (1/dx) int_{I_j} u0`.
pub fn cell_average_init(u0: &dyn InitialData, geometry: &Geometry) -> Result<GridState> {
    let dx = geometry.dx;
    let mut values = Vec::with_capacity(geometry.n_cells);
    for j in 0..geometry.n_cells {
        let a = geometry.x0 + j as f64 * dx;
        let v = u0.average(a, a + dx);
        if !v.is_finite() {
            return Err(Error::NonFiniteInitial { cell: j });
        }
        values.push(v);
    }
    GridState::new(dx, geometry.x0, values, geometry.boundary)
}

/// States at increasing times; the field at time `t` is the last stored
/// state with `time <= t`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<GridState>,
}

impl Trajectory {
    pub fn new(states: Vec<GridState>) -> Self {
        Self { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> Option<&GridState> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&GridState> {
        self.states.last()
    }

    pub fn state_at(&self, t: f64) -> Option<&GridState> {
        let i = self.states.partition_point(|s| s.time <= t);
        if i == 0 {
            None
        } else {
            Some(&self.states[i - 1])
        }
    }

    pub fn reconstruct(&self, x: f64, t: f64) -> Option<f64> {
        self.state_at(t).map(|s| s.reconstruct(x))
    }
}
