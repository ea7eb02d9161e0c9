//! Interaction kernels and the quadrature weights of the horizon integral.
//!
//! A kernel is a horizon `delta` together with a unit-mass profile `rho` on
//! `[0, 1]`; the scaled density is `omega(h) = rho(h / delta) / delta`,
//! supported on `[0, delta]`. Every profile carries a closed-form
//! antiderivative so that all partial masses are exact up to round-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized profile `rho` on `[0, 1]` with unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `rho(s) = 1`
    Uniform,
    /// `rho(s) = 2 (1 - s)`
    #[serde(alias = "triangular_decreasing")]
    Triangular,
    /// `rho(s) = 3 (1 - s)^2`
    Quadratic,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Uniform, Profile::Triangular, Profile::Quadratic];

    pub fn key(self) -> &'static str {
        match self {
            Profile::Uniform => "uniform",
            Profile::Triangular => "triangular",
            Profile::Quadratic => "quadratic",
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "uniform" => Ok(Profile::Uniform),
            "triangular" | "triangular_decreasing" => Ok(Profile::Triangular),
            "quadratic" => Ok(Profile::Quadratic),
            other => Err(Error::Config(format!(
                "unknown kernel profile `{other}`; valid keys: uniform, triangular, quadratic"
            ))),
        }
    }

    /// Density on `[0, 1]`, zero elsewhere.
    pub fn density(self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        match self {
            Profile::Uniform => 1.0,
            Profile::Triangular => 2.0 * (1.0 - s),
            Profile::Quadratic => 3.0 * (1.0 - s) * (1.0 - s),
        }
    }

    /// Antiderivative `P(s) = int_0^s rho`, clamped so that `P(0) = 0`, `P(1) = 1`.
    pub fn antiderivative(self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Profile::Uniform => s,
            Profile::Triangular => s * (2.0 - s),
            Profile::Quadratic => {
                let t = 1.0 - s;
                1.0 - t * t * t
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub delta: f64,
    pub profile: Profile,
}

impl Kernel {
    pub fn new(delta: f64, profile: Profile) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("horizon must be positive and finite, got {delta}"),
            });
        }
        Ok(Self { delta, profile })
    }

    /// `omega(h) = rho(h / delta) / delta`.
    pub fn density(&self, h: f64) -> f64 {
        self.profile.density(h / self.delta) / self.delta
    }

    /// Exact partial mass `int_a^b omega(h) dh` with the limits clamped to `[0, delta]`.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() || a < 0.0 || a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        if a == b {
            return Ok(0.0);
        }
        let lo = a.min(self.delta) / self.delta;
        let hi = b.min(self.delta) / self.delta;
        Ok(self.profile.antiderivative(hi) - self.profile.antiderivative(lo))
    }

    /// Total mass, which is one for every shipped profile.
    pub fn total_mass(&self) -> f64 {
        self.profile.antiderivative(1.0) - self.profile.antiderivative(0.0)
    }
}

/// Weights `W_1 .. W_{max(r, 1)}` for a `(dx, delta)` pair, `r = floor(delta / dx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureWeights {
    pub dx: f64,
    pub delta: f64,
    pub r: usize,
    pub weights: Vec<f64>,
}

impl QuadratureWeights {
    /// Number of stencil offsets, `max(r, 1)`.
    pub fn width(&self) -> usize {
        self.weights.len()
    }

    /// `W_k` for `k` in `1..=width()`.
    pub fn get(&self, k: usize) -> f64 {
        self.weights[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().enumerate().map(|(i, &w)| (i + 1, w))
    }

    /// `dx * sum_k k W_k`, which should equal one.
    pub fn moment(&self) -> f64 {
        self.dx * self.iter().map(|(k, w)| k as f64 * w).sum::<f64>()
    }
}

/// Builds the weights: each `W_k` is the mass of `omega` on cell
/// `[(k-1) dx, k dx)` divided by `k dx`, and the tail mass on `[r dx, delta]`
/// is lumped into `W_r` scaled by `1 / (max(r,1) dx)`.
pub fn compute_weights(kernel: &Kernel, dx: f64) -> Result<QuadratureWeights> {
    if !(dx.is_finite() && dx > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dx",
            reason: format!("grid spacing must be positive and finite, got {dx}"),
        });
    }
    let ratio = kernel.delta / dx;
    if ratio > 1e8 {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("delta / dx = {ratio} is too large a stencil"),
        });
    }
    let r = ratio.floor() as usize;
    let width = r.max(1);
    let tail = kernel.mass(r as f64 * dx, kernel.delta.max(r as f64 * dx))?;

    let mut weights = Vec::with_capacity(width);
    for k in 1..=width {
        let kf = k as f64;
        let mut w = kernel.mass((kf - 1.0) * dx, kf * dx)? / (kf * dx);
        if k == r {
            w += tail / (width as f64 * dx);
        }
        weights.push(w);
    }
    Ok(QuadratureWeights { dx, delta: kernel.delta, r, weights })
}
