//! Local fluxes `f`, monotone two-point fluxes `g` and the nonlocal entropy flux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical flux `f(u)` of the local conservation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalFlux {
    /// `f(u) = u^2 / 2`
    Burgers,
    /// `f(u) = speed * u`
    LinearAdvection { speed: f64 },
    /// `f(u) = u^3 / 3`, convex on one side of zero and concave on the other.
    Cubic,
}

impl LocalFlux {
    pub fn key(&self) -> &'static str {
        match self {
            LocalFlux::Burgers => "burgers",
            LocalFlux::LinearAdvection { .. } => "linear_advection",
            LocalFlux::Cubic => "cubic",
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match *self {
            LocalFlux::Burgers => 0.5 * u * u,
            LocalFlux::LinearAdvection { speed } => speed * u,
            LocalFlux::Cubic => u * u * u / 3.0,
        }
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        match *self {
            LocalFlux::Burgers => u,
            LocalFlux::LinearAdvection { speed } => speed,
            LocalFlux::Cubic => u * u,
        }
    }

    /// `(min f', max f')` over `[lo, hi]`.
    pub fn df_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match *self {
            LocalFlux::Burgers => (lo, hi),
            LocalFlux::LinearAdvection { speed } => (speed, speed),
            LocalFlux::Cubic => {
                let top = (lo * lo).max(hi * hi);
                let bottom = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { (lo * lo).min(hi * hi) };
                (bottom, top)
            }
        }
    }

    /// Points where `f'` vanishes (candidates for interior extrema).
    fn critical_point(&self) -> Option<f64> {
        match self {
            LocalFlux::Burgers | LocalFlux::Cubic => Some(0.0),
            LocalFlux::LinearAdvection { .. } => None,
        }
    }

    /// Increasing part of the Engquist-Osher splitting, `f(0) + int_0^u max(f', 0)`.
    #[inline]
    fn f_plus(&self, u: f64) -> f64 {
        match *self {
            LocalFlux::Burgers => {
                let p = u.max(0.0);
                0.5 * p * p
            }
            LocalFlux::LinearAdvection { speed } => speed.max(0.0) * u,
            LocalFlux::Cubic => u * u * u / 3.0,
        }
    }

    /// Decreasing part of the Engquist-Osher splitting, `int_0^u min(f', 0)`.
    #[inline]
    fn f_minus(&self, u: f64) -> f64 {
        match *self {
            LocalFlux::Burgers => {
                let m = u.min(0.0);
                0.5 * m * m
            }
            LocalFlux::LinearAdvection { speed } => speed.min(0.0) * u,
            LocalFlux::Cubic => 0.0,
        }
    }
}

/// Numerical flux family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FluxFamily {
    Godunov,
    /// `lambda` is a fixed flux parameter; monotone when `lambda * max|f'| <= 1`.
    LaxFriedrichs { lambda: f64 },
    EngquistOsher,
    /// Upwinding for linear advection only.
    UpwindLinear,
}

impl FluxFamily {
    pub const KEYS: [&'static str; 4] = ["godunov", "lax_friedrichs", "engquist_osher", "upwind_linear"];

    pub fn key(&self) -> &'static str {
        match self {
            FluxFamily::Godunov => "godunov",
            FluxFamily::LaxFriedrichs { .. } => "lax_friedrichs",
            FluxFamily::EngquistOsher => "engquist_osher",
            FluxFamily::UpwindLinear => "upwind_linear",
        }
    }
}

/// A two-point flux `g(a, b)` built from a local flux and a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointFlux {
    pub local: LocalFlux,
    pub family: FluxFamily,
}

impl TwoPointFlux {
    pub fn new(local: LocalFlux, family: FluxFamily) -> Result<Self> {
        match family {
            FluxFamily::UpwindLinear if !matches!(local, LocalFlux::LinearAdvection { .. }) => {
                return Err(Error::IncompatibleFlux { family: "upwind_linear" })
            }
            FluxFamily::LaxFriedrichs { lambda } if !(lambda.is_finite() && lambda > 0.0) => {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    reason: format!("Lax-Friedrichs parameter must be positive, got {lambda}"),
                })
            }
            _ => {}
        }
        if let LocalFlux::LinearAdvection { speed } = local {
            if !speed.is_finite() {
                return Err(Error::InvalidParameter { name: "speed", reason: "must be finite".into() });
            }
        }
        Ok(Self { local, family })
    }

    pub fn godunov(local: LocalFlux) -> Self {
        Self { local, family: FluxFamily::Godunov }
    }

    pub fn engquist_osher(local: LocalFlux) -> Self {
        Self { local, family: FluxFamily::EngquistOsher }
    }

    pub fn lax_friedrichs(local: LocalFlux, lambda: f64) -> Result<Self> {
        Self::new(local, FluxFamily::LaxFriedrichs { lambda })
    }

    pub fn upwind(speed: f64) -> Result<Self> {
        Self::new(LocalFlux::LinearAdvection { speed }, FluxFamily::UpwindLinear)
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.local.f(u)
    }

    /// `g(a, b)`.
    #[inline]
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match self.family {
            FluxFamily::Godunov => self.godunov_eval(a, b).0,
            FluxFamily::LaxFriedrichs { lambda } => {
                0.5 * (self.local.f(a) + self.local.f(b)) - (b - a) / (2.0 * lambda)
            }
            FluxFamily::EngquistOsher => self.local.f_plus(a) + self.local.f_minus(b),
            FluxFamily::UpwindLinear => {
                let LocalFlux::LinearAdvection { speed } = self.local else { unreachable!() };
                if speed >= 0.0 {
                    speed * a
                } else {
                    speed * b
                }
            }
        }
    }

    /// Godunov value and which point realizes the extremum: 0 = `a`, 1 = `b`, 2 = interior.
    #[inline]
    fn godunov_eval(&self, a: f64, b: f64) -> (f64, u8) {
        let fa = self.local.f(a);
        let fb = self.local.f(b);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let interior = self.local.critical_point().filter(|&c| c > lo && c < hi);
        if a <= b {
            let (mut best, mut at) = if fa <= fb { (fa, 0) } else { (fb, 1) };
            if let Some(c) = interior {
                let fc = self.local.f(c);
                if fc < best {
                    best = fc;
                    at = 2;
                }
            }
            (best, at)
        } else {
            let (mut best, mut at) = if fa >= fb { (fa, 0) } else { (fb, 1) };
            if let Some(c) = interior {
                let fc = self.local.f(c);
                if fc > best {
                    best = fc;
                    at = 2;
                }
            }
            (best, at)
        }
    }

    /// Closed-form partial derivatives `(dg/da, dg/db)`; one-sided on kink sets.
    pub fn partials(&self, a: f64, b: f64) -> (f64, f64) {
        match self.family {
            FluxFamily::Godunov => {
                if a == b {
                    let d = self.local.df(a);
                    return (d.max(0.0), d.min(0.0));
                }
                match self.godunov_eval(a, b).1 {
                    0 => (self.local.df(a), 0.0),
                    1 => (0.0, self.local.df(b)),
                    _ => (0.0, 0.0),
                }
            }
            FluxFamily::LaxFriedrichs { lambda } => (
                0.5 * self.local.df(a) + 0.5 / lambda,
                0.5 * self.local.df(b) - 0.5 / lambda,
            ),
            FluxFamily::EngquistOsher => (self.local.df(a).max(0.0), self.local.df(b).min(0.0)),
            FluxFamily::UpwindLinear => {
                let LocalFlux::LinearAdvection { speed } = self.local else { unreachable!() };
                (speed.max(0.0), speed.min(0.0))
            }
        }
    }

    /// Kruzkov entropy flux `q(a, b; c) = g(a v c, b v c) - g(a ^ c, b ^ c)`.
    #[inline]
    pub fn entropy_flux(&self, a: f64, b: f64, c: f64) -> f64 {
        self.eval(a.max(c), b.max(c)) - self.eval(a.min(c), b.min(c))
    }

    /// Upper bounds `(L1, L2)` for `sup |g_1|` and `sup |g_2|` over `[b1, b2]^2`.
    pub fn lipschitz_box_bound(&self, b1: f64, b2: f64) -> Result<(f64, f64)> {
        if b1.is_nan() || b2.is_nan() || b1 > b2 {
            return Err(Error::InvalidInterval { a: b1, b: b2 });
        }
        let (lo, hi) = self.local.df_range(b1, b2);
        Ok(match self.family {
            FluxFamily::Godunov | FluxFamily::EngquistOsher | FluxFamily::UpwindLinear => {
                (hi.max(0.0), (-lo).max(0.0))
            }
            FluxFamily::LaxFriedrichs { lambda } => {
                let s = 0.5 / lambda;
                let l1 = (0.5 * lo + s).abs().max((0.5 * hi + s).abs());
                let l2 = (0.5 * lo - s).abs().max((0.5 * hi - s).abs());
                (l1, l2)
            }
        })
    }

    /// Lax-Friedrichs monotonicity requirement `lambda * max|f'| <= 1` on the box.
    pub fn check_monotone_on(&self, b1: f64, b2: f64) -> Result<()> {
        if let FluxFamily::LaxFriedrichs { lambda } = self.family {
            let (lo, hi) = self.local.df_range(b1.min(b2), b1.max(b2));
            let speed = lo.abs().max(hi.abs());
            if lambda * speed > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    reason: format!(
                        "Lax-Friedrichs flux is not monotone on [{b1}, {b2}]: lambda * max|f'| = {} > 1",
                        lambda * speed
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Sampled bound: `sup |g_i|` over a 101 x 101 grid of the box, times 1.05.
pub fn sampled_lipschitz_bound(flux: &TwoPointFlux, b1: f64, b2: f64) -> Result<(f64, f64)> {
    if b1.is_nan() || b2.is_nan() || b1 > b2 {
        return Err(Error::InvalidInterval { a: b1, b: b2 });
    }
    const N: usize = 101;
    let at = |i: usize| b1 + (b2 - b1) * i as f64 / (N - 1) as f64;
    let mut l1 = 0.0f64;
    let mut l2 = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            let (g1, g2) = flux.partials(at(i), at(j));
            l1 = l1.max(g1.abs());
            l2 = l2.max(g2.abs());
        }
    }
    Ok((1.05 * l1, 1.05 * l2))
}

/// Sign with `sgn(0) = 1`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Local Kruzkov entropy flux `sgn(u - c) (f(u) - f(c))`.
pub fn local_entropy_flux(local: &LocalFlux, u: f64, c: f64) -> f64 {
    sgn(u - c) * (local.f(u) - local.f(c))
}
