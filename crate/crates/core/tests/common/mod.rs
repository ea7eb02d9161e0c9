#![allow(dead_code)]

use nonlocal_core::{Boundary, GridState, TwoPointFlux};
use nonlocal_core::flux::LocalFlux;
use rand::Rng;

/// Piecewise constant values in `[lo, hi]` with a random number of plateaus,
/// plus a little cell-level noise.
pub fn random_bv(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let pieces = rng.random_range(1..=12);
    let mut cuts: Vec<usize> = (0..pieces - 1).map(|_| rng.random_range(0..n)).collect();
    cuts.sort_unstable();
    let levels: Vec<f64> = (0..pieces).map(|_| rng.random_range(lo..=hi)).collect();
    let noise = 0.05 * (hi - lo);
    let mut out = Vec::with_capacity(n);
    let mut piece = 0;
    for j in 0..n {
        while piece < cuts.len() && j >= cuts[piece] {
            piece += 1;
        }
        let jitter = if rng.random_bool(0.2) { rng.random_range(-noise..=noise) } else { 0.0 };
        out.push((levels[piece] + jitter).clamp(lo, hi));
    }
    out
}

pub fn state(values: Vec<f64>, dx: f64, boundary: Boundary) -> GridState {
    GridState::new(dx, 0.0, values, boundary).unwrap()
}

pub fn random_boundary(rng: &mut impl Rng) -> Boundary {
    if rng.random_bool(0.5) {
        Boundary::Periodic
    } else {
        Boundary::ConstantExtension
    }
}

/// A monotone flux on `[-1, 1]`: Burgers or cubic with Godunov, EO or LF,
/// or linear advection with upwinding.
pub fn random_flux(rng: &mut impl Rng) -> TwoPointFlux {
    let local = match rng.random_range(0..3) {
        0 => LocalFlux::Burgers,
        1 => LocalFlux::Cubic,
        _ => LocalFlux::LinearAdvection { speed: rng.random_range(-1.5..=1.5) },
    };
    match rng.random_range(0..4) {
        0 => TwoPointFlux::godunov(local),
        1 => TwoPointFlux::engquist_osher(local),
        2 => TwoPointFlux::lax_friedrichs(local, 0.5).unwrap(),
        _ => match local {
            LocalFlux::LinearAdvection { speed } => TwoPointFlux::upwind(speed).unwrap(),
            _ => TwoPointFlux::godunov(local),
        },
    }
}

/// Largest stable `dt / dx` for the flux on `[-1, 1]`.
pub fn max_ratio(flux: &TwoPointFlux) -> f64 {
    let (l1, l2) = flux.lipschitz_box_bound(-1.0, 1.0).unwrap();
    if l1 + l2 > 0.0 { 1.0 / (l1 + l2) } else { 1.0 }
}
