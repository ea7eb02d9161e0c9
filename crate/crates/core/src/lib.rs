//! Monotone forward-in-time solver for the nonlocal pair-interaction
//! conservation law
//!
//! ```text
//! u_t + int_0^delta [g(u, u(. + h)) - g(u(. - h), u)] / h * omega_delta(h) dh = 0
//! ```
//!
//! with its discrete invariants (maximum principle, TVD, conservation,
//! L1 contraction, cell entropy inequality) and refinement studies for the
//! fixed-horizon and joint local limits.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod grid;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod reference;
pub mod scheme;

pub use error::{Error, Result};
pub use flux::{FluxFamily, LocalFlux, TwoPointFlux};
pub use grid::{Boundary, GridState, InitialData, PiecewiseConstant, Trajectory};
pub use kernel::{compute_weights, Kernel, Profile, QuadratureWeights};
pub use scheme::{step, step_conservative_form, OutputSchedule, SchemeConfig, Solver, Workers};
