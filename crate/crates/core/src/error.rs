use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("flux family `{family}` requires a linear advection flux")]
    IncompatibleFlux { family: &'static str },

    #[error("quadrature weights built for dx = {weights_dx} applied to a grid with dx = {state_dx}")]
    MeshMismatch { weights_dx: f64, state_dx: f64 },

    #[error(
        "CFL condition violated: dt/dx * (L1 + L2) = {ratio:.6} * {lipschitz_sum:.6} = {value:.6} > 1; \
         need dt/dx <= {bound:.6}"
    )]
    CflViolation { ratio: f64, lipschitz_sum: f64, value: f64, bound: f64 },

    #[error("non-finite value at step {step}, cell {cell}")]
    NonFinite { step: usize, cell: usize },

    #[error("non-finite initial sample in cell {cell}")]
    NonFiniteInitial { cell: usize },

    #[error("states are not one step apart: {0}")]
    NotConsecutive(String),

    #[error("window [{a}, {b}] lies outside the domain [{lo}, {hi}]")]
    WindowOutsideDomain { a: f64, b: f64, lo: f64, hi: f64 },

    #[error("grids do not nest: {0}")]
    NonNesting(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
