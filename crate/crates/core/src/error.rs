use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameter: {0}")]
    InvalidParams(String),

    #[error("number of sites must be even and at least 4, got {0}")]
    OddOrSmallChain(usize),

    #[error("integrator could not reach tolerance {tol:e} with {steps} steps per period")]
    StepUnderflow { tol: f64, steps: usize },

    #[error("state lives on a grid of {found} modes, expected {expected}")]
    GridMismatch { expected: usize, found: usize },

    #[error("site window [{start}, {end}] outside chain of {n_sites} sites")]
    InvalidWindow {
        start: usize,
        end: usize,
        n_sites: usize,
    },

    #[error("unphysical {what}: {value:e}")]
    Unphysical { what: &'static str, value: f64 },

    #[error("peak on the boundary of the sampled grid at h = {h}")]
    PeakOnBoundary { h: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("rescaled curves do not overlap")]
    NoOverlap,

    #[error("chain of {0} sites exceeds the exact-diagonalization cap of 12")]
    ChainTooLarge(usize),

    #[error("eigensolver did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
