//! Leapfrog stepping of the depth-weighted staggered grid.

pub mod diagnostics;
mod kernel;
mod pulse;
mod run;
mod state;

pub use kernel::{KernelMode, Stepper};
pub use pulse::{blackman_transition, make_pulse, ExcitationSignal, PulseSpec};
pub use run::{run, run_parallel, time_stepping, ProbeRecords, SimParams};
pub use state::{Axis, BoundaryField, FieldState, WallForm};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dt = {dt:e} s exceeds the stability bound {limit:e} s")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite field value detected at step {step}")]
    Divergence { step: u64 },
    #[error("probe ({i}, {j}) is not on an air cell")]
    ProbeOffAir { i: usize, j: usize },
    #[error("excitation has {len} samples, {needed} steps requested")]
    ExcitationTooShort { len: usize, needed: usize },
    #[error("domain: {0}")]
    Domain(String),
}

/// Largest stable time step of the 2D staggered scheme, `ds / (√2 c)`.
pub fn max_stable_dt(ds: f64, c: f64) -> Result<f64, SolverError> {
    if !(ds > 0.0 && c > 0.0 && ds.is_finite() && c.is_finite()) {
        return Err(SolverError::InvalidParameter(format!(
            "ds and c must be positive, got ds = {ds}, c = {c}"
        )));
    }
    Ok(ds / (std::f64::consts::SQRT_2 * c))
}
