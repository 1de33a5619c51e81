//! Pseudo-spectral vorticity solver on the `2pi`-periodic torus and the
//! spectral norm and derivative evaluators shared with the diagnostics.

mod fft;
mod field;
mod grid;
mod norms;
mod snapshot;
mod solver;

pub use fft::Fft2;
pub use field::{bilinear, ScalarField, Spectrum, VelocityField, MEAN_TOLERANCE};
pub use grid::{arm_distance_1d, Grid};
pub use norms::{
    conserved_quantities, grad_sup_norm, h2_norm, hessian_sup_of_inverse_laplacian, Conserved,
    Hessian,
};
pub(crate) use norms::inverse_laplacian_hessian;
pub use snapshot::Snapshot;
pub use solver::{
    admissible_dt, run, run_recording, step_rk4, velocity_from_vorticity, Quantity, RunParams,
    RunStats, SimState, CFL_LIMIT, MAX_RUN_CFL,
};
