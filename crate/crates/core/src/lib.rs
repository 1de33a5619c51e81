//! Numerical laboratory for double-exponential growth of the vorticity
//! gradient in 2D incompressible Euler on the torus.
//!
//! * [`spectral`]: pseudo-spectral vorticity solver and spectral norms.
//! * [`initial`]: singular and mollified cross, steep bumps, parameter ladder.
//! * [`model`]: the singular-cross velocity field, perturbed model system and
//!   its variational equations.
//! * [`diagnostics`]: fits, envelopes, polyline stretching and growth probes.

pub mod diagnostics;
pub mod error;
pub mod initial;
pub mod model;
pub mod par;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
