//! Initial data: the singular cross, its mollification, steep bump pairs and
//! the parameter ladder that fixes their sizes.

mod bump;
mod cross;
mod ladder;
pub mod mollifier;

pub use bump::{make_bump, BumpSpec, MIN_CELLS_PER_SUPPORT, PROFILE_SLOPE};
pub use cross::{mollified_cross, singular_cross, MIN_CELLS_PER_SIGMA};
pub use ladder::{
    faithful_confinement_exponent, relaxed_confinement_exponent, resolve_ladder,
    resolve_ladder_with, ConstraintCheck, LadderMode, LadderOverrides, ParameterLadder,
    RELAXED_FLOOR_LOG10, SLACK_DECADES,
};

use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField};

/// Strict upper bound on the sup norm of composed data.
pub const SUP_BOUND: f64 = 2.0;

/// Mollified cross (radius from the ladder) plus the bump pair.
pub fn compose_initial_data(
    grid: Grid,
    ladder: &ParameterLadder,
    spec: &BumpSpec,
) -> Result<ScalarField> {
    let cross = mollified_cross(grid, ladder.sigma())?;
    let bump = make_bump(grid, spec, ladder)?;
    let theta = cross.add(&bump)?;
    let sup = theta.sup_norm();
    if sup >= SUP_BOUND {
        return Err(Error::InvalidArgument(format!(
            "composed data has sup norm {sup} >= {SUP_BOUND}"
        )));
    }
    theta.require_zero_mean()?;
    Ok(theta)
}
