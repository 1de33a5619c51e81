//! Steep zero-mean bump pairs placed symmetrically about the origin.

use std::f64::consts::E;

use super::ladder::ParameterLadder;
use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField};

/// Minimum number of grid cells across the support diameter.
pub const MIN_CELLS_PER_SUPPORT: f64 = 8.0;

/// Max over `s` of `|q'(s)|` for the radial profile `q` below, with the
/// continuum ring coefficient.
pub const PROFILE_SLOPE: f64 = 2.925_450_481;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    /// Center of the copy in the first quadrant, centered coordinates.
    pub center: (f64, f64),
    /// Diameter of the support disc.
    pub support_diameter: f64,
    /// Peak value; negative heights flip the sign of the whole pair.
    pub height: f64,
}

impl BumpSpec {
    pub fn radius(&self) -> f64 {
        0.5 * self.support_diameter
    }

    /// Expected scale of `max |grad b|`: `|height| / diameter` times this.
    pub fn slope_constant() -> f64 {
        2.0 * PROFILE_SLOPE
    }

    pub fn expected_gradient(&self) -> f64 {
        Self::slope_constant() * self.height.abs() / self.support_diameter
    }
}

#[inline]
fn core(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s2)).exp()
    }
}

/// Work region `{y > sqrt(x), x > eps1, y < eps2}` membership for a point.
fn in_work_region(ladder: &ParameterLadder, x: f64, y: f64) -> bool {
    y > 0.0 && y * y > x && x > ladder.eps1() && y < ladder.eps2()
}

/// Builds `b(z) + b(-z)` with `b` a radial profile `e * exp(-1/(1-s^2)) (1 - a s^2)`
/// at the grid point nearest `spec.center`. The ring coefficient `a` is fixed
/// from the discrete grid sums so each copy has zero mean on the grid.
pub fn make_bump(grid: Grid, spec: &BumpSpec, ladder: &ParameterLadder) -> Result<ScalarField> {
    let h = grid.spacing();
    let r = spec.radius();
    if !(r > 0.0 && spec.height.is_finite() && spec.height != 0.0) {
        return Err(Error::InvalidArgument(format!("degenerate bump {spec:?}")));
    }
    if spec.support_diameter / h < MIN_CELLS_PER_SUPPORT {
        return Err(Error::UnderResolved {
            what: "bump support",
            required_n: Grid::required_for(spec.support_diameter, MIN_CELLS_PER_SUPPORT),
        });
    }
    let (cx, cy) = spec.center;
    if !ladder.initial_set_contains(cx, cy) {
        return Err(Error::OutsideRegion {
            x: cx,
            y: cy,
            region: "the admissible initial set",
        });
    }
    // Support must sit in the work region; the region is not convex, so scan
    // a polar lattice over the whole disc.
    for a in 0..=32 {
        let rho = r * a as f64 / 32.0;
        for b in 0..128 {
            let phi = std::f64::consts::TAU * b as f64 / 128.0;
            let (x, y) = (cx + rho * phi.cos(), cy + rho * phi.sin());
            if !in_work_region(ladder, x, y) {
                return Err(Error::OutsideRegion {
                    x,
                    y,
                    region: "the work region (bump support)",
                });
            }
        }
    }

    let n = grid.n();
    // Snap so the peak sample is exactly the height.
    let ci = (cx / h).round();
    let cj = (cy / h).round();
    let reach = (r / h).ceil() as i64;

    // Ring coefficient from the discrete moments of one copy.
    let (mut m0, mut m2) = (0.0, 0.0);
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let s2 = ((di * di + dj * dj) as f64) * h * h / (r * r);
            let c = core(s2);
            m0 += c;
            m2 += c * s2;
        }
    }
    let ring = m0 / m2;
    let profile = |dx: f64, dy: f64| {
        let s2 = (dx * dx + dy * dy) / (r * r);
        spec.height * E * core(s2) * (1.0 - ring * s2)
    };

    let mut out = ScalarField::zeros(grid);
    let values = out.values_mut();
    let (ci, cj) = (ci as i64, cj as i64);
    let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let (dx, dy) = (di as f64 * h, dj as f64 * h);
            let v = profile(dx, dy);
            if v == 0.0 {
                continue;
            }
            values[grid.index(wrap(ci + di), wrap(cj + dj))] += v;
            values[grid.index(wrap(-ci - di), wrap(-cj - dj))] += v;
        }
    }
    Ok(out)
}
