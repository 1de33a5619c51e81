use std::collections::HashMap;

use super::mollifier::{signed_corner, signed_edge};
use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField};

/// Minimum number of grid cells across the mollifier radius.
pub const MIN_CELLS_PER_SIGMA: f64 = 8.0;

/// Signed index offset of `i` from the nearest arm and the orientation of
/// that arm: `sgn(sin x)` equals `orientation * sgn(offset)` near it.
fn arm_offset(n: usize, i: usize) -> (i64, f64) {
    let half = n / 2;
    let k = i % half;
    let arm = i - k;
    let (offset, arm) = if k <= n / 4 {
        (k as i64, arm)
    } else {
        (k as i64 - half as i64, arm + half)
    };
    let orientation = if arm % n == 0 { 1.0 } else { -1.0 };
    (offset, orientation)
}

fn sign_at(n: usize, i: usize) -> f64 {
    let (offset, orientation) = arm_offset(n, i);
    orientation * (offset.signum() as f64)
}

/// `sgn(x) sgn(y)` on the centered domain, zero on both axis lines.
pub fn singular_cross(grid: Grid) -> ScalarField {
    let n = grid.n();
    let s: Vec<f64> = (0..n).map(|i| sign_at(n, i)).collect();
    ScalarField::from_index_fn(grid, |i, j| s[i] * s[j])
}

/// The singular cross convolved with the unit-mass mollifier of radius
/// `sigma`. Points farther than `sigma` from both arms keep the exact value.
pub fn mollified_cross(grid: Grid, sigma: f64) -> Result<ScalarField> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "mollifier radius must lie in (0, 0.5), got {sigma}"
        )));
    }
    if sigma / grid.spacing() < MIN_CELLS_PER_SIGMA {
        return Err(Error::UnderResolved {
            what: "mollifier radius",
            required_n: Grid::required_for(sigma, MIN_CELLS_PER_SIGMA),
        });
    }
    let n = grid.n();
    let h = grid.spacing();
    let arms: Vec<(i64, f64)> = (0..n).map(|i| arm_offset(n, i)).collect();
    let within = |o: i64| (o.unsigned_abs() as f64) * h < sigma;

    // One factor per coordinate: exact sign far from the arm, mollified edge near it.
    let factor: Vec<f64> = arms
        .iter()
        .map(|&(o, orient)| {
            if within(o) {
                orient * signed_edge(o as f64 * h / sigma)
            } else {
                orient * o.signum() as f64
            }
        })
        .collect();

    // Corner values depend only on |offsets|; cache them.
    let reach = (sigma / h).ceil() as i64;
    let mut corner: HashMap<(i64, i64), f64> = HashMap::new();
    for a in 0..=reach {
        for b in a..=reach {
            if within(a) && within(b) {
                let v = signed_corner(a as f64 * h / sigma, b as f64 * h / sigma);
                corner.insert((a, b), v);
                corner.insert((b, a), v);
            }
        }
    }

    Ok(ScalarField::from_index_fn(grid, |i, j| {
        let (ox, sx) = arms[i];
        let (oy, sy) = arms[j];
        if within(ox) && within(oy) {
            let mag = corner[&(ox.abs(), oy.abs())];
            sx * sy * (ox.signum() * oy.signum()) as f64 * mag
        } else {
            factor[i] * factor[j]
        }
    }))
}
