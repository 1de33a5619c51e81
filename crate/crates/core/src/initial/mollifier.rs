//! The unit-mass radial mollifier `omega(r) = exp(-1/(1 - r^2)) / Z` on the
//! unit disc and the signed integrals needed to convolve it with the cross.

use std::sync::OnceLock;

use crate::quad::Rule;

const RULE_POINTS: usize = 96;

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::new(RULE_POINTS))
}

#[inline]
fn profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Unnormalized mass of `profile` over the quarter disc `[0,a] x [0,b]`.
fn quarter_mass(a: f64, b: f64) -> f64 {
    let a = a.clamp(0.0, 1.0);
    let b = b.clamp(0.0, 1.0);
    rule().integrate(0.0, a, |s| {
        let top = (1.0 - s * s).max(0.0).sqrt().min(b);
        rule().integrate(0.0, top, |t| profile(s * s + t * t))
    })
}

fn total_mass() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| 4.0 * quarter_mass(1.0, 1.0))
}

/// Value of the normalized mollifier at radius `r` (unit support).
pub fn density(r: f64) -> f64 {
    profile(r * r) / total_mass()
}

/// `int omega(a, b) sgn(x - a) sgn(y - b) da db` for the unit mollifier,
/// i.e. the mollified product of signs. Odd in each argument.
pub fn signed_corner(x: f64, y: f64) -> f64 {
    let v = 4.0 * quarter_mass(x.abs(), y.abs()) / total_mass();
    let v = v.min(1.0);
    x.signum() * y.signum() * if x == 0.0 || y == 0.0 { 0.0 } else { v }
}

/// `int omega(a, b) sgn(x - a) da db`, the mollified sign of one coordinate.
pub fn signed_edge(x: f64) -> f64 {
    signed_corner(x, 1.0)
}
