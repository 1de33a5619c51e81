use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::fit::{linear_fit, RateFit};
use crate::error::{Error, Result};
use crate::initial::{make_bump, BumpSpec, ParameterLadder};
use crate::par;
use crate::spectral::{
    arm_distance_1d, bilinear, grad_sup_norm, hessian_sup_of_inverse_laplacian, inverse_laplacian_hessian, Grid,
    ScalarField, Spectrum,
};

/// Relative size of `p` allowed beyond one cell outside the arm layer.
pub const LEAK_TOLERANCE: f64 = 1e-9;

/// Angles sampled on each circle `|z| = r`.
pub const CIRCLE_SAMPLES: usize = 512;

/// Fraction of the cell `[c - h/2, c + h/2]` inside `[a, b]`, periodic.
fn cell_fraction(c: f64, h: f64, a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
        let (lo, hi) = (c + shift - 0.5 * h, c + shift + 0.5 * h);
        acc += (hi.min(b) - lo.max(a)).max(0.0);
    }
    acc / h
}

/// An even, zero-mean change of the singular cross confined to a layer of
/// width `tau` along the two arms through the origin: each arm's interface
/// is moved by `tau` to one side on one half of the arm and to the other
/// side on the other half. Values are `+-2` weighted by the covered cell
/// fraction, so the layer mass is exact on any grid.
pub fn displaced_interface_layer(grid: Grid, tau: f64) -> Result<ScalarField> {
    let h = grid.spacing();
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::InvalidArgument(format!("layer width must lie in (0, 0.5), got {tau}")));
    }
    if tau < h {
        return Err(Error::UnderResolved {
            what: "interface layer",
            required_n: Grid::required_for(tau, 1.0),
        });
    }
    let n = grid.n();
    let c: Vec<f64> = (0..n).map(|i| grid.centered(i)).collect();
    let frac = |i: usize, a: f64, b: f64| cell_fraction(c[i], h, a, b);
    let mut f = ScalarField::from_index_fn(grid, |i, j| {
        let vertical = frac(i, -tau, 0.0) * frac(j, 0.0, PI) + frac(i, 0.0, tau) * frac(j, -PI, 0.0);
        let horizontal = frac(j, 0.0, tau) * frac(i, 0.0, PI) + frac(j, -tau, 0.0) * frac(i, -PI, 0.0);
        2.0 * (vertical - horizontal)
    });
    f.remove_mean();
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusBound {
    pub radius: f64,
    /// `max_{|z| = r} |F| / r`.
    pub sup_over_r: f64,
    /// `max |F| d / (|z| tau |ln tau|)` over the circle points at distance
    /// `d >= 2 tau` from the arms; `None` if no point qualifies.
    pub bound_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationBounds {
    pub tau: f64,
    pub eps1: f64,
    pub radii: Vec<RadiusBound>,
    /// Largest Hessian entry of the inverse Laplacian over the whole grid.
    pub hessian_sup: f64,
    /// Same, restricted to points at least `eps1` from every arm.
    pub hessian_sup_away: f64,
    pub origin_value: f64,
    pub field_max: f64,
    /// `tau |ln tau| / eps1`, the predicted size of `|F| / |z|`.
    pub predicted_slope: f64,
    /// `tau / eps1^2`, the predicted Hessian size away from the arms.
    pub predicted_hessian: f64,
}

impl PerturbationBounds {
    /// `|F(0)| / max |F|`, zero when the field vanishes.
    pub fn origin_ratio(&self) -> f64 {
        if self.field_max == 0.0 {
            0.0
        } else {
            self.origin_value / self.field_max
        }
    }
}

/// `(d/dx, d/dy) Laplacian^{-1} p` as two fields, computed spectrally.
pub fn inverse_laplacian_gradient(p: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    p.require_zero_mean()?;
    Ok(gradient_of_potential(&p.spectrum()))
}

fn gradient_of_potential(spec: &Spectrum) -> (ScalarField, ScalarField) {
    let g = spec.grid();
    let i = Complex64::new(0.0, 1.0);
    let packed = spec.map_modes(|kx, ky, c| {
        let kk = g.wavenumber(kx).powi(2) + g.wavenumber(ky).powi(2);
        if kk == 0.0 {
            return Complex64::default();
        }
        let psi = -c / kk;
        let (k1, k2) = (g.derivative_wavenumber(kx), g.derivative_wavenumber(ky));
        i * k1 * psi + i * (i * k2 * psi)
    });
    packed.to_field_pair()
}

/// Sizes of `F = grad Laplacian^{-1} p` for a perturbation `p` of the cross
/// confined to the arm layer of width `tau`.
pub fn perturbation_field_bounds(
    p: &ScalarField,
    eps1: f64,
    tau: f64,
    radii: &[f64],
) -> Result<PerturbationBounds> {
    p.check_finite()?;
    p.require_zero_mean()?;
    if !(eps1 > 0.0 && tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need eps1 > 0 and tau > 0, got {eps1} and {tau}"
        )));
    }
    let grid = p.grid();
    let n = grid.n();
    let h = grid.spacing();
    let scale = p.sup_norm();
    let mut leak = (0.0, 0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            if grid.arm_distance(i, j) > tau + h && p.at(i, j).abs() > leak.0 {
                leak = (p.at(i, j).abs(), grid.coord(i), grid.coord(j));
            }
        }
    }
    if leak.0 > LEAK_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SupportLeak {
            leak: leak.0,
            x: leak.1,
            y: leak.2,
        });
    }

    let spec = p.spectrum();
    let (fx, fy) = gradient_of_potential(&spec);
    let radii = radii
        .iter()
        .map(|&r| {
            let scale = tau * tau.ln().abs();
            let (mut sup, mut constant) = (0.0f64, None::<f64>);
            for k in 0..CIRCLE_SAMPLES {
                let a = 2.0 * PI * k as f64 / CIRCLE_SAMPLES as f64;
                let (x, y) = (r * a.cos(), r * a.sin());
                let f = bilinear(&fx, x, y).hypot(bilinear(&fy, x, y));
                sup = sup.max(f);
                let d = arm_distance_1d(x).min(arm_distance_1d(y));
                if d >= 2.0 * tau {
                    let c = f * d / (r * scale);
                    constant = Some(constant.map_or(c, |m| m.max(c)));
                }
            }
            RadiusBound {
                radius: r,
                sup_over_r: sup / r,
                bound_constant: constant,
            }
        })
        .collect();
    let hess = inverse_laplacian_hessian(&spec);
    let away = par::row_max(n, |j| {
        (0..n)
            .filter(|&i| grid.arm_distance(i, j) >= eps1)
            .map(|i| {
                hess.xx
                    .at(i, j)
                    .abs()
                    .max(hess.xy.at(i, j).abs())
                    .max(hess.yy.at(i, j).abs())
            })
            .fold(0.0, f64::max)
    });
    let field_max = par::row_max(n, |j| {
        (0..n)
            .map(|i| fx.at(i, j).hypot(fy.at(i, j)))
            .fold(0.0, f64::max)
    });
    Ok(PerturbationBounds {
        tau,
        eps1,
        radii,
        hessian_sup: hess.sup(),
        hessian_sup_away: away,
        origin_value: fx.at(0, 0).hypot(fy.at(0, 0)),
        field_max,
        predicted_slope: tau * tau.ln().abs() / eps1,
        predicted_hessian: tau / (eps1 * eps1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpHessianRow {
    pub spec: BumpSpec,
    /// `||b||_2`
    pub omega: f64,
    /// `||grad b||_inf`
    pub gradient: f64,
    pub hessian: f64,
}

impl BumpHessianRow {
    /// `hessian / sqrt(gradient * omega)`
    pub fn constant(&self) -> f64 {
        self.hessian / (self.gradient * self.omega).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianScaling {
    pub rows: Vec<BumpHessianRow>,
    /// `ln hessian` against `ln omega`.
    pub fit: RateFit,
}

/// Scales support and height by `1/sqrt(2)` per step, which halves `||b||_2`
/// while holding the gradient fixed.
pub fn halving_family(base: BumpSpec, steps: usize) -> Vec<BumpSpec> {
    (0..=steps)
        .map(|k| {
            let s = 0.5f64.powf(0.5 * k as f64);
            BumpSpec {
                center: base.center,
                support_diameter: base.support_diameter * s,
                height: base.height * s,
            }
        })
        .collect()
}

/// Measures the Hessian sup of `Laplacian^{-1} b` across a bump family and
/// regresses its logarithm on `ln ||b||_2`.
pub fn bump_hessian_scaling(
    bumps: &[BumpSpec],
    grid: Grid,
    ladder: &ParameterLadder,
) -> Result<HessianScaling> {
    if bumps.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "hessian scaling needs at least two bumps, got {}",
            bumps.len()
        )));
    }
    let rows = par::map_slice(bumps, |spec| -> Result<BumpHessianRow> {
        let b = make_bump(grid, spec, ladder)?;
        Ok(BumpHessianRow {
            spec: *spec,
            omega: b.lp_norm(2.0),
            gradient: grad_sup_norm(&b)?,
            hessian: hessian_sup_of_inverse_laplacian(&b)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.omega.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.hessian.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(HessianScaling { rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{resolve_ladder_with, LadderMode, LadderOverrides};

    #[test]
    fn layer_is_even_zero_mean_and_confined() {
        let g = Grid::new(256).unwrap();
        let tau = 0.1;
        let p = displaced_interface_layer(g, tau).unwrap();
        assert!(p.mean().abs() < 1e-15);
        assert!(p.evenness_defect() < 1e-15);
        assert!(p.sup_norm() <= 2.0 + 1e-12);
        for j in 0..256 {
            for i in 0..256 {
                if g.arm_distance(i, j) > tau + g.spacing() {
                    assert!(p.at(i, j).abs() < 1e-15);
                }
            }
        }
        // positive mass on the vertical arm equals 2 tau (2 pi)
        let mass: f64 = (0..256)
            .flat_map(|j| (0..256).map(move |i| (i, j)))
            .filter(|&(i, j)| g.centered(i).abs() < 0.5 && g.centered(j).abs() > 0.5)
            .map(|(i, j)| p.at(i, j))
            .sum::<f64>()
            * g.cell_area();
        let rows = (0..256).filter(|&j| g.centered(j).abs() > 0.5).count();
        let expect = 2.0 * tau * rows as f64 * g.spacing();
        assert!((mass - expect).abs() < 1e-3, "{mass} {expect}");
    }

    #[test]
    fn zero_perturbation_has_zero_bounds() {
        let g = Grid::new(64).unwrap();
        let b = perturbation_field_bounds(&ScalarField::zeros(g), 0.3, 0.1, &[0.2, 0.5]).unwrap();
        assert!(b.radii.iter().all(|r| r.sup_over_r == 0.0));
        assert_eq!(b.hessian_sup, 0.0);
        assert_eq!(b.origin_ratio(), 0.0);
    }

    #[test]
    fn field_vanishes_at_origin_and_obeys_the_distance_bound() {
        let g = Grid::new(1024).unwrap();
        let tau = 0.01;
        let p = displaced_interface_layer(g, tau).unwrap();
        // two decades of radii, all with circle points off the layer
        let radii: Vec<f64> = (0..9).map(|k| 0.03 * 10f64.powf(k as f64 / 4.0)).collect();
        let b = perturbation_field_bounds(&p, 0.3, tau, &radii).unwrap();
        assert!(b.origin_ratio() < 1e-12, "{}", b.origin_ratio());
        let cs: Vec<f64> = b.radii.iter().map(|r| r.bound_constant.unwrap()).collect();
        let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cs.iter().copied().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi < 2.0 && hi / lo < 10.0, "{cs:?}");
    }

    #[test]
    fn gradient_matches_direct_derivative_of_cosines() {
        // p = cos x cos 2y: Laplacian^{-1} p = -p / 5
        let g = Grid::new(64).unwrap();
        let p = ScalarField::from_fn(g, |x, y| x.cos() * (2.0 * y).cos());
        let (fx, fy) = inverse_laplacian_gradient(&p).unwrap();
        for j in 0..64 {
            for i in 0..64 {
                let (x, y) = (g.coord(i), g.coord(j));
                assert!((fx.at(i, j) - x.sin() * (2.0 * y).cos() / 5.0).abs() < 1e-13);
                assert!((fy.at(i, j) - 2.0 * x.cos() * (2.0 * y).sin() / 5.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn leaking_support_is_rejected() {
        let g = Grid::new(64).unwrap();
        let mut p = ScalarField::from_fn(g, |x, y| x.cos() * y.cos());
        p.remove_mean();
        assert!(matches!(
            perturbation_field_bounds(&p, 0.3, 0.1, &[0.5]),
            Err(Error::SupportLeak { .. })
        ));
    }

    fn wide_ladder() -> ParameterLadder {
        let o = LadderOverrides {
            eps2: Some(0.9),
            eps1: Some(1e-3),
            tau: Some(2e-4),
            sigma: Some(1e-4),
            upsilon: Some(1e-5),
            confinement_exponent: Some(1.0),
        };
        resolve_ladder_with(1.0, 10.0, LadderMode::Relaxed, &o).unwrap()
    }

    #[test]
    fn hessian_scaling_of_halving_family() {
        let g = Grid::new(512).unwrap();
        let base = BumpSpec {
            center: (0.2, 0.72),
            support_diameter: 0.26,
            height: 1.0,
        };
        let fam = halving_family(base, 2);
        let s = bump_hessian_scaling(&fam, g, &wide_ladder()).unwrap();
        assert!((s.fit.slope - 0.5).abs() < 0.1, "{:?}", s.fit);
        for r in &s.rows {
            assert!(r.constant() < 10.0);
        }
        let g0 = s.rows[0].gradient;
        assert!(s.rows.iter().all(|r| (r.gradient / g0 - 1.0).abs() < 0.1));
    }

    #[test]
    fn unresolved_family_member_is_rejected() {
        let g = Grid::new(128).unwrap();
        let base = BumpSpec {
            center: (0.2, 0.72),
            support_diameter: 0.26,
            height: 1.0,
        };
        assert!(matches!(
            bump_hessian_scaling(&halving_family(base, 3), g, &wide_ladder()),
            Err(Error::UnderResolved { .. })
        ));
    }
}
