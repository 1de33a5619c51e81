use rustfft::num_complex::Complex64;

use super::field::{ScalarField, Spectrum};
use super::solver::{velocity_from_vorticity, SimState};
use crate::error::Result;
use crate::par;

/// `max |grad f|` over the grid, derivatives taken spectrally.
pub fn grad_sup_norm(f: &ScalarField) -> Result<f64> {
    f.check_finite()?;
    Ok(grad_sup_norm_of(&f.spectrum()))
}

pub(crate) fn grad_sup_norm_of(spec: &Spectrum) -> f64 {
    let g = spec.grid();
    let i = Complex64::new(0.0, 1.0);
    // fx + i fy in one inverse transform
    let packed = spec.map_modes(|kx, ky, c| {
        let k1 = g.derivative_wavenumber(kx);
        let k2 = g.derivative_wavenumber(ky);
        i * k1 * c + i * (i * k2 * c)
    });
    let (fx, fy) = packed.to_field_pair();
    super::field::max_speed(fx.values(), fy.values(), g.n())
}

/// Largest absolute entry of the Hessian of `Laplacian^{-1} f`, maximized over the grid.
pub fn hessian_sup_of_inverse_laplacian(f: &ScalarField) -> Result<f64> {
    f.require_zero_mean()?;
    Ok(inverse_laplacian_hessian(&f.spectrum()).sup())
}

/// The three independent second derivatives of `Laplacian^{-1} f`.
pub struct Hessian {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl Hessian {
    pub fn sup(&self) -> f64 {
        self.xx
            .sup_norm()
            .max(self.xy.sup_norm())
            .max(self.yy.sup_norm())
    }

    /// Spectral norm of the 2x2 symmetric matrix, maximized over the grid.
    pub fn operator_sup(&self) -> f64 {
        let n = self.xx.grid().n();
        par::row_max(n, |j| {
            (0..n)
                .map(|i| {
                    let (a, b, d) = (self.xx.at(i, j), self.xy.at(i, j), self.yy.at(i, j));
                    let mean = 0.5 * (a + d);
                    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                    mean.abs() + rad
                })
                .fold(0.0, f64::max)
        })
    }
}

pub(crate) fn inverse_laplacian_hessian(spec: &Spectrum) -> Hessian {
    let g = spec.grid();
    let i = Complex64::new(0.0, 1.0);
    // psi_hat = -f_hat / |k|^2; d_ab psi = -k_a k_b psi_hat = k_a k_b f_hat / |k|^2
    let diag = spec.map_modes(|kx, ky, c| {
        let k1 = g.wavenumber(kx);
        let k2 = g.wavenumber(ky);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            return Complex64::default();
        }
        let c = c / kk;
        c * (k1 * k1) + i * (c * (k2 * k2))
    });
    let off = spec.map_modes(|kx, ky, c| {
        let k1 = g.derivative_wavenumber(kx);
        let k2 = g.derivative_wavenumber(ky);
        let kk = g.wavenumber(kx).powi(2) + g.wavenumber(ky).powi(2);
        if kk == 0.0 {
            return Complex64::default();
        }
        c * (k1 * k2 / kk)
    });
    let (xx, yy) = diag.to_field_pair();
    let xy = off.to_field();
    Hessian { xx, xy, yy }
}

/// `|| Laplacian f ||_2`, the H^2 seminorm, via Parseval.
pub fn h2_norm(f: &ScalarField) -> Result<f64> {
    f.require_zero_mean()?;
    Ok(h2_norm_of(&f.spectrum()))
}

pub(crate) fn h2_norm_of(spec: &Spectrum) -> f64 {
    let g = spec.grid();
    let n = g.n();
    let sum = par::row_sum(n, |ky| {
        let k2 = g.wavenumber(ky).powi(2);
        (0..n)
            .map(|kx| {
                let kk = g.wavenumber(kx).powi(2) + k2;
                kk * kk * spec.coeffs()[ky * n + kx].norm_sqr()
            })
            .sum()
    });
    // int |g|^2 = (2pi)^2 / n^4 * sum |g_hat|^2
    let nn = (n * n) as f64;
    (sum * g.cell_area() / nn).sqrt()
}

/// Rearrangement-invariant and energy quantities of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub energy: f64,
    pub enstrophy: f64,
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub mean: f64,
}

pub fn conserved_quantities(state: &SimState) -> Result<Conserved> {
    let theta = state.theta();
    let vel = velocity_from_vorticity(theta, state.alpha_exponent())?;
    let energy = 0.5 * (vel.u.inner(&vel.u) + vel.v.inner(&vel.v));
    Ok(Conserved {
        energy,
        enstrophy: theta.inner(theta),
        l1: theta.lp_norm(1.0),
        l2: theta.lp_norm(2.0),
        l4: theta.lp_norm(4.0),
        linf: theta.sup_norm(),
        mean: theta.mean(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn g(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn grad_norm_examples() {
        let grid = g(64);
        assert_eq!(grad_sup_norm(&ScalarField::zeros(grid)).unwrap(), 0.0);
        let c = ScalarField::from_fn(grid, |_, _| 3.5);
        assert!(grad_sup_norm(&c).unwrap() < 1e-12);
        let s = ScalarField::from_fn(grid, |x, _| x.sin());
        assert!((grad_sup_norm(&s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grad_norm_matches_dense_argmax_oracle() {
        // Oracle: brute-force max of the analytic gradient on a 4000^2 lattice.
        let mut best: f64 = 0.0;
        let m = 4000;
        for a in 0..m {
            let x = 2.0 * PI * a as f64 / m as f64;
            for b in 0..m / 4 {
                let y = 2.0 * PI * b as f64 / m as f64;
                let gx = 3.0 * (3.0 * x).cos() * (2.0 * y).cos();
                let gy = -2.0 * (3.0 * x).sin() * (2.0 * y).sin();
                best = best.max(gx.hypot(gy));
            }
        }
        assert!((best - 3.0).abs() < 1e-9);
        let f = ScalarField::from_fn(g(64), |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        assert!((grad_sup_norm(&f).unwrap() - best).abs() < 1e-9);
    }

    #[test]
    fn hessian_examples() {
        let grid = g(32);
        assert_eq!(
            hessian_sup_of_inverse_laplacian(&ScalarField::zeros(grid)).unwrap(),
            0.0
        );
        let f = ScalarField::from_fn(grid, |x, _| x.cos());
        assert!((hessian_sup_of_inverse_laplacian(&f).unwrap() - 1.0).abs() < 1e-12);
        let f2 = ScalarField::from_fn(grid, |x, y| x.cos() + y.cos());
        let h = inverse_laplacian_hessian(&f2.spectrum());
        assert!(h.xy.sup_norm() < 1e-12);
        assert!((h.sup() - 1.0).abs() < 1e-12);
        let shifted = ScalarField::from_fn(grid, |x, _| 0.5 + x.cos());
        assert!(hessian_sup_of_inverse_laplacian(&shifted).is_err());
    }

    #[test]
    fn h2_examples() {
        let grid = g(32);
        let base = (2.0 * PI * PI).sqrt();
        assert_eq!(h2_norm(&ScalarField::zeros(grid)).unwrap(), 0.0);
        let f = ScalarField::from_fn(grid, |x, _| x.cos());
        assert!((h2_norm(&f).unwrap() - base).abs() < 1e-12);
        let f2 = ScalarField::from_fn(grid, |x, _| (2.0 * x).cos());
        assert!((h2_norm(&f2).unwrap() - 4.0 * base).abs() < 1e-11);
    }

    #[test]
    fn conserved_of_cosine() {
        let grid = g(64);
        let s = SimState::new(ScalarField::from_fn(grid, |x, _| x.cos()), 1.0).unwrap();
        let c = conserved_quantities(&s).unwrap();
        assert!((c.enstrophy - 2.0 * PI * PI).abs() < 1e-11);
        assert!((c.energy - PI * PI).abs() < 1e-11);
        let z = SimState::new(ScalarField::zeros(grid), 1.0).unwrap();
        let c0 = conserved_quantities(&z).unwrap();
        assert_eq!(
            (c0.energy, c0.enstrophy, c0.l1, c0.l2, c0.l4, c0.linf, c0.mean),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }
}
