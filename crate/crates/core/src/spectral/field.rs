use rustfft::num_complex::Complex64;

use super::fft::Fft2;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::par;

/// Tolerance on the grid mean of a field that stands for vorticity.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Real periodic scalar sampled on a [`Grid`], row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let field = ScalarField { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x, y)` at grid points with `x, y` in `[0, 2pi)`.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync,
    {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        par::for_each_row(&mut values, n, |j, row| {
            let y = grid.coord(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(grid.coord(i), y);
            }
        });
        ScalarField { grid, values }
    }

    /// Samples `f(i, j)` by grid index.
    pub fn from_index_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Send + Sync,
    {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        par::for_each_row(&mut values, n, |j, row| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        ScalarField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        let n = self.grid.n();
        let total = par::row_sum(n, |j| self.values[j * n..(j + 1) * n].iter().sum());
        total / self.grid.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        let n = self.grid.n();
        par::row_max(n, |j| {
            self.values[j * n..(j + 1) * n]
                .iter()
                .fold(0.0, |m, v| m.max(v.abs()))
        })
    }

    /// `(int |f|^p)^(1/p)` by the trapezoidal (spectrally accurate) rule.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let n = self.grid.n();
        let sum = par::row_sum(n, |j| {
            self.values[j * n..(j + 1) * n]
                .iter()
                .map(|v| v.abs().powf(p))
                .sum()
        });
        (sum * self.grid.cell_area()).powf(1.0 / p)
    }

    /// `int f g` over the torus.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        let n = self.grid.n();
        par::row_sum(n, |j| {
            let r = j * n..(j + 1) * n;
            self.values[r.clone()]
                .iter()
                .zip(&other.values[r])
                .map(|(a, b)| a * b)
                .sum()
        }) * self.grid.cell_area()
    }

    /// Fails unless the grid mean is zero within [`MEAN_TOLERANCE`] (scaled by
    /// the sup norm when that exceeds one).
    pub fn require_zero_mean(&self) -> Result<()> {
        self.check_finite()?;
        let mean = self.mean();
        let tolerance = MEAN_TOLERANCE * self.sup_norm().max(1.0);
        if mean.abs() > tolerance {
            return Err(Error::NonzeroMean { mean, tolerance });
        }
        Ok(())
    }

    /// Subtracts the grid mean.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        if m != 0.0 {
            self.values.iter_mut().for_each(|v| *v -= m);
        }
    }

    /// Field evaluated at `-z`.
    pub fn reflected(&self) -> ScalarField {
        let g = self.grid;
        ScalarField::from_index_fn(g, |i, j| self.at(g.mirror(i), g.mirror(j)))
    }

    /// Max of `|f(z) - f(-z)|`.
    pub fn evenness_defect(&self) -> f64 {
        let g = self.grid;
        let n = g.n();
        par::row_max(n, |j| {
            (0..n)
                .map(|i| (self.at(i, j) - self.at(g.mirror(i), g.mirror(j))).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn scaled(&self, factor: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        same_grid(self.grid, other.grid)?;
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        same_grid(self.grid, other.grid)?;
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs: Vec<Complex64> = self.values.iter().map(|&v| v.into()).collect();
        Fft2::cached(self.grid.n()).forward(&mut coeffs);
        Spectrum {
            grid: self.grid,
            coeffs,
        }
    }
}

pub(crate) fn same_grid(a: Grid, b: Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    Ok(())
}

/// Unnormalized discrete Fourier coefficients of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len());
        Spectrum { grid, coeffs }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Builds a new spectrum with `f(kx, ky, c)` applied mode-wise, where
    /// `kx, ky` are FFT bin indices.
    pub fn map_modes<F>(&self, f: F) -> Spectrum
    where
        F: Fn(usize, usize, Complex64) -> Complex64 + Send + Sync,
    {
        let n = self.grid.n();
        let mut out = vec![Complex64::default(); self.coeffs.len()];
        par::for_each_row(&mut out, n, |ky, row| {
            let src = &self.coeffs[ky * n..(ky + 1) * n];
            for (kx, (o, &c)) in row.iter_mut().zip(src).enumerate() {
                *o = f(kx, ky, c);
            }
        });
        Spectrum {
            grid: self.grid,
            coeffs: out,
        }
    }

    /// Inverse transform keeping the real part.
    pub fn to_field(&self) -> ScalarField {
        let mut data = self.coeffs.clone();
        Fft2::cached(self.grid.n()).inverse(&mut data);
        ScalarField {
            grid: self.grid,
            values: data.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Inverse transform of a spectrum packing two real fields as `a + i b`.
    pub fn to_field_pair(&self) -> (ScalarField, ScalarField) {
        let mut data = self.coeffs.clone();
        Fft2::cached(self.grid.n()).inverse(&mut data);
        let re = data.iter().map(|c| c.re).collect();
        let im = data.iter().map(|c| c.im).collect();
        (
            ScalarField {
                grid: self.grid,
                values: re,
            },
            ScalarField {
                grid: self.grid,
                values: im,
            },
        )
    }

    /// Zero-mode coefficient (grid sum of the field).
    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Max coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Combines two real-field spectra `a`, `b` into the packed spectrum of `a + i b`.
    pub fn pack(a: &Spectrum, b: &Spectrum) -> Spectrum {
        let i = Complex64::new(0.0, 1.0);
        Spectrum {
            grid: a.grid,
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x + i * y)
                .collect(),
        }
    }
}

/// Velocity `(u, v)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u: ScalarField,
    pub v: ScalarField,
}

impl VelocityField {
    pub fn zeros(grid: Grid) -> Self {
        VelocityField {
            u: ScalarField::zeros(grid),
            v: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid {
        self.u.grid()
    }

    /// Max of `sqrt(u^2 + v^2)` over the grid.
    pub fn max_speed(&self) -> f64 {
        max_speed(self.u.values(), self.v.values(), self.grid().n())
    }

    /// `max |i kx u_hat + i ky v_hat| / max(|u_hat|, |v_hat|)`; zero for a zero field.
    pub fn divergence_ratio(&self) -> f64 {
        let g = self.grid();
        let uh = self.u.spectrum();
        let vh = self.v.spectrum();
        let n = g.n();
        let div = par::row_max(n, |ky| {
            let k2 = g.derivative_wavenumber(ky);
            (0..n)
                .map(|kx| {
                    let k1 = g.derivative_wavenumber(kx);
                    let idx = ky * n + kx;
                    (uh.coeffs[idx] * k1 + vh.coeffs[idx] * k2).norm()
                })
                .fold(0.0, f64::max)
        });
        let scale = uh.max_abs().max(vh.max_abs());
        if scale == 0.0 {
            0.0
        } else {
            div / scale
        }
    }

    /// Bilinear interpolation at an arbitrary point of the torus.
    pub fn sample(&self, x: f64, y: f64) -> (f64, f64) {
        (bilinear(&self.u, x, y), bilinear(&self.v, x, y))
    }
}

pub(crate) fn max_speed(u: &[f64], v: &[f64], n: usize) -> f64 {
    par::row_max(n, |j| {
        let r = j * n..(j + 1) * n;
        u[r.clone()]
            .iter()
            .zip(&v[r])
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    })
}

/// Periodic bilinear interpolation of a grid field.
pub fn bilinear(f: &ScalarField, x: f64, y: f64) -> f64 {
    let g = f.grid();
    let n = g.n();
    let h = g.spacing();
    let fx = (x / h).rem_euclid(n as f64);
    let fy = (y / h).rem_euclid(n as f64);
    let i0 = (fx.floor() as usize) % n;
    let j0 = (fy.floor() as usize) % n;
    let tx = fx - fx.floor();
    let ty = fy - fy.floor();
    let i1 = (i0 + 1) % n;
    let j1 = (j0 + 1) % n;
    let a = f.at(i0, j0) * (1.0 - tx) + f.at(i1, j0) * tx;
    let b = f.at(i0, j1) * (1.0 - tx) + f.at(i1, j1) * tx;
    a * (1.0 - ty) + b * ty
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn spectral_round_trip_is_tight() {
        let g = grid(64);
        let f = ScalarField::from_fn(g, |x, y| (x + 2.0 * y).sin() + 0.3 * (5.0 * x).cos());
        let back = f.spectrum().to_field();
        let scale = f.sup_norm();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn norms_of_cosine() {
        let g = grid(64);
        let f = ScalarField::from_fn(g, |x, _| x.cos());
        assert!(f.mean().abs() < 1e-15);
        assert!((f.lp_norm(2.0) - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        // |cos| has kinks, so the rectangle rule is only second order here
        let h = g.spacing();
        assert!((f.lp_norm(1.0) - 8.0 * PI).abs() < 2.0 * PI * h * h);
        assert_eq!(f.lp_norm(f64::INFINITY), 1.0);
    }

    #[test]
    fn nonzero_mean_rejected() {
        let g = grid(16);
        let f = ScalarField::from_fn(g, |x, _| 1e-6 + x.cos());
        assert!(matches!(f.require_zero_mean(), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid(16);
        let mut v = vec![0.0; 256];
        v[17] = f64::NAN;
        assert!(matches!(
            ScalarField::new(g, v),
            Err(Error::NonFinite { index: 17 })
        ));
    }

    #[test]
    fn reflection_of_odd_field() {
        let g = grid(32);
        let f = ScalarField::from_fn(g, |x, y| x.sin() * y.cos());
        let r = f.reflected();
        for (a, b) in f.values().iter().zip(r.values()) {
            assert!((a + b).abs() < 1e-15);
        }
        let e = ScalarField::from_fn(g, |x, y| x.sin() * y.sin());
        assert!(e.evenness_defect() < 1e-15);
    }

    #[test]
    fn bilinear_is_exact_on_nodes_and_periodic() {
        let g = grid(32);
        let f = ScalarField::from_fn(g, |x, y| x.sin() + y.cos());
        let h = g.spacing();
        assert!((bilinear(&f, 3.0 * h, 5.0 * h) - f.at(3, 5)).abs() < 1e-14);
        assert!((bilinear(&f, 3.0 * h + 2.0 * PI, 5.0 * h - 2.0 * PI) - f.at(3, 5)).abs() < 1e-12);
    }
}
