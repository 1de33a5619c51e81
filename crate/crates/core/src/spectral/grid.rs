use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

/// Uniform `n x n` discretization of the torus `[0, 2pi)^2`.
///
/// Point `(i, j)` sits at `(i h, j h)` with `h = 2pi / n`; `i` indexes x and is
/// the fast (contiguous) index of every row-major buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("n = {n} is below {MIN_POINTS}")));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} is not a power of two")));
        }
        Ok(Grid { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `2pi / n`; exact because `n` is a power of two.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Area of one cell, the quadrature weight.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Coordinate of index `i` on the centered fundamental domain `(-pi, pi]`.
    #[inline]
    pub fn centered(&self, i: usize) -> f64 {
        if i <= self.n / 2 {
            i as f64 * self.spacing()
        } else {
            (i as f64 - self.n as f64) * self.spacing()
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Index of the mirror point `-z`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Signed integer wavenumber of FFT bin `i`; the Nyquist bin maps to `-n/2`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        if i < self.n / 2 {
            i as f64
        } else {
            i as f64 - self.n as f64
        }
    }

    /// Wavenumber used for odd-order derivatives: the Nyquist bin is zeroed
    /// so that derivatives of real fields stay real.
    #[inline]
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    /// Largest wavenumber kept by the two-thirds dealiasing rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> usize {
        (self.n - 1) / 3
    }

    #[inline]
    pub fn is_resolved_mode(&self, i: usize) -> bool {
        self.wavenumber(i).abs() <= self.dealias_cutoff() as f64
    }

    /// Smallest power-of-two grid whose spacing resolves `length` with `cells` cells.
    pub fn required_for(length: f64, cells: f64) -> usize {
        let needed = (cells * 2.0 * PI / length).ceil().max(MIN_POINTS as f64);
        (needed as usize).next_power_of_two()
    }

    /// Distance from the nearest cross arm (`x` or `y` a multiple of pi).
    pub fn arm_distance(&self, i: usize, j: usize) -> f64 {
        arm_distance_1d(self.coord(i)).min(arm_distance_1d(self.coord(j)))
    }
}

/// Distance from `s` to the nearest multiple of pi.
pub fn arm_distance_1d(s: f64) -> f64 {
    let r = s.rem_euclid(PI);
    r.min(PI - r)
}
