//! Vorticity transport `theta_t + u . grad theta = 0` with
//! `u = perp-grad psi`, `psi_hat = -|k|^(-2 alpha) theta_hat`.
//!
//! The state lives in spectral space. Each right-hand-side evaluation forms
//! `u` and `grad theta` from the two-thirds-truncated spectrum, multiplies in
//! physical space and truncates the product again, so the quadratic term is
//! alias-free. Modes outside the truncation, and the zero mode, are never
//! touched by the time stepper.

use rustfft::num_complex::Complex64;

use super::fft::Fft2;
use super::field::{max_speed, ScalarField, Spectrum, VelocityField};
use super::grid::Grid;
use super::norms;
use crate::diagnostics::DiagnosticSeries;
use crate::error::{Error, Result};
use crate::par;

/// Hard CFL number above which `step_rk4` refuses a step.
pub const CFL_LIMIT: f64 = 0.9;

/// Largest `cfl` accepted by [`run`].
pub const MAX_RUN_CFL: f64 = 0.5;

/// Vorticity state on the torus.
#[derive(Debug, Clone)]
pub struct SimState {
    theta: ScalarField,
    theta_hat: Spectrum,
    time: f64,
    alpha_exponent: f64,
}

impl SimState {
    pub fn new(theta: ScalarField, alpha_exponent: f64) -> Result<Self> {
        Self::at_time(theta, 0.0, alpha_exponent)
    }

    pub fn at_time(theta: ScalarField, time: f64, alpha_exponent: f64) -> Result<Self> {
        check_exponent(alpha_exponent)?;
        theta.require_zero_mean()?;
        if !time.is_finite() {
            return Err(Error::InvalidArgument(format!("time {time} is not finite")));
        }
        let theta_hat = theta.spectrum();
        Ok(SimState {
            theta,
            theta_hat,
            time,
            alpha_exponent,
        })
    }

    fn from_spectrum(theta_hat: Spectrum, time: f64, alpha_exponent: f64) -> Self {
        SimState {
            theta: theta_hat.to_field(),
            theta_hat,
            time,
            alpha_exponent,
        }
    }

    pub fn theta(&self) -> &ScalarField {
        &self.theta
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.theta_hat
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn alpha_exponent(&self) -> f64 {
        self.alpha_exponent
    }

    pub fn grid(&self) -> Grid {
        self.theta.grid()
    }

    pub fn velocity(&self) -> VelocityField {
        let (u, v) = velocity_spectrum(&self.theta_hat, self.alpha_exponent).to_field_pair();
        VelocityField { u, v }
    }
}

fn check_exponent(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidExponent(alpha));
    }
    Ok(())
}

/// Stream-function multiplier `-|k|^(-2 alpha)`, zero at `k = 0`.
#[inline]
fn stream_multiplier(k1: f64, k2: f64, alpha: f64) -> f64 {
    let kk = k1 * k1 + k2 * k2;
    if kk == 0.0 {
        0.0
    } else if alpha == 1.0 {
        -1.0 / kk
    } else {
        -kk.powf(-alpha)
    }
}

/// Packed spectrum of `u + i v` for the full (untruncated) field.
fn velocity_spectrum(theta_hat: &Spectrum, alpha: f64) -> Spectrum {
    let g = theta_hat.grid();
    theta_hat.map_modes(|kx, ky, c| {
        let m = stream_multiplier(g.wavenumber(kx), g.wavenumber(ky), alpha);
        let psi = c * m;
        let k1 = g.derivative_wavenumber(kx);
        let k2 = g.derivative_wavenumber(ky);
        // u = -psi_y, v = psi_x  =>  u + i v = -i k2 psi - k1 psi
        Complex64::new(0.0, -k2) * psi - psi * k1
    })
}

/// Biot-Savart velocity `perp-grad (-(-Laplacian)^(-alpha)) theta`.
pub fn velocity_from_vorticity(theta: &ScalarField, alpha_exponent: f64) -> Result<VelocityField> {
    check_exponent(alpha_exponent)?;
    theta.require_zero_mean()?;
    let (u, v) = velocity_spectrum(&theta.spectrum(), alpha_exponent).to_field_pair();
    Ok(VelocityField { u, v })
}

/// Largest dt the stepper accepts at the given max speed.
pub fn admissible_dt(grid: Grid, max_speed: f64) -> f64 {
    if max_speed == 0.0 {
        f64::INFINITY
    } else {
        CFL_LIMIT * grid.spacing() / max_speed
    }
}

/// Spectral right-hand side evaluator with precomputed mode tables.
struct Integrator {
    grid: Grid,
    multiplier: Vec<f64>,
    keep: Vec<bool>,
}

struct Rhs {
    value: Vec<Complex64>,
    max_speed: f64,
}

impl Integrator {
    fn new(grid: Grid, alpha: f64) -> Self {
        let n = grid.n();
        let mut multiplier = vec![0.0; grid.len()];
        let mut keep = vec![false; grid.len()];
        for ky in 0..n {
            for kx in 0..n {
                let idx = ky * n + kx;
                multiplier[idx] = stream_multiplier(grid.wavenumber(kx), grid.wavenumber(ky), alpha);
                keep[idx] = grid.is_resolved_mode(kx) && grid.is_resolved_mode(ky);
            }
        }
        Integrator {
            grid,
            multiplier,
            keep,
        }
    }

    fn rhs(&self, hat: &[Complex64]) -> Rhs {
        let g = self.grid;
        let n = g.n();
        let fft = Fft2::cached(n);
        let mut vel = vec![Complex64::default(); g.len()];
        let mut grad = vec![Complex64::default(); g.len()];
        par::for_each_row(&mut vel, n, |ky, row| {
            let k2 = g.derivative_wavenumber(ky);
            for (kx, out) in row.iter_mut().enumerate() {
                let idx = ky * n + kx;
                if !self.keep[idx] {
                    continue;
                }
                let k1 = g.derivative_wavenumber(kx);
                let psi = hat[idx] * self.multiplier[idx];
                *out = Complex64::new(0.0, -k2) * psi - psi * k1;
            }
        });
        par::for_each_row(&mut grad, n, |ky, row| {
            let k2 = g.derivative_wavenumber(ky);
            for (kx, out) in row.iter_mut().enumerate() {
                let idx = ky * n + kx;
                if !self.keep[idx] {
                    continue;
                }
                let k1 = g.derivative_wavenumber(kx);
                // theta_x + i theta_y = i k1 c - k2 c
                *out = Complex64::new(0.0, k1) * hat[idx] - hat[idx] * k2;
            }
        });
        fft.inverse(&mut vel);
        fft.inverse(&mut grad);
        let speeds = par::map_range(n, |j| {
            vel[j * n..(j + 1) * n]
                .iter()
                .map(|c| c.re.hypot(c.im))
                .fold(0.0, f64::max)
        });
        let max_speed = speeds.into_iter().fold(0.0, f64::max);
        let mut product = grad;
        par::for_each_row(&mut product, n, |j, row| {
            let vrow = &vel[j * n..(j + 1) * n];
            for (p, w) in row.iter_mut().zip(vrow) {
                *p = Complex64::new(w.re * p.re + w.im * p.im, 0.0);
            }
        });
        fft.forward(&mut product);
        par::for_each_row(&mut product, n, |ky, row| {
            for (kx, c) in row.iter_mut().enumerate() {
                let idx = ky * n + kx;
                *c = if self.keep[idx] && idx != 0 { -*c } else { Complex64::default() };
            }
        });
        Rhs {
            value: product,
            max_speed,
        }
    }

    /// One classical RK4 step. `choose_dt` sees the current max speed and
    /// returns the step to take.
    fn step<F>(&self, hat: &mut Vec<Complex64>, time: f64, choose_dt: F) -> Result<f64>
    where
        F: FnOnce(f64) -> Result<f64>,
    {
        let k1 = self.rhs(hat);
        let dt = choose_dt(k1.max_speed)?;
        let stage = |base: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
            base.iter().zip(k).map(|(b, d)| b + d * h).collect()
        };
        let k2 = self.rhs(&stage(hat, &k1.value, 0.5 * dt)).value;
        let k3 = self.rhs(&stage(hat, &k2, 0.5 * dt)).value;
        let k4 = self.rhs(&stage(hat, &k3, dt)).value;
        let w = dt / 6.0;
        let n = self.grid.n();
        par::for_each_row(hat, n, |ky, row| {
            for (kx, c) in row.iter_mut().enumerate() {
                let idx = ky * n + kx;
                let incr = k1.value[idx] + (k2[idx] + k3[idx]) * 2.0 + k4[idx];
                *c += incr * w;
            }
        });
        let finite = par::map_range(n, |j| hat[j * n..(j + 1) * n].iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        if finite.iter().any(|ok| !ok) {
            return Err(Error::BlowUp { time: time + dt });
        }
        Ok(dt)
    }
}

/// Advances `state` by exactly `dt` with one RK4 step.
pub fn step_rk4(state: &SimState, dt: f64) -> Result<SimState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let grid = state.grid();
    let integrator = Integrator::new(grid, state.alpha_exponent);
    let mut hat = state.theta_hat.coeffs().to_vec();
    integrator.step(&mut hat, state.time, |speed| {
        let admissible = admissible_dt(grid, speed);
        if dt > admissible {
            Err(Error::Cfl { dt, admissible })
        } else {
            Ok(dt)
        }
    })?;
    Ok(SimState::from_spectrum(
        Spectrum::from_coeffs(grid, hat),
        state.time + dt,
        state.alpha_exponent,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub t_end: f64,
    pub cfl: f64,
    pub sample_every: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats {
    pub steps: usize,
    pub samples: usize,
    pub min_dt: f64,
    pub max_dt: f64,
}

/// Integrates to `params.t_end` with `dt = cfl * h / max_speed`, calling
/// `observer` at the start time, at every multiple of `sample_every` and at
/// `t_end`. A run with `t_end == state.time()` does nothing.
pub fn run<F>(state: &mut SimState, params: &RunParams, mut observer: F) -> Result<RunStats>
where
    F: FnMut(&SimState) -> Result<()>,
{
    let RunParams {
        t_end,
        cfl,
        sample_every,
    } = *params;
    if !(cfl > 0.0 && cfl <= MAX_RUN_CFL) {
        return Err(Error::InvalidArgument(format!(
            "cfl = {cfl} outside (0, {MAX_RUN_CFL}]"
        )));
    }
    if !(sample_every > 0.0) || !sample_every.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sample_every = {sample_every} must be positive"
        )));
    }
    if !t_end.is_finite() || t_end < state.time {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} precedes the state time {}",
            state.time
        )));
    }
    let mut stats = RunStats {
        min_dt: f64::INFINITY,
        ..RunStats::default()
    };
    if t_end == state.time {
        return Ok(stats);
    }
    let grid = state.grid();
    let h = grid.spacing();
    let integrator = Integrator::new(grid, state.alpha_exponent);
    let start = state.time;
    let mut hat = state.theta_hat.coeffs().to_vec();
    let mut time = start;
    let mut next_index: u64 = 1;

    observer(state)?;
    stats.samples += 1;

    while time < t_end {
        let next_sample = (start + next_index as f64 * sample_every).min(t_end);
        let limit = next_sample - time;
        let dt = integrator.step(&mut hat, time, |speed| {
            let dt = if speed == 0.0 { limit } else { cfl * h / speed };
            Ok(dt.min(limit))
        })?;
        stats.steps += 1;
        stats.min_dt = stats.min_dt.min(dt);
        stats.max_dt = stats.max_dt.max(dt);
        time = if dt == limit { next_sample } else { time + dt };
        if time >= next_sample {
            next_index += 1;
            *state = SimState::from_spectrum(
                Spectrum::from_coeffs(grid, hat.clone()),
                time,
                state.alpha_exponent,
            );
            observer(state)?;
            stats.samples += 1;
        }
    }
    *state = SimState::from_spectrum(Spectrum::from_coeffs(grid, hat), time, state.alpha_exponent);
    Ok(stats)
}

/// Scalar quantities [`run_recording`] can sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    GradSup,
    Energy,
    Enstrophy,
    L1,
    L2,
    L4,
    Linf,
    Mean,
    H2,
    MaxSpeed,
    HessianSup,
}

impl Quantity {
    pub const ALL: [Quantity; 11] = [
        Quantity::GradSup,
        Quantity::Energy,
        Quantity::Enstrophy,
        Quantity::L1,
        Quantity::L2,
        Quantity::L4,
        Quantity::Linf,
        Quantity::Mean,
        Quantity::H2,
        Quantity::MaxSpeed,
        Quantity::HessianSup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::GradSup => "grad_sup",
            Quantity::Energy => "energy",
            Quantity::Enstrophy => "enstrophy",
            Quantity::L1 => "l1",
            Quantity::L2 => "l2",
            Quantity::L4 => "l4",
            Quantity::Linf => "linf",
            Quantity::Mean => "mean",
            Quantity::H2 => "h2",
            Quantity::MaxSpeed => "max_speed",
            Quantity::HessianSup => "hessian_sup",
        }
    }

    pub fn parse(s: &str) -> Option<Quantity> {
        Quantity::ALL.into_iter().find(|q| q.name() == s)
    }

    pub fn measure(self, state: &SimState) -> Result<f64> {
        let theta = state.theta();
        Ok(match self {
            Quantity::GradSup => norms::grad_sup_norm_of(state.spectrum()),
            Quantity::Energy => norms::conserved_quantities(state)?.energy,
            Quantity::Enstrophy => theta.inner(theta),
            Quantity::L1 => theta.lp_norm(1.0),
            Quantity::L2 => theta.lp_norm(2.0),
            Quantity::L4 => theta.lp_norm(4.0),
            Quantity::Linf => theta.sup_norm(),
            Quantity::Mean => theta.mean(),
            Quantity::H2 => norms::h2_norm_of(state.spectrum()),
            Quantity::MaxSpeed => {
                let v = state.velocity();
                max_speed(v.u.values(), v.v.values(), state.grid().n())
            }
            Quantity::HessianSup => norms::inverse_laplacian_hessian(state.spectrum()).sup(),
        })
    }
}

/// Runs and records the requested quantities at every sample.
pub fn run_recording(
    state: &mut SimState,
    params: &RunParams,
    quantities: &[Quantity],
) -> Result<Vec<DiagnosticSeries>> {
    let mut series: Vec<DiagnosticSeries> = quantities
        .iter()
        .map(|q| DiagnosticSeries::new(q.name()))
        .collect();
    run(state, params, |s| {
        for (q, out) in quantities.iter().zip(series.iter_mut()) {
            out.push(s.time(), q.measure(s)?)?;
        }
        Ok(())
    })?;
    Ok(series)
}
