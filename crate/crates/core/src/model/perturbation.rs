use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::AlephRegion;

/// Bound factor in `|nu| < K upsilon r` and `|grad nu| < K upsilon`.
pub const ADMISSIBLE_FACTOR: f64 = 1e-4;

pub type ScalarFn = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Additive velocity perturbation `(nu1, nu2)(x, y, t)` of size `upsilon`.
pub struct Perturbation {
    nu1: ScalarFn,
    nu2: ScalarFn,
    upsilon: f64,
    zero: bool,
}

impl std::fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Perturbation")
            .field("upsilon", &self.upsilon)
            .field("zero", &self.zero)
            .finish()
    }
}

impl Perturbation {
    pub fn zero() -> Self {
        Perturbation {
            nu1: Box::new(|_, _, _| 0.0),
            nu2: Box::new(|_, _, _| 0.0),
            upsilon: 0.0,
            zero: true,
        }
    }

    pub fn new(
        nu1: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        nu2: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        upsilon: f64,
    ) -> Self {
        Perturbation {
            nu1: Box::new(nu1),
            nu2: Box::new(nu2),
            upsilon,
            zero: false,
        }
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        if self.zero {
            return (0.0, 0.0);
        }
        ((self.nu1)(x, y, t), (self.nu2)(x, y, t))
    }

    /// Central-difference Jacobian `[[d nu1/dx, d nu1/dy], [d nu2/dx, d nu2/dy]]`
    /// with steps relative to each coordinate.
    pub fn jacobian(&self, x: f64, y: f64, t: f64) -> [[f64; 2]; 2] {
        if self.zero {
            return [[0.0; 2]; 2];
        }
        let hx = 1e-6 * x.abs().max(f64::MIN_POSITIVE);
        let hy = 1e-6 * y.abs().max(f64::MIN_POSITIVE);
        let (px, mx) = (self.eval(x + hx, y, t), self.eval(x - hx, y, t));
        let (py, my) = (self.eval(x, y + hy, t), self.eval(x, y - hy, t));
        [
            [(px.0 - mx.0) / (2.0 * hx), (py.0 - my.0) / (2.0 * hy)],
            [(px.1 - mx.1) / (2.0 * hx), (py.1 - my.1) / (2.0 * hy)],
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub samples: usize,
    pub passed: bool,
    /// `min(bound / |nu|)` over samples; infinite when `nu` vanishes.
    pub value_margin: f64,
    pub gradient_margin: f64,
    /// `(x, y, t)` where each margin is smallest.
    pub value_witness: Option<(f64, f64, f64)>,
    pub gradient_witness: Option<(f64, f64, f64)>,
}

/// Samples the region (log-uniform in both coordinates) and `[0, horizon]`,
/// comparing `nu` and its central-difference gradient with the size bounds.
pub fn admissible_perturbation_check(
    nu: &Perturbation,
    region: &AlephRegion,
    horizon: f64,
    samples: usize,
    seed: u64,
) -> AdmissibilityReport {
    let samples = samples.max(100);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ly_lo, ly_hi) = (0.5 * region.eps1.ln(), region.eps2.ln());
    let bound_v = ADMISSIBLE_FACTOR * nu.upsilon();
    let mut report = AdmissibilityReport {
        samples,
        passed: true,
        value_margin: f64::INFINITY,
        gradient_margin: f64::INFINITY,
        value_witness: None,
        gradient_witness: None,
    };
    let mut drawn = 0;
    while drawn < samples {
        let y = rng.random_range(ly_lo..ly_hi).exp();
        let lx_hi = (y * y).ln();
        let lx_lo = region.eps1.ln();
        if lx_hi <= lx_lo {
            continue;
        }
        let x = rng.random_range(lx_lo..lx_hi).exp();
        if !region.contains(x, y) {
            continue;
        }
        let t = if horizon > 0.0 {
            rng.random_range(0.0..=horizon)
        } else {
            0.0
        };
        drawn += 1;
        let r = x.hypot(y);
        let (a, b) = nu.eval(x, y, t);
        let value = a.abs().max(b.abs());
        if value > 0.0 {
            let m = bound_v * r / value;
            if m < report.value_margin {
                report.value_margin = m;
                report.value_witness = Some((x, y, t));
            }
        }
        let j = nu.jacobian(x, y, t);
        let grad = j[0][0].hypot(j[0][1]).max(j[1][0].hypot(j[1][1]));
        if grad > 0.0 {
            let m = bound_v / grad;
            if m < report.gradient_margin {
                report.gradient_margin = m;
                report.gradient_witness = Some((x, y, t));
            }
        }
    }
    report.passed = report.value_margin > 1.0 && report.gradient_margin > 1.0;
    report
}
