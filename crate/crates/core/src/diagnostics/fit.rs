use super::series::DiagnosticSeries;
use crate::error::{Error, Result};

/// Least-squares line through `(t, value)` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 5;

/// Ordinary least squares of `ys` on `xs`. `r_squared` is 1 when the data
/// have no spread.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "linear fit needs matching samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit over a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let e = y - (intercept + slope * x);
                e * e
            })
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        window: (lo, hi),
        samples: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitDirection {
    /// Values in (0, 1): regress `ln ln(1/y)`.
    Decay,
    /// Values above 1: regress `ln ln g`.
    Growth,
}

/// Fits `ln ln(1/y)` or `ln ln g` against `t` over `window` (all samples when
/// `None`). The direction follows from the first sample in the window; every
/// other sample must lie on the same side.
pub fn fit_double_exponential(
    series: &DiagnosticSeries,
    window: Option<(f64, f64)>,
) -> Result<(FitDirection, RateFit)> {
    let w = match window {
        Some((a, b)) => series.window(a, b),
        None => series.clone(),
    };
    if w.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "series `{}` has {} samples in the window, need {MIN_FIT_SAMPLES}",
            series.name(),
            w.len()
        )));
    }
    let (_, first) = w.first().expect("non-empty");
    let dir = if first > 0.0 && first < 1.0 {
        FitDirection::Decay
    } else {
        FitDirection::Growth
    };
    let mut ts = Vec::with_capacity(w.len());
    let mut zs = Vec::with_capacity(w.len());
    for &(t, v) in w.samples() {
        let ok = match dir {
            FitDirection::Decay => v > 0.0 && v < 1.0,
            FitDirection::Growth => v > 1.0,
        };
        if !ok {
            return Err(Error::OutOfRange {
                what: match dir {
                    FitDirection::Decay => "double-exponential decay fit (needs 0 < y < 1)",
                    FitDirection::Growth => "double-exponential growth fit (needs g > 1)",
                },
                t,
                value: v,
            });
        }
        ts.push(t);
        zs.push(match dir {
            FitDirection::Decay => (-v.ln()).ln(),
            FitDirection::Growth => v.ln().ln(),
        });
    }
    Ok((dir, linear_fit(&ts, &zs)?))
}

/// Same as [`fit_double_exponential`] on `ln y` values directly, for series
/// that would underflow as plain numbers.
pub fn fit_double_exponential_log(
    times: &[f64],
    ln_values: &[f64],
) -> Result<RateFit> {
    if times.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{} samples, need {MIN_FIT_SAMPLES}",
            times.len()
        )));
    }
    let mut zs = Vec::with_capacity(ln_values.len());
    for (&t, &l) in times.iter().zip(ln_values) {
        if l == 0.0 || !l.is_finite() {
            return Err(Error::OutOfRange {
                what: "double-exponential fit on logarithms (needs ln y != 0)",
                t,
                value: l,
            });
        }
        zs.push(l.abs().ln());
    }
    linear_fit(times, &zs)
}
