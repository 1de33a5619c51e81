use super::series::DiagnosticSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// `g(t) <= exp(C (1 + log+ g(0)) e^{C t})` for the gradient sup norm.
    Lipschitz,
    /// `j(t) <= exp(((1 + 2 log+ j(0)) e^{C m t} - 1) / 2)` for the H^2 norm.
    H2,
    /// `g(t) <= g(0) e^{C m t}`, the bound for smoother inversions.
    Exponential,
}

impl EnvelopeKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvelopeKind::Lipschitz => "lipschitz",
            EnvelopeKind::H2 => "h2",
            EnvelopeKind::Exponential => "exponential",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "lipschitz" => Ok(EnvelopeKind::Lipschitz),
            "h2" => Ok(EnvelopeKind::H2),
            "exponential" => Ok(EnvelopeKind::Exponential),
            other => Err(Error::InvalidArgument(format!("unknown envelope kind `{other}`"))),
        }
    }
}

/// Initial norms the envelope is anchored to. `sup_theta` is `||theta_0||_inf`
/// and is ignored by the Lipschitz kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseNorms {
    pub initial: f64,
    pub sup_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub kind: EnvelopeKind,
    pub fitted_c: f64,
    /// Sample that forces `fitted_c`, if any sample needs a positive constant.
    pub binding: Option<(f64, f64)>,
    pub holds: bool,
}

fn log_plus(v: f64) -> f64 {
    v.ln().max(0.0)
}

/// Smallest `C >= 0` with `C a e^{C t} >= b`, for `a > 0`, `t >= 0` and `b > 0`.
fn solve_lipschitz(a: f64, t: f64, b: f64) -> f64 {
    let f = |c: f64| c * a * (c * t).exp() - b;
    let mut hi = (b / a).max(1e-300);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Fits the smallest constant for which the envelope dominates every sample,
/// with time measured from the first sample. Samples the envelope cannot
/// constrain need `C = 0`; the Lipschitz envelope constrains the start too
/// (`C (1 + log+ g(0)) >= ln g(0)`). The fitted constant never decreases when
/// the series is extended.
pub fn envelope_check(series: &DiagnosticSeries, kind: EnvelopeKind, base: BaseNorms) -> Result<EnvelopeFit> {
    if !(base.initial > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "envelope anchor must be positive, got {}",
            base.initial
        )));
    }
    if kind != EnvelopeKind::Lipschitz && !(base.sup_theta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{} envelope needs a positive sup norm, got {}",
            kind.name(),
            base.sup_theta
        )));
    }
    let t0 = series.first().map(|(t, _)| t).unwrap_or(0.0);
    let mut fit = EnvelopeFit {
        kind,
        fitted_c: 0.0,
        binding: None,
        holds: true,
    };
    for &(t, g) in series.samples() {
        if !(g > 0.0) {
            return Err(Error::OutOfRange {
                what: "envelope fit (needs positive samples)",
                t,
                value: g,
            });
        }
        let dt = t - t0;
        if dt <= 0.0 && kind != EnvelopeKind::Lipschitz {
            continue;
        }
        let c = match kind {
            EnvelopeKind::Lipschitz => {
                let need = g.ln();
                if need <= 0.0 {
                    0.0
                } else {
                    solve_lipschitz(1.0 + log_plus(base.initial), dt.max(0.0), need)
                }
            }
            EnvelopeKind::H2 => {
                let ratio = (2.0 * log_plus(g) + 1.0) / (1.0 + 2.0 * log_plus(base.initial));
                (ratio.ln() / (base.sup_theta * dt)).max(0.0)
            }
            EnvelopeKind::Exponential => ((g / base.initial).ln() / (base.sup_theta * dt)).max(0.0),
        };
        if c > fit.fitted_c {
            fit.fitted_c = c;
            fit.binding = Some((t, g));
        }
    }
    Ok(fit)
}
