//! The chain of small parameters `T -> eps2 -> eps1 -> {upsilon, tau, sigma}`.
//!
//! Every value is held as its base-10 logarithm. In the faithful regime the
//! numbers are far below the smallest positive double, so nothing here ever
//! exponentiates a faithful value.

use std::fmt;
use std::f64::consts::LN_10;

use crate::error::{Error, Result};

/// Required separation, in decades, for a "much less than" relation.
pub const SLACK_DECADES: f64 = 1.0;
/// Smallest value the relaxed regime may produce.
pub const RELAXED_FLOOR_LOG10: f64 = -8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderMode {
    Faithful,
    Relaxed,
}

impl LadderMode {
    pub fn name(self) -> &'static str {
        match self {
            LadderMode::Faithful => "faithful",
            LadderMode::Relaxed => "relaxed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "faithful" => Ok(LadderMode::Faithful),
            "relaxed" => Ok(LadderMode::Relaxed),
            other => Err(Error::InvalidArgument(format!("unknown ladder mode `{other}`"))),
        }
    }
}

/// One inequality `lhs < rhs`, both sides as log10.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub statement: &'static str,
    pub lhs_log10: f64,
    pub rhs_log10: f64,
}

impl ConstraintCheck {
    /// `rhs - lhs` in decades.
    pub fn slack_log10(&self) -> f64 {
        self.rhs_log10 - self.lhs_log10
    }

    pub fn satisfied(&self) -> bool {
        self.slack_log10() > 0.0
    }
}

/// Values a caller may pin instead of letting the ladder choose them.
/// All are plain numbers (not logs); `confinement_exponent` is the power in
/// `alpha < beta^p` defining the admissible initial set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LadderOverrides {
    pub eps2: Option<f64>,
    pub eps1: Option<f64>,
    pub upsilon: Option<f64>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub confinement_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterLadder {
    pub horizon: f64,
    pub lambda: f64,
    pub mode: LadderMode,
    pub log10_eps2: f64,
    pub log10_eps1: f64,
    pub log10_upsilon: f64,
    pub log10_tau: f64,
    pub log10_sigma: f64,
    /// Power `p` in `eps1 < alpha < beta^p`.
    pub confinement_exponent: f64,
}

/// `8 e^{2T}`, the exponent the analysis needs for confinement up to `T`.
pub fn faithful_confinement_exponent(horizon: f64) -> f64 {
    8.0 * (2.0 * horizon).exp()
}

/// Exponent keeping exact-field trajectories from `alpha < beta^p` inside the
/// work region up to `horizon`, for `beta` below `10^log10_eps2`. Follows from
/// `ln y(t) ~ 1 + (ln beta - 1) e^t` and `y^2 > x`.
pub fn relaxed_confinement_exponent(horizon: f64, log10_eps2: f64) -> f64 {
    let l = -log10_eps2 * LN_10;
    (3.0 * horizon.exp() - 1.0) * (1.0 + 1.0 / l) + 1.0
}

fn log10_abs_ln(log10_v: f64) -> f64 {
    (log10_v.abs() * LN_10).log10()
}

/// Largest `log10 tau` with `log10 tau + log10 |ln tau| <= target`.
fn solve_tau(target: f64) -> f64 {
    // g(L) = L + log10(-L ln10) is increasing for L < -1/ln10.
    let mut lo = target.min(-1.0) - 10.0 - target.abs();
    let mut hi = -1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + log10_abs_ln(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn positive_log10(what: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v.log10())
    } else {
        Err(Error::InvalidArgument(format!("{what} must lie in (0, 1), got {v}")))
    }
}

pub fn resolve_ladder(horizon: f64, lambda: f64, mode: LadderMode) -> Result<ParameterLadder> {
    resolve_ladder_with(horizon, lambda, mode, &LadderOverrides::default())
}

pub fn resolve_ladder_with(
    horizon: f64,
    lambda: f64,
    mode: LadderMode,
    ov: &LadderOverrides,
) -> Result<ParameterLadder> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must exceed 1, got {lambda}")));
    }
    let pinned = |what, v: Option<f64>| v.map(|v| positive_log10(what, v)).transpose();
    let eps2_pin = pinned("eps2", ov.eps2)?;
    let eps1_pin = pinned("eps1", ov.eps1)?;
    let ups_pin = pinned("upsilon", ov.upsilon)?;
    let tau_pin = pinned("tau", ov.tau)?;
    let sigma_pin = pinned("sigma", ov.sigma)?;
    if let Some(p) = ov.confinement_exponent {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "confinement exponent must be positive, got {p}"
            )));
        }
    }

    let ladder = match mode {
        LadderMode::Faithful => {
            let eps2 = eps2_pin.unwrap_or((-2.0 * lambda.log10() - SLACK_DECADES).min(-1.0));
            let p = ov
                .confinement_exponent
                .unwrap_or_else(|| faithful_confinement_exponent(horizon));
            let eps1 = eps1_pin.unwrap_or(p * eps2 - SLACK_DECADES);
            let ups = ups_pin.unwrap_or(10.0 * eps1 - SLACK_DECADES);
            let tau = tau_pin.unwrap_or_else(|| solve_tau(12.0 * eps1 - SLACK_DECADES));
            let sigma = sigma_pin.unwrap_or(tau.min(eps1) - SLACK_DECADES);
            ParameterLadder {
                horizon,
                lambda,
                mode,
                log10_eps2: eps2,
                log10_eps1: eps1,
                log10_upsilon: ups,
                log10_tau: tau,
                log10_sigma: sigma,
                confinement_exponent: p,
            }
        }
        LadderMode::Relaxed => {
            let floor = RELAXED_FLOOR_LOG10;
            let ups = ups_pin.unwrap_or(floor);
            let tau = tau_pin.unwrap_or(floor + 0.5);
            let sigma = sigma_pin.unwrap_or(floor + 0.5);
            let eps1 = eps1_pin.unwrap_or(floor + SLACK_DECADES);
            // Pick eps2 so that beta^p still leaves one decade above eps1 at
            // beta = eps2, with p the exact-field confinement exponent.
            let eps2 = eps2_pin.unwrap_or_else(|| {
                let room = eps1 + SLACK_DECADES;
                let (mut lo, mut hi) = (-8.0_f64, -1e-3_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let p = relaxed_confinement_exponent(horizon, mid);
                    if p * mid >= room {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            });
            let p = ov
                .confinement_exponent
                .unwrap_or_else(|| relaxed_confinement_exponent(horizon, eps2));
            ParameterLadder {
                horizon,
                lambda,
                mode,
                log10_eps2: eps2,
                log10_eps1: eps1,
                log10_upsilon: ups,
                log10_tau: tau,
                log10_sigma: sigma,
                confinement_exponent: p,
            }
        }
    };

    let broken: Vec<String> = ladder
        .required_checks()
        .into_iter()
        .filter(|c| !c.satisfied())
        .map(|c| format!("`{}` ({})", c.name, c.statement))
        .collect();
    if !broken.is_empty() {
        return Err(Error::LadderViolation(broken.join(", ")));
    }
    Ok(ladder)
}

impl ParameterLadder {
    pub fn eps2(&self) -> f64 {
        10f64.powf(self.log10_eps2)
    }
    pub fn eps1(&self) -> f64 {
        10f64.powf(self.log10_eps1)
    }
    pub fn upsilon(&self) -> f64 {
        10f64.powf(self.log10_upsilon)
    }
    pub fn tau(&self) -> f64 {
        10f64.powf(self.log10_tau)
    }
    pub fn sigma(&self) -> f64 {
        10f64.powf(self.log10_sigma)
    }

    /// Ordering relations every mode must respect.
    fn required_checks(&self) -> Vec<ConstraintCheck> {
        let mut out = vec![
            ConstraintCheck {
                name: "order.eps1-eps2",
                statement: "eps1 < eps2",
                lhs_log10: self.log10_eps1,
                rhs_log10: self.log10_eps2,
            },
            ConstraintCheck {
                name: "order.upsilon-eps1",
                statement: "upsilon < eps1",
                lhs_log10: self.log10_upsilon,
                rhs_log10: self.log10_eps1,
            },
            ConstraintCheck {
                name: "order.tau-eps1",
                statement: "tau < eps1",
                lhs_log10: self.log10_tau,
                rhs_log10: self.log10_eps1,
            },
            ConstraintCheck {
                name: "order.sigma-eps1",
                statement: "sigma < eps1",
                lhs_log10: self.log10_sigma,
                rhs_log10: self.log10_eps1,
            },
            ConstraintCheck {
                name: "initial-set.nonempty",
                statement: "eps1 < eps2^p",
                lhs_log10: self.log10_eps1,
                rhs_log10: self.confinement_exponent * self.log10_eps2,
            },
        ];
        if self.mode == LadderMode::Faithful {
            out.extend(self.analysis_checks());
        }
        out
    }

    /// The inequalities of the growth argument, with the required decade of
    /// slack folded into the right-hand side for the "much less" relations.
    pub fn analysis_checks(&self) -> Vec<ConstraintCheck> {
        let e1 = self.log10_eps1;
        let e2 = self.log10_eps2;
        let u = self.log10_upsilon;
        let tau = self.log10_tau;
        vec![
            ConstraintCheck {
                name: "eps2-vs-lambda",
                statement: "eps2 << lambda^-2",
                lhs_log10: e2,
                rhs_log10: -2.0 * self.lambda.log10(),
            },
            ConstraintCheck {
                name: "confinement",
                statement: "eps1 < eps2^(8 e^(2T))",
                lhs_log10: e1,
                rhs_log10: faithful_confinement_exponent(self.horizon) * e2,
            },
            ConstraintCheck {
                name: "perturbation.drift",
                statement: "upsilon <~ eps1 |log eps2| / eps2",
                lhs_log10: u,
                rhs_log10: e1 + log10_abs_ln(e2) - e2,
            },
            ConstraintCheck {
                name: "perturbation.size",
                statement: "upsilon < eps1^10",
                lhs_log10: u,
                rhs_log10: 10.0 * e1,
            },
            ConstraintCheck {
                name: "perturbation.horizon",
                statement: "upsilon << 1/(T+1)",
                lhs_log10: u,
                rhs_log10: -(self.horizon + 1.0).log10(),
            },
            ConstraintCheck {
                name: "cross-size",
                statement: "eps1^-2 tau |log tau| <= eps1^10",
                lhs_log10: -2.0 * e1 + tau + log10_abs_ln(tau),
                rhs_log10: 10.0 * e1,
            },
            ConstraintCheck {
                name: "mollifier-width",
                statement: "sigma << eps1",
                lhs_log10: self.log10_sigma,
                rhs_log10: e1,
            },
        ]
    }

    /// All checks, analysis inequalities first.
    pub fn checks(&self) -> Vec<ConstraintCheck> {
        let mut all = self.analysis_checks();
        let extra: Vec<_> = self
            .required_checks()
            .into_iter()
            .filter(|c| !all.iter().any(|a| a.name == c.name))
            .collect();
        all.extend(extra);
        all
    }

    /// `eps1 < alpha < beta^p` and `beta < eps2`, evaluated on logarithms.
    pub fn initial_set_contains(&self, alpha: f64, beta: f64) -> bool {
        if !(alpha > 0.0 && beta > 0.0 && beta < 1.0) {
            return false;
        }
        let la = alpha.log10();
        let lb = beta.log10();
        la > self.log10_eps1 && la < self.confinement_exponent * lb && lb < self.log10_eps2
    }

    /// Flat `key = value` lines; `log10_*` values are logarithms.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("mode", self.mode.name().into());
        put("horizon", format!("{:?}", self.horizon));
        put("lambda", format!("{:?}", self.lambda));
        put("log10_eps2", format!("{:?}", self.log10_eps2));
        put("log10_eps1", format!("{:?}", self.log10_eps1));
        put("log10_upsilon", format!("{:?}", self.log10_upsilon));
        put("log10_tau", format!("{:?}", self.log10_tau));
        put("log10_sigma", format!("{:?}", self.log10_sigma));
        put("confinement_exponent", format!("{:?}", self.confinement_exponent));
        for c in self.checks() {
            put(
                &format!("check.{}", c.name),
                format!(
                    "{} slack_log10={:?}",
                    if c.satisfied() { "satisfied" } else { "violated" },
                    c.slack_log10()
                ),
            );
        }
        s
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut get = std::collections::HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("ladder line {}: expected `key = value`", lineno + 1))
            })?;
            get.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str| -> Result<f64> {
            get.get(k)
                .ok_or_else(|| Error::Format(format!("ladder: missing `{k}`")))?
                .parse()
                .map_err(|_| Error::Format(format!("ladder: bad number for `{k}`")))
        };
        let mode = LadderMode::parse(
            get.get("mode")
                .ok_or_else(|| Error::Format("ladder: missing `mode`".into()))?,
        )?;
        Ok(ParameterLadder {
            horizon: num("horizon")?,
            lambda: num("lambda")?,
            mode,
            log10_eps2: num("log10_eps2")?,
            log10_eps1: num("log10_eps1")?,
            log10_upsilon: num("log10_upsilon")?,
            log10_tau: num("log10_tau")?,
            log10_sigma: num("log10_sigma")?,
            confinement_exponent: num("confinement_exponent")?,
        })
    }
}

impl fmt::Display for ParameterLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faithful_exponent_at_unit_horizon() {
        let l = resolve_ladder_with(
            1.0,
            2.0,
            LadderMode::Faithful,
            &LadderOverrides {
                eps2: Some(0.1),
                ..Default::default()
            },
        )
        .unwrap();
        let p = 8.0 * (2.0f64).exp();
        assert!((l.confinement_exponent - 59.112).abs() < 1e-3);
        assert!(l.log10_eps1 < -p);
        assert!(l.log10_upsilon <= 10.0 * l.log10_eps1);
    }

    #[test]
    fn faithful_checks_hold_with_a_decade_to_spare() {
        for t in [0.5, 1.0, 2.0] {
            let l = resolve_ladder(t, 2.0, LadderMode::Faithful).unwrap();
            for c in l.analysis_checks() {
                assert!(c.slack_log10() >= SLACK_DECADES - 1e-9, "{t}: {c:?}");
            }
        }
    }

    #[test]
    fn relaxed_values_stay_above_floor() {
        let l = resolve_ladder(1.0, 2.0, LadderMode::Relaxed).unwrap();
        for v in [l.log10_eps2, l.log10_eps1, l.log10_upsilon, l.log10_tau, l.log10_sigma] {
            assert!(v >= RELAXED_FLOOR_LOG10);
        }
        assert!(l.log10_eps1 < l.log10_eps2);
        assert!(l.log10_upsilon < l.log10_eps1);
        assert!(l.log10_tau < l.log10_eps1);
        assert!(l.log10_sigma < l.log10_eps1);
        assert!(l.analysis_checks().iter().any(|c| !c.satisfied()));
    }

    #[test]
    fn tau_solver_inverts_the_size_relation() {
        let target = -120.0;
        let t = solve_tau(target);
        assert!((t + log10_abs_ln(t) - target).abs() < 1e-9);
    }

    #[test]
    fn contradictory_override_names_the_inequality() {
        let err = resolve_ladder_with(
            1.0,
            2.0,
            LadderMode::Faithful,
            &LadderOverrides {
                eps2: Some(0.1),
                upsilon: Some(1e-3),
                ..Default::default()
            },
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("upsilon < eps1^10"), "{err}");
    }

    #[test]
    fn kv_round_trip() {
        let l = resolve_ladder(0.5, 3.0, LadderMode::Faithful).unwrap();
        let text = l.to_kv();
        assert!(text.contains("check.confinement = satisfied"));
        assert_eq!(ParameterLadder::from_kv(&text).unwrap(), l);
    }
}
