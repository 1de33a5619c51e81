use std::path::Path;

use super::field::{AlephRegion, CrossFieldVariant, RegionBoundary, AXIS_GUARD};
use super::perturbation::Perturbation;
use crate::diagnostics::format_sig17;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// `[[x_a, x_b], [y_a, y_b]]`, derivatives in the initial point `(a, b)`.
    pub jac: Option<[[f64; 2]; 2]>,
}

impl PhaseState {
    pub fn det(&self) -> Option<f64> {
        self.jac.map(|j| j[0][0] * j[1][1] - j[0][1] * j[1][0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub boundary: RegionBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub path: Vec<PhaseState>,
    /// First recorded state outside the region, if any.
    pub exit: Option<ExitRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.path.last().expect("trajectory has at least the initial state")
    }

    /// Prefix of the path before the exit.
    pub fn inside(&self) -> &[PhaseState] {
        match self.exit {
            Some(e) => {
                let k = self.path.partition_point(|s| s.t < e.t);
                &self.path[..k]
            }
            None => &self.path,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Upper bound on the RK4 step; the step actually used divides the horizon evenly.
    pub dt: f64,
    /// Record every k-th step (the final state is always recorded).
    pub record_every: usize,
    /// Stop with an error once a stage evaluation comes within this distance of an axis.
    pub axis_guard: f64,
    /// Stop at the first exit from the region instead of continuing.
    pub stop_on_exit: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            dt: 1e-4,
            record_every: 1,
            axis_guard: AXIS_GUARD,
            stop_on_exit: false,
        }
    }
}

struct System<'a> {
    variant: &'a CrossFieldVariant,
    nu: &'a Perturbation,
    guard: f64,
    variational: bool,
}

impl System<'_> {
    /// Derivative of `[x, y, xa, ya, xb, yb]`.
    fn rhs(&self, t: f64, s: &[f64; 6]) -> Option<[f64; 6]> {
        let (x, y) = (s[0], s[1]);
        if !(x >= self.guard && y >= self.guard) {
            return None;
        }
        let (mu1, mu2) = self.variant.eval(x, y);
        let (n1, n2) = self.nu.eval(x, y, t);
        let mut d = [mu1 + n1, mu2 + n2, 0.0, 0.0, 0.0, 0.0];
        if self.variational {
            let a = self.variant.jacobian(x, y);
            let b = self.nu.jacobian(x, y, t);
            let f = [
                [a[0][0] + b[0][0], a[0][1] + b[0][1]],
                [a[1][0] + b[1][0], a[1][1] + b[1][1]],
            ];
            for col in 0..2 {
                let (p, q) = (s[2 + 2 * col], s[3 + 2 * col]);
                d[2 + 2 * col] = f[0][0] * p + f[0][1] * q;
                d[3 + 2 * col] = f[1][0] * p + f[1][1] * q;
            }
        }
        Some(d)
    }
}

fn axpy(s: &[f64; 6], k: &[f64; 6], h: f64) -> [f64; 6] {
    std::array::from_fn(|i| s[i] + h * k[i])
}

fn integrate(
    p0: (f64, f64),
    horizon: f64,
    nu: &Perturbation,
    variant: &CrossFieldVariant,
    region: &AlephRegion,
    opts: &IntegrationOptions,
    variational: bool,
) -> Result<Trajectory> {
    let (a, b) = p0;
    if region.violation(a, b).is_some() {
        return Err(Error::OutsideRegion {
            x: a,
            y: b,
            region: "the work region (initial point)",
        });
    }
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be >= 0, got {horizon}")));
    }
    let sys = System {
        variant,
        nu,
        guard: opts.axis_guard,
        variational,
    };
    let steps = (horizon / opts.dt).ceil().max(if horizon > 0.0 { 1.0 } else { 0.0 }) as usize;
    let h = if steps > 0 { horizon / steps as f64 } else { 0.0 };
    let every = opts.record_every.max(1);
    let snapshot = |t: f64, s: &[f64; 6]| PhaseState {
        t,
        x: s[0],
        y: s[1],
        jac: variational.then_some([[s[2], s[4]], [s[3], s[5]]]),
    };

    let mut s = [a, b, 1.0, 0.0, 0.0, 1.0];
    let mut path = vec![snapshot(0.0, &s)];
    let mut exit = None;
    for k in 0..steps {
        let t = k as f64 * h;
        let guard = || Error::AxisGuard { time: t };
        let k1 = sys.rhs(t, &s).ok_or_else(guard)?;
        let k2 = sys.rhs(t + 0.5 * h, &axpy(&s, &k1, 0.5 * h)).ok_or_else(guard)?;
        let k3 = sys.rhs(t + 0.5 * h, &axpy(&s, &k2, 0.5 * h)).ok_or_else(guard)?;
        let k4 = sys.rhs(t + h, &axpy(&s, &k3, h)).ok_or_else(guard)?;
        for i in 0..6 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_new = if k + 1 == steps { horizon } else { (k + 1) as f64 * h };
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { time: t_new });
        }
        let left = exit.is_none().then(|| region.violation(s[0], s[1])).flatten();
        if let Some(boundary) = left {
            exit = Some(ExitRecord {
                t: t_new,
                x: s[0],
                y: s[1],
                boundary,
            });
        }
        if (k + 1) % every == 0 || k + 1 == steps || left.is_some() {
            path.push(snapshot(t_new, &s));
        }
        if left.is_some() && opts.stop_on_exit {
            break;
        }
    }
    Ok(Trajectory { path, exit })
}

/// Fixed-step RK4 path of `x' = mu1 + nu1, y' = mu2 + nu2` from `(alpha, beta)`.
pub fn integrate_trajectory(
    p0: (f64, f64),
    horizon: f64,
    nu: &Perturbation,
    variant: &CrossFieldVariant,
    region: &AlephRegion,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    integrate(p0, horizon, nu, variant, region, opts, false)
}

/// As [`integrate_trajectory`], co-integrating the full Jacobian of the flow
/// map with respect to the initial point.
pub fn integrate_variational(
    p0: (f64, f64),
    horizon: f64,
    nu: &Perturbation,
    variant: &CrossFieldVariant,
    region: &AlephRegion,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    integrate(p0, horizon, nu, variant, region, opts, true)
}

/// Writes `t,x,y,xa,ya,xb,yb,detJ`; Jacobian columns are empty for plain paths.
pub fn write_path_csv(path: &Path, states: &[PhaseState]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["t", "x", "y", "xa", "ya", "xb", "yb", "detJ"])
        .map_err(|e| Error::csv(path, e))?;
    for s in states {
        let mut rec = vec![format_sig17(s.t), format_sig17(s.x), format_sig17(s.y)];
        match (s.jac, s.det()) {
            (Some(j), Some(d)) => {
                for v in [j[0][0], j[1][0], j[0][1], j[1][1], d] {
                    rec.push(format_sig17(v));
                }
            }
            _ => rec.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn loose_region() -> AlephRegion {
        AlephRegion::new(1e-12, 0.5).unwrap()
    }

    #[test]
    fn leading_closed_forms() {
        let opts = IntegrationOptions::default();
        let tr = integrate_variational(
            (1e-6, 0.1),
            LN_2,
            &Perturbation::zero(),
            &CrossFieldVariant::leading(),
            &loose_region(),
            &opts,
        )
        .unwrap();
        let end = tr.last();
        assert_eq!(end.t, LN_2);
        assert!((end.y / 0.01 - 1.0).abs() < 1e-8, "{}", end.y);
        assert!((end.x / 1e-5 - 1.0).abs() < 1e-8, "{}", end.x);
        let xa = end.jac.unwrap()[0][0];
        assert!((xa / 10.0 - 1.0).abs() < 1e-8, "{xa}");
    }

    #[test]
    fn exact_flow_preserves_jacobian_determinant() {
        let tr = integrate_variational(
            (1e-5, 0.05),
            1.0,
            &Perturbation::zero(),
            &CrossFieldVariant::exact(),
            &loose_region(),
            &IntegrationOptions::default(),
        )
        .unwrap();
        for s in &tr.path {
            assert!((s.det().unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn variational_matches_finite_differences() {
        let nu = Perturbation::new(
            |x, y, t| 1e-9 * x.hypot(y) * (1.0 + 0.5 * (3.0 * t).sin()),
            |x, _, _| -2e-9 * x,
            1e-3,
        );
        for variant in [CrossFieldVariant::exact(), CrossFieldVariant::leading()] {
            for zero in [true, false] {
                let nu = if zero { &Perturbation::zero() } else { &nu };
                let (a, b) = (2e-6, 0.08);
                let run = |p| {
                    integrate_variational(p, 0.8, nu, &variant, &loose_region(), &IntegrationOptions::default())
                        .unwrap()
                };
                let xa = run((a, b)).last().jac.unwrap()[0][0];
                let d = 1e-6 * a;
                let fd = (run((a + d, b)).last().x - run((a - d, b)).last().x) / (2.0 * d);
                assert!((xa - fd).abs() < 1e-4 * fd.abs(), "{xa} vs {fd}");
            }
        }
    }

    #[test]
    fn monotone_until_exit_and_exit_recorded() {
        let region = AlephRegion::new(1e-10, 0.1).unwrap();
        let tr = integrate_trajectory(
            (1e-4, 0.05),
            3.0,
            &Perturbation::zero(),
            &CrossFieldVariant::exact(),
            &region,
            &IntegrationOptions::default(),
        )
        .unwrap();
        let exit = tr.exit.expect("leaves through the parabola");
        assert_eq!(exit.boundary, RegionBoundary::Parabola);
        for w in tr.inside().windows(2) {
            assert!(w[1].x >= w[0].x && w[1].y <= w[0].y);
        }
    }

    #[test]
    fn refuses_start_outside_and_guard_band() {
        let r = loose_region();
        let opts = IntegrationOptions::default();
        let z = Perturbation::zero();
        let e = CrossFieldVariant::exact();
        assert!(integrate_trajectory((0.3, 0.1), 1.0, &z, &e, &r, &opts).is_err());
        let r2 = AlephRegion::new(1e-30, 0.5).unwrap();
        let err = integrate_trajectory((1e-28, 1e-3), 5.0, &z, &e, &r2, &opts).unwrap_err();
        assert!(matches!(err, Error::AxisGuard { .. }), "{err:?}");
    }

    #[test]
    fn path_csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("path.csv");
        let tr = integrate_variational(
            (1e-6, 0.1),
            0.01,
            &Perturbation::zero(),
            &CrossFieldVariant::leading(),
            &loose_region(),
            &IntegrationOptions {
                dt: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        write_path_csv(&p, &tr.path).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,y,xa,ya,xb,yb,detJ");
        assert_eq!(lines.count(), 11);
    }
}
