use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vgrad::diagnostics::{format_sig17, CheckReport, CheckRow};
use vgrad::initial::ParameterLadder;
use vgrad::model::{
    admissible_perturbation_check, integrate_variational, write_path_csv, AlephRegion, CrossFieldVariant,
    IntegrationOptions, Perturbation, VariantKind, ADMISSIBLE_FACTOR,
};

use crate::error::CliError;
use crate::manifest::{Outputs, RunManifest, CHECKS_NAME};
use crate::simulate::resolve_ladder;
use crate::Context;

/// Rows kept per path file.
const PATH_ROWS: usize = 1000;

/// Names the first initial-set inequality `(alpha, beta)` breaks.
fn initial_set_violation(alpha: f64, beta: f64, ladder: &ParameterLadder) -> Option<String> {
    if !(alpha > 0.0 && beta > 0.0 && beta < 1.0) {
        return Some("0 < alpha and 0 < beta < 1".into());
    }
    let (la, lb) = (alpha.log10(), beta.log10());
    let p = ladder.confinement_exponent;
    if la <= ladder.log10_eps1 {
        Some(format!("eps1 < alpha (log10 eps1 = {})", ladder.log10_eps1))
    } else if la >= p * lb {
        Some(format!("alpha < beta^p (p = {p})"))
    } else if la >= 2.0 * lb {
        Some("alpha < beta^2 (work region)".into())
    } else if lb >= ladder.log10_eps2 {
        Some(format!("beta < eps2 (log10 eps2 = {})", ladder.log10_eps2))
    } else {
        None
    }
}

/// `nu = s K ups (x cos t, -y x / (x + y))`: both components and their first
/// derivatives stay below `s K ups` (times `r` for the values) on `x, y > 0`.
fn linear_perturbation(scale: f64, upsilon: f64) -> Perturbation {
    let a = scale * ADMISSIBLE_FACTOR * upsilon;
    Perturbation::new(
        move |x, _, t| a * x * t.cos(),
        move |x, y, _| -a * y * (x / (x + y)),
        upsilon,
    )
}

pub fn cmd_model(ctx: &Context, out: &mut Outputs) -> Result<(RunManifest, CheckReport), CliError> {
    let cfg = &ctx.config;
    let m = &cfg.model;
    let start = Instant::now();
    let ladder = resolve_ladder(cfg)?;
    let region = AlephRegion::from_ladder(&ladder)?;
    let variant = CrossFieldVariant::parse(&m.variant, m.c1, m.c2)?;
    let horizon = cfg.time.t_end;
    if !(horizon > 0.0) {
        return Err(CliError::Usage("model runs need [time] t_end > 0".into()));
    }

    let nu = match m.perturbation.as_str() {
        "linear" => {
            let nu = linear_perturbation(m.perturbation_scale, ladder.upsilon());
            let rep = admissible_perturbation_check(&nu, &region, horizon, 2000, ctx.seed);
            if !rep.passed {
                return Err(CliError::Usage(format!(
                    "perturbation is not admissible: value margin {:.3e}, gradient margin {:.3e} (both must exceed 1)",
                    rep.value_margin, rep.gradient_margin
                )));
            }
            nu
        }
        _ => Perturbation::zero(),
    };

    let mut points: Vec<(f64, f64)> = Vec::new();
    for &[a, b] in &m.points {
        if let Some(why) = initial_set_violation(a, b, &ladder) {
            return Err(CliError::Usage(format!(
                "point (alpha, beta) = ({a:e}, {b:e}) is outside the initial set: violates {why}"
            )));
        }
        points.push((a, b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (le1, le2) = (ladder.eps1().ln(), ladder.eps2().ln());
    // p below 2 would reach past the parabola bounding the work region
    let q = ladder.confinement_exponent.max(2.0);
    for _ in 0..m.samples {
        // log-uniform beta, then log-uniform alpha in (eps1, beta^q)
        let lb = rng.random_range((le1 / q)..le2);
        let la = rng.random_range(le1..(q * lb));
        points.push((la.exp(), lb.exp()));
    }
    if points.is_empty() {
        return Err(CliError::Usage("[model] needs `points` or `samples > 0`".into()));
    }

    let steps = (horizon / cfg.time.dt).ceil().max(1.0) as usize;
    let opts = IntegrationOptions {
        dt: cfg.time.dt,
        record_every: steps.div_ceil(PATH_ROWS).max(1),
        ..Default::default()
    };
    let runs = vgrad::par::map_slice(&points, |&(a, b)| {
        integrate_variational((a, b), horizon, &nu, &variant, &region, &opts)
    });

    let mut table = String::from("index,alpha,beta,x_end,y_end,x_alpha,bound,margin,exit_t,exit_boundary\n");
    let mut checks = CheckReport::new();
    for (k, (&(a, b), tr)) in points.iter().zip(runs).enumerate() {
        let tr = tr?;
        write_path_csv(&out.file(&format!("path_{k:03}.csv")), &tr.path)?;
        let last = tr.last();
        let xa = last.jac.map_or(f64::NAN, |j| j[0][0]);
        let bound = (1.0 / b).powf((horizon.exp() - 1.0) / 2.0);
        let margin = xa / bound;
        let (et, eb) = match tr.exit {
            Some(e) => (format_sig17(e.t), format!("{:?}", e.boundary)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            table,
            "{k},{},{},{},{},{},{},{},{et},{eb}",
            format_sig17(a),
            format_sig17(b),
            format_sig17(last.x),
            format_sig17(last.y),
            format_sig17(xa),
            format_sig17(bound),
            format_sig17(margin),
        );
        checks.push(CheckRow::new(
            format!("point {k} stretch margin"),
            "key-estimate",
            margin,
            ">= 1",
            margin >= 1.0,
        ));
        if variant.kind == VariantKind::Leading && nu.is_zero() {
            let exact = b.powf(horizon.exp());
            let err = (last.y - exact).abs() / exact;
            checks.push(CheckRow::new(
                format!("point {k} closed form"),
                "model-closed-form",
                err,
                "<= 1e-8",
                err <= 1e-8,
            ));
        }
    }
    out.write_text("points.csv", &table)?;
    out.write_text(CHECKS_NAME, &checks.render())?;

    let manifest = RunManifest {
        command: "model".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        grid_n: None,
        threads: ctx.threads,
        seed: ctx.seed,
        timings: vec![("total".into(), start.elapsed().as_secs_f64())],
        config: ctx.config_text.clone(),
        ladder: Some(ladder.to_kv()),
        files: Vec::new(),
    };
    Ok((manifest, checks))
}
