use std::fmt::Write as _;
use std::time::Instant;

use vgrad::diagnostics::{
    bump_hessian_scaling, displaced_interface_layer, format_sig17, growth_ratio_probe, halving_family,
    perturbation_field_bounds, CheckReport, CheckRow, GrowthRun,
};
use vgrad::initial::BumpSpec;
use vgrad::spectral::Grid;

use crate::config::{Config, InitKind, SweepAxis};
use crate::error::CliError;
use crate::manifest::{Outputs, RunManifest, CHECKS_NAME};
use crate::simulate::{initial_state, resolve_ladder, run_record, write_record, RunRecord};
use crate::Context;

fn axis_name(a: SweepAxis) -> &'static str {
    match a {
        SweepAxis::Ratio => "ratio",
        SweepAxis::Tau => "tau",
        SweepAxis::Omega => "omega",
        SweepAxis::N => "n",
        SweepAxis::AlphaExponent => "alpha_exponent",
    }
}

/// Config of one member of a solver-backed sweep.
fn member_config(base: &Config, axis: SweepAxis, v: f64) -> Result<(Config, usize, f64), CliError> {
    let mut c = base.clone();
    let (mut n, mut alpha) = (base.grid.n, base.solver.alpha_exponent);
    match axis {
        SweepAxis::Ratio => c.init.height = base.init.height.signum() * v * base.init.diameter,
        SweepAxis::N => {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(CliError::Usage(format!("n-sweep value {v} is not a grid size")));
            }
            n = v as usize;
        }
        SweepAxis::AlphaExponent => alpha = v,
        _ => unreachable!("not a solver sweep"),
    }
    c.grid.n = n;
    c.solver.alpha_exponent = alpha;
    Ok((c, n, alpha))
}

fn solver_sweep(
    ctx: &Context,
    axis: SweepAxis,
    out: &mut Outputs,
    table: &mut String,
    checks: &mut CheckReport,
) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let values = &cfg.sweep.values;
    let members: Vec<Result<(Config, usize, f64), CliError>> =
        values.iter().map(|&v| member_config(cfg, axis, v)).collect();
    let results: Vec<Result<RunRecord, CliError>> = vgrad::par::map_slice(&members, |m| {
        let (c, n, alpha) = m.as_ref().map_err(|e| CliError::Usage(e.to_string()))?;
        let (state, _) = initial_state(c, *n, *alpha)?;
        run_record(c, state, |_| Ok(()))
    });

    let _ = writeln!(
        table,
        "index,{},status,max_ratio,t_at_max,increasing_until,active_slope,envelope_c",
        axis_name(axis)
    );
    let mut ok: Vec<(f64, RunRecord, f64)> = Vec::new();
    for (k, (&v, res)) in values.iter().zip(results).enumerate() {
        match res.and_then(|rec| {
            write_record(out, &rec, &format!("series_{k:02}.csv"), &format!("growth_{k:02}.csv"))?;
            let c = rec.envelope_c()?;
            Ok((rec, c))
        }) {
            Ok((rec, c)) => {
                let run = GrowthRun {
                    label: format!("{k}"),
                    parameter: v,
                    series: rec.grad().clone(),
                    initial: rec.initial_grad,
                };
                let row = &growth_ratio_probe(&[run])?.rows[0];
                let slope = row.active_fit.map(|f| format_sig17(f.slope)).unwrap_or_default();
                let _ = writeln!(
                    table,
                    "{k},{},ok,{},{},{},{slope},{}",
                    format_sig17(v),
                    format_sig17(row.max_ratio),
                    format_sig17(row.t_at_max),
                    format_sig17(row.increasing_until),
                    format_sig17(c)
                );
                checks.extend(rec.checks(cfg, &format!("member {k}: "))?);
                ok.push((v, rec, c));
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                let _ = writeln!(table, "{k},{},error: {msg},,,,,", format_sig17(v));
                checks.push(CheckRow::new(format!("member {k} run"), "sweep-member", f64::NAN, "completes", false));
            }
        }
    }

    match axis {
        SweepAxis::Ratio if ok.len() >= 2 => {
            let runs: Vec<GrowthRun> = ok
                .iter()
                .map(|(v, rec, _)| GrowthRun {
                    label: format!("{v}"),
                    parameter: *v,
                    series: rec.grad().clone(),
                    initial: rec.initial_grad,
                })
                .collect();
            let t = growth_ratio_probe(&runs)?;
            let worst = t
                .rows
                .windows(2)
                .map(|w| w[1].max_ratio - w[0].max_ratio)
                .fold(f64::INFINITY, f64::min);
            checks.push(CheckRow::new(
                "max ratio trend across the family",
                "growth-trend",
                worst,
                ">= 0",
                t.nondecreasing,
            ));
        }
        SweepAxis::N if ok.len() >= 2 => {
            let tol = cfg.checks.refinement_tolerance;
            let base = ok[0].2;
            for (v, _, c) in &ok[1..] {
                let change = (c - base).abs() / base.abs();
                checks.push(CheckRow::new(
                    format!("envelope constant change at n = {v}"),
                    "refinement",
                    change,
                    format!("<= {tol}"),
                    change <= tol,
                ));
            }
        }
        _ => {}
    }
    Ok(())
}

fn tau_sweep(ctx: &Context, table: &mut String, checks: &mut CheckReport) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let grid = Grid::new(cfg.grid.n)?;
    let eps1 = cfg.ladder.eps1.unwrap_or(0.3);
    let radii = &cfg.sweep.radii;
    let results = vgrad::par::map_slice(&cfg.sweep.values, |&tau| {
        let p = displaced_interface_layer(grid, tau)?;
        perturbation_field_bounds(&p, eps1, tau, radii)
    });
    let _ = writeln!(table, "index,tau,status,radius,sup_over_r,normalized,bound_constant,origin_ratio");
    let mut per_radius: Vec<Vec<f64>> = vec![Vec::new(); radii.len()];
    let mut origin = 0.0f64;
    for (k, (&tau, res)) in cfg.sweep.values.iter().zip(results).enumerate() {
        match res {
            Ok(b) => {
                origin = origin.max(b.origin_ratio());
                for (j, rb) in b.radii.iter().enumerate() {
                    let norm = rb.sup_over_r / (tau * tau.ln().abs());
                    per_radius[j].push(norm);
                    let _ = writeln!(
                        table,
                        "{k},{},ok,{},{},{},{},{}",
                        format_sig17(tau),
                        format_sig17(rb.radius),
                        format_sig17(rb.sup_over_r),
                        format_sig17(norm),
                        rb.bound_constant.map(format_sig17).unwrap_or_default(),
                        format_sig17(b.origin_ratio())
                    );
                }
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                let _ = writeln!(table, "{k},{},error: {msg},,,,,", format_sig17(tau));
                checks.push(CheckRow::new(format!("member {k} run"), "sweep-member", f64::NAN, "completes", false));
            }
        }
    }
    for (r, norms) in radii.iter().zip(&per_radius) {
        if norms.len() >= 2 {
            let spread = norms.iter().copied().fold(0.0, f64::max) / norms.iter().copied().fold(f64::INFINITY, f64::min);
            checks.push(CheckRow::new(
                format!("layer field tracks tau |ln tau| at r = {r}"),
                "perturbation-bounds",
                spread,
                "<= 2",
                spread <= 2.0,
            ));
        }
    }
    checks.push(CheckRow::new(
        "layer field at the origin",
        "perturbation-bounds",
        origin,
        "<= 1e-6",
        origin <= 1e-6,
    ));
    Ok(())
}

fn omega_sweep(ctx: &Context, table: &mut String, checks: &mut CheckReport) -> Result<Option<String>, CliError> {
    let cfg = &ctx.config;
    let ladder = resolve_ladder(cfg)?;
    let base = BumpSpec {
        center: (cfg.init.center_x, cfg.init.center_y),
        support_diameter: cfg.init.diameter,
        height: cfg.init.height,
    };
    let s = bump_hessian_scaling(&halving_family(base, cfg.sweep.steps), Grid::new(cfg.grid.n)?, &ladder)?;
    let _ = writeln!(table, "index,diameter,omega,gradient,hessian,constant");
    for (k, r) in s.rows.iter().enumerate() {
        let _ = writeln!(
            table,
            "{k},{},{},{},{},{}",
            format_sig17(r.spec.support_diameter),
            format_sig17(r.omega),
            format_sig17(r.gradient),
            format_sig17(r.hessian),
            format_sig17(r.constant())
        );
    }
    let _ = writeln!(
        table,
        "fit,slope={},intercept={},r_squared={},,",
        format_sig17(s.fit.slope),
        format_sig17(s.fit.intercept),
        format_sig17(s.fit.r_squared)
    );
    checks.push(CheckRow::new(
        "hessian against omega slope",
        "hessian-scaling",
        s.fit.slope,
        "in [0.35, 0.65]",
        (0.35..=0.65).contains(&s.fit.slope),
    ));
    Ok(Some(ladder.to_kv()))
}

pub fn cmd_sweep(ctx: &Context, out: &mut Outputs) -> Result<(RunManifest, CheckReport), CliError> {
    let cfg = &ctx.config;
    let axis = cfg
        .sweep
        .axis
        .ok_or_else(|| CliError::Usage("[sweep] needs `axis`".into()))?;
    if axis != SweepAxis::Omega && cfg.sweep.values.is_empty() {
        return Err(CliError::Usage("[sweep] needs at least one value".into()));
    }
    let start = Instant::now();
    let mut table = String::new();
    let mut checks = CheckReport::new();
    let ladder = match axis {
        SweepAxis::Tau => {
            tau_sweep(ctx, &mut table, &mut checks)?;
            None
        }
        SweepAxis::Omega => omega_sweep(ctx, &mut table, &mut checks)?,
        _ => {
            solver_sweep(ctx, axis, out, &mut table, &mut checks)?;
            match cfg.init.kind {
                InitKind::Cross | InitKind::CrossBump => Some(resolve_ladder(cfg)?.to_kv()),
                _ => None,
            }
        }
    };
    out.write_text("sweep.csv", &table)?;
    out.write_text(CHECKS_NAME, &checks.render())?;
    let manifest = RunManifest {
        command: format!("sweep {}", axis_name(axis)),
        version: env!("CARGO_PKG_VERSION").into(),
        grid_n: Some(cfg.grid.n),
        threads: ctx.threads,
        seed: ctx.seed,
        timings: vec![("total".into(), start.elapsed().as_secs_f64())],
        config: ctx.config_text.clone(),
        ladder,
        files: Vec::new(),
    };
    Ok((manifest, checks))
}
