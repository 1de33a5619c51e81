//! Acceptance suite: twelve criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines always reach the terminal. The exit
//! status is nonzero when the set of failing criteria differs from
//! `KNOWN_INFEASIBLE`, so an unexpected pass is reported as loudly as an
//! unexpected failure.

use std::f64::consts::{LN_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vgrad::diagnostics::*;
use vgrad::initial::*;
use vgrad::model::*;
use vgrad::spectral::*;

/// Criteria whose stated targets cannot be met together with the data
/// constraints they sit on (see the growth-family line for the arithmetic).
const KNOWN_INFEASIBLE: &[u32] = &[7];

struct Outcome {
    passed: bool,
    detail: String,
    extra: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome {
            passed,
            detail,
            extra: Vec::new(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Ladder for solver runs: values large enough to resolve on a grid.
fn pde_ladder(horizon: f64) -> ParameterLadder {
    let o = LadderOverrides {
        eps2: Some(0.9),
        eps1: Some(0.3),
        tau: Some(0.2),
        sigma: Some(0.1),
        upsilon: Some(1e-3),
        confinement_exponent: Some(1.0),
    };
    resolve_ladder_with(horizon, 10.0, LadderMode::Relaxed, &o).expect("pde ladder")
}

fn smooth_even(grid: Grid, scale: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        scale * (x.sin() * y.sin() + 0.6 * (2.0 * x + y).cos() + 0.3 * (x - 3.0 * y).cos())
    })
}

fn grad_series(theta: ScalarField, alpha: f64, t_end: f64, every: f64) -> vgrad::error::Result<DiagnosticSeries> {
    let mut st = SimState::new(theta, alpha)?;
    let p = RunParams {
        t_end,
        cfl: 0.4,
        sample_every: every,
    };
    Ok(run_recording(&mut st, &p, &[Quantity::GradSup])?.remove(0))
}

fn c1_model_closed_form() -> Outcome {
    let region = AlephRegion::new(1e-12, 0.5).unwrap();
    let opts = IntegrationOptions {
        dt: 1e-4,
        ..Default::default()
    };
    let tr = integrate_variational(
        (1e-3, 0.1),
        LN_2,
        &Perturbation::zero(),
        &CrossFieldVariant::leading(),
        &region,
        &opts,
    )
    .unwrap();
    let last = tr.last();
    let ey = rel(last.y, 0.01);
    let ex = rel(last.jac.unwrap()[0][0], 10.0);
    Outcome::new(
        ey <= 1e-8 && ex <= 1e-8,
        format!("rel err y(T) {ey:.2e}, x_alpha(T) {ex:.2e} (<= 1e-8)"),
    )
}

fn c2_key_estimate() -> Outcome {
    let horizon = 1.0;
    let ladder = resolve_ladder(horizon, 10.0, LadderMode::Relaxed).unwrap();
    let region = AlephRegion::from_ladder(&ladder).unwrap();
    let ups = ladder.upsilon();
    let k = ADMISSIBLE_FACTOR;
    let nu = Perturbation::new(
        move |x, _, t| 0.4 * k * ups * x * t.cos(),
        move |x, y, _| -0.4 * k * ups * y * (x / (x + y)),
        ups,
    );
    let adm = admissible_perturbation_check(&nu, &region, horizon, 2000, 11);
    let p = ladder.confinement_exponent;
    let (le1, le2) = (ladder.eps1().ln(), ladder.eps2().ln());
    let beta_lo = (le1 / p).max(le1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = IntegrationOptions {
        dt: 1e-4,
        ..Default::default()
    };
    let (mut worst_margin, mut worst_fd, mut count) = (f64::INFINITY, 0.0f64, 0);
    let mut ok = adm.passed;
    for _ in 0..20 {
        let lb = rng.random_range(beta_lo..le2);
        let la = rng.random_range(le1..(p * lb));
        let (alpha, beta) = (la.exp(), lb.exp());
        if !omega0_contains(alpha, beta, &ladder) {
            ok = false;
            continue;
        }
        for field in [&Perturbation::zero(), &nu] {
            let v = CrossFieldVariant::exact();
            let tr = integrate_variational((alpha, beta), horizon, field, &v, &region, &opts).unwrap();
            let xa = tr.last().jac.unwrap()[0][0];
            let bound = (1.0 / beta).powf((horizon.exp() - 1.0) / 2.0);
            worst_margin = worst_margin.min(xa / bound);
            let d = 1e-5 * alpha;
            let xp = integrate_trajectory((alpha + d, beta), horizon, field, &v, &region, &opts).unwrap();
            let xm = integrate_trajectory((alpha - d, beta), horizon, field, &v, &region, &opts).unwrap();
            let fd = (xp.last().x - xm.last().x) / (2.0 * d);
            worst_fd = worst_fd.max(rel(xa, fd));
            count += 1;
        }
    }
    ok &= worst_margin >= 1.0 && worst_fd <= 1e-4 && count == 40;
    Outcome::new(
        ok,
        format!(
            "{count} runs, min x_alpha / bound {worst_margin:.3} (>= 1), max variational vs FD {worst_fd:.2e} (<= 1e-4), nu admissible {}",
            adm.passed
        ),
    )
}

fn c3_double_exponential_rate() -> Outcome {
    // deep start so the path stays in the work region for several time units
    let region = AlephRegion::new(1e-305, 0.01).unwrap();
    let opts = IntegrationOptions {
        dt: 1e-4,
        record_every: 100,
        axis_guard: 1e-320,
        stop_on_exit: true,
    };
    let tr = integrate_trajectory(
        (1e-300, 0.009),
        6.0,
        &Perturbation::zero(),
        &CrossFieldVariant::exact(),
        &region,
        &opts,
    )
    .unwrap();
    let inside = tr.inside();
    let series =
        DiagnosticSeries::from_samples("y", inside.iter().map(|s| (s.t, s.y)).collect()).unwrap();
    match fit_double_exponential(&series, None) {
        Ok((_, f)) => Outcome::new(
            (f.slope - 1.0).abs() <= 0.05 && f.r_squared >= 0.999,
            format!(
                "slope {:.4} (1 +- 0.05), r2 {:.5} (>= 0.999), window [{:.2}, {:.2}], {} samples",
                f.slope, f.r_squared, f.window.0, f.window.1, f.samples
            ),
        ),
        Err(e) => Outcome::new(false, format!("fit failed: {e}")),
    }
}

fn c4_area_argument() -> Outcome {
    let (gamma, beta, horizon) = (1e-3, 0.05, 1.0);
    let src = ModelSource::new(CrossFieldVariant::exact());
    let r = material_line_experiment(
        &src,
        (2e-3, beta),
        gamma,
        64,
        &ChordPlacement::default(),
        horizon,
        1e-3,
    )
    .unwrap();
    let disc = PI * gamma * gamma;
    let predicted = beta.powf(-(horizon.exp() - 1.0) / 2.0);
    let c = r.stretch_factor() / predicted;
    let ok = r.area_drift() <= 1e-4
        && r.last.area_product <= 1.1 * disc
        && (0.1..=10.0).contains(&c);
    Outcome::new(
        ok,
        format!(
            "area drift {:.2e} (<= 1e-4), L d / (pi g^2) {:.3} (<= 1.1), stretch {:.2} vs predicted {:.2}: constant {:.2} in [0.1, 10], {} circle vertices",
            r.area_drift(),
            r.last.area_product / disc,
            r.stretch_factor(),
            predicted,
            c,
            r.circle_vertices
        ),
    )
}

fn c5_solver_correctness() -> Outcome {
    // steady shear
    let g = Grid::new(128).unwrap();
    let shear = ScalarField::from_fn(g, |x, _| x.cos());
    let mut st = SimState::new(shear.clone(), 1.0).unwrap();
    run(
        &mut st,
        &RunParams {
            t_end: 1.0,
            cfl: 0.4,
            sample_every: 0.25,
        },
        |_| Ok(()),
    )
    .unwrap();
    let shear_err = st
        .theta()
        .values()
        .iter()
        .zip(shear.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    // conservation, divergence and parity on smooth even data
    let g = Grid::new(256).unwrap();
    let theta0 = smooth_even(g, 1.0);
    let mut st = SimState::new(theta0, 1.0).unwrap();
    let (mut e0, mut z0) = (None, None);
    let (mut drift, mut div, mut parity) = (0.0f64, 0.0f64, 0.0f64);
    run(
        &mut st,
        &RunParams {
            t_end: 5.0,
            cfl: 0.4,
            sample_every: 0.25,
        },
        |s| {
            let c = conserved_quantities(s)?;
            let (e, z) = (*e0.get_or_insert(c.energy), *z0.get_or_insert(c.enstrophy));
            drift = drift.max(rel(c.energy, e)).max(rel(c.enstrophy, z));
            div = div.max(s.velocity().divergence_ratio());
            parity = parity.max(s.theta().evenness_defect());
            Ok(())
        },
    )
    .unwrap();
    Outcome::new(
        shear_err <= 1e-10 && drift <= 1e-6 && div <= 1e-12 && parity <= 1e-8,
        format!(
            "shear change {shear_err:.1e} (<= 1e-10), energy/enstrophy drift {drift:.1e} (<= 1e-6), divergence {div:.1e} (<= 1e-12), parity defect {parity:.1e} (<= 1e-8)"
        ),
    )
}

/// Sup-change over `[0, t]` at points farther than `2 sigma` from the arms.
fn cross_change(n: usize, sigma: f64, t: f64) -> f64 {
    let g = Grid::new(n).unwrap();
    let th0 = mollified_cross(g, sigma).unwrap();
    let mut st = SimState::new(th0.clone(), 1.0).unwrap();
    run(
        &mut st,
        &RunParams {
            t_end: t,
            cfl: 0.4,
            sample_every: t,
        },
        |_| Ok(()),
    )
    .unwrap();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            if g.arm_distance(i, j) > 2.0 * sigma {
                m = m.max((st.theta().at(i, j) - th0.at(i, j)).abs());
            }
        }
    }
    m
}

fn c6_cross_stationarity() -> Outcome {
    let a = cross_change(256, 0.2, 0.5);
    let b = cross_change(512, 0.2, 0.5);
    Outcome::new(
        a <= 1e-3 && b < a,
        format!("sup change beyond 2 sigma: n=256 {a:.2e} (<= 1e-3), n=512 {b:.2e} (< n=256)"),
    )
}

fn growth_member(grid: Grid, ladder: &ParameterLadder, diameter: f64, height: f64) -> vgrad::error::Result<GrowthRun> {
    let spec = BumpSpec {
        center: (0.42, 0.78),
        support_diameter: diameter,
        height: -height,
    };
    let theta = compose_initial_data(grid, ladder, &spec)?;
    let g0 = grad_sup_norm(&theta)?;
    let series = grad_series(theta, 1.0, ladder.horizon, 0.05)?;
    Ok(GrowthRun {
        label: format!("h2/h1={:.0}", height / diameter),
        parameter: height / diameter,
        series,
        initial: g0,
    })
}

fn c7_growth_family() -> Outcome {
    let n = 512;
    let grid = Grid::new(n).unwrap();
    let ladder = pde_ladder(1.0);
    // smallest support the grid resolves; taller bumps only make it worse
    let h1 = MIN_CELLS_PER_SUPPORT * grid.spacing();
    let mut refusals = Vec::new();
    let mut runs = Vec::new();
    for ratio in [50.0, 100.0, 200.0] {
        match growth_member(grid, &ladder, h1, ratio * h1) {
            Ok(r) => runs.push(r),
            Err(e) => refusals.push(format!("h2/h1={ratio}: {e}")),
        }
    }
    let mut out = if refusals.is_empty() {
        let t = growth_ratio_probe(&runs).unwrap();
        let ok = t.nondecreasing
            && t.rows.iter().all(|r| {
                r.max_ratio > 1.5 && r.active_fit.map(|f| f.slope > 0.0).unwrap_or(false)
            });
        Outcome::new(ok, format!("{} members run", t.rows.len()))
    } else {
        // with the bump's negative ring on top of the cross value 1, sup < 2
        // caps h2 near 2.97; at 8 cells h1 >= 2 pi * 8 / n
        let cap = 2.97 / h1;
        Outcome::new(
            false,
            format!(
                "family not constructible at n={n}: sup < 2 and h1 >= {h1:.4} cap h2/h1 near {cap:.0}; {}",
                refusals.join("; ")
            ),
        )
    };

    // the same experiment on the largest ratios the constraints allow
    let feasible = [10.0, 20.0, 28.0];
    let runs: Vec<GrowthRun> = feasible
        .iter()
        .map(|&r| growth_member(grid, &ladder, h1, r * h1).unwrap())
        .collect();
    let t = growth_ratio_probe(&runs).unwrap();
    for r in &t.rows {
        out.extra.push(format!(
            "INFO  7 feasible member {}: max ratio {:.3} at t={:.2}, increasing until t={:.2}, ln ln slope {}",
            r.label,
            r.max_ratio,
            r.t_at_max,
            r.increasing_until,
            r.active_fit
                .map(|f| format!("{:.3}", f.slope))
                .unwrap_or_else(|| "n/a".into())
        ));
    }
    out.extra.push(format!(
        "INFO  7 feasible family max ratio nondecreasing: {}",
        t.nondecreasing
    ));
    out
}

fn c8_envelopes() -> Outcome {
    let mut cs = Vec::new();
    for (alpha, kind, t_end) in [
        (1.0, EnvelopeKind::Lipschitz, 2.0),
        (1.5, EnvelopeKind::Exponential, 2.0),
    ] {
        let mut pair = Vec::new();
        for n in [256usize, 512] {
            let g = Grid::new(n).unwrap();
            let theta = smooth_even(g, 1.0);
            let base = BaseNorms {
                initial: grad_sup_norm(&theta).unwrap(),
                sup_theta: theta.sup_norm(),
            };
            let s = grad_series(theta, alpha, t_end, 0.05).unwrap();
            pair.push(envelope_check(&s, kind, base).unwrap().fitted_c);
        }
        cs.push((kind, pair[0], pair[1]));
    }
    let ok = cs.iter().all(|&(_, a, b)| rel(b, a) <= 0.15 && a > 0.0);
    Outcome::new(
        ok,
        cs.iter()
            .map(|(k, a, b)| {
                format!(
                    "{} C: n=256 {a:.4}, n=512 {b:.4}, change {:.2}% (<= 15%)",
                    k.name(),
                    100.0 * rel(*b, *a)
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn c9_hessian_scaling() -> Outcome {
    let grid = Grid::new(1024).unwrap();
    let base = BumpSpec {
        center: (0.2, 0.72),
        support_diameter: 0.28,
        height: 1.0,
    };
    // steep bumps need a thin cross strip and a low work-region floor
    let o = LadderOverrides {
        eps2: Some(0.9),
        eps1: Some(1e-3),
        tau: Some(2e-4),
        sigma: Some(1e-4),
        upsilon: Some(1e-5),
        confinement_exponent: Some(1.0),
    };
    let ladder = resolve_ladder_with(1.0, 10.0, LadderMode::Relaxed, &o).unwrap();
    let s = bump_hessian_scaling(&halving_family(base, 5), grid, &ladder).unwrap();
    let spread = s.rows.iter().map(|r| r.gradient).fold(0.0, f64::max)
        / s.rows.iter().map(|r| r.gradient).fold(f64::INFINITY, f64::min);
    let worst = s.rows.iter().map(|r| r.constant()).fold(0.0, f64::max);
    Outcome::new(
        (0.35..=0.65).contains(&s.fit.slope) && worst <= 10.0,
        format!(
            "slope {:.4} in [0.35, 0.65] (r2 {:.5}), H / sqrt(M omega) <= {worst:.3} (<= 10), gradient spread {spread:.3}",
            s.fit.slope, s.fit.r_squared
        ),
    )
}

fn c10_perturbation_bounds() -> Outcome {
    let grid = Grid::new(2048).unwrap();
    let (eps1, r) = (0.3, 0.3);
    let mut norm = Vec::new();
    let mut origin = 0.0f64;
    for tau in [0.04, 0.02, 0.01] {
        let p = displaced_interface_layer(grid, tau).unwrap();
        let b = perturbation_field_bounds(&p, eps1, tau, &[r]).unwrap();
        origin = origin.max(b.origin_ratio());
        norm.push(b.radii[0].sup_over_r / (tau * tau.ln().abs()));
    }
    let spread = norm.iter().copied().fold(0.0, f64::max)
        / norm.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome::new(
        spread <= 2.0 && origin <= 1e-6,
        format!(
            "(sup |F|/r) / (tau |ln tau|) at r={r}: {:.3?}, spread {spread:.3} (<= 2); |F(0)| / max |F| {origin:.1e} (<= 1e-6)",
            norm
        ),
    )
}

fn c11_ladder_algebra() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut all = true;
    for horizon in [0.5, 1.0, 2.0] {
        let l = resolve_ladder(horizon, 10.0, LadderMode::Faithful).unwrap();
        for c in l.checks() {
            all &= c.satisfied();
            worst = worst.min(c.slack_log10());
        }
    }
    Outcome::new(
        all && worst >= 1.0 - 1e-9,
        format!("all checks satisfied: {all}; min slack {worst:.3} decades (>= 1)"),
    )
}

fn c12_rescaling() -> Outcome {
    let grid = Grid::new(256).unwrap();
    let ladder = resolve_ladder_with(
        1.0,
        10.0,
        LadderMode::Relaxed,
        &LadderOverrides {
            eps2: Some(0.95),
            eps1: Some(0.3),
            tau: Some(0.25),
            sigma: Some(0.2),
            upsilon: Some(1e-3),
            confinement_exponent: Some(1.0),
        },
    )
    .unwrap();
    let spec = BumpSpec {
        center: (0.41, 0.8),
        support_diameter: 0.2,
        height: -1.0,
    };
    let theta = compose_initial_data(grid, &ladder, &spec).unwrap();
    let horizon = 1.0;
    let mut runs = Vec::new();
    for (mu, label) in [(1.0, "base"), (2.0, "scaled")] {
        let th = theta.scaled(mu);
        let g0 = grad_sup_norm(&th).unwrap();
        let s = grad_series(th, 1.0, horizon / mu, 0.05 / mu).unwrap();
        runs.push(GrowthRun {
            label: label.into(),
            parameter: mu,
            series: s,
            initial: g0,
        });
    }
    let t = growth_ratio_probe(&runs).unwrap();
    match ratio_table_distance(&t.rows[0], &t.rows[1], 2.0) {
        Ok(d) => Outcome::new(
            d <= 1e-6,
            format!(
                "sup difference of ratio tables {d:.2e} (<= 1e-6), max ratio {:.4}",
                t.rows[0].max_ratio
            ),
        ),
        Err(e) => Outcome::new(false, format!("tables not comparable: {e}")),
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "model ODE closed form", c1_model_closed_form),
        (2, "key estimate", c2_key_estimate),
        (3, "double-exponential contraction", c3_double_exponential_rate),
        (4, "area argument", c4_area_argument),
        (5, "solver correctness", c5_solver_correctness),
        (6, "stationarity of the cross", c6_cross_stationarity),
        (7, "growth experiment", c7_growth_family),
        (8, "envelopes", c8_envelopes),
        (9, "bump Hessian scaling", c9_hessian_scaling),
        (10, "perturbation bounds", c10_perturbation_bounds),
        (11, "ladder algebra", c11_ladder_algebra),
        (12, "rescaling invariance", c12_rescaling),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    let mut ran = Vec::new();
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        println!(
            "{} {id:>2} {name}: {} [{:.1}s]",
            if out.passed { "PASS" } else { "FAIL" },
            out.detail,
            start.elapsed().as_secs_f64()
        );
        for line in &out.extra {
            println!("{line}");
        }
        ran.push(id);
        if !out.passed {
            failed.push(id);
        }
    }
    let expected: Vec<u32> = KNOWN_INFEASIBLE.iter().copied().filter(|i| ran.contains(i)).collect();
    println!(
        "acceptance: {} of {} criteria pass; failing {:?}, known infeasible {:?}",
        ran.len() - failed.len(),
        ran.len(),
        failed,
        expected
    );
    if failed != expected {
        std::process::exit(1);
    }
}
