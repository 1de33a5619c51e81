use std::time::Instant;

use vgrad::diagnostics::{
    envelope_check, write_series_csv, BaseNorms, CheckReport, CheckRow, DiagnosticSeries, EnvelopeKind,
};
use vgrad::initial::{
    compose_initial_data, mollified_cross, resolve_ladder_with, BumpSpec, LadderMode, LadderOverrides,
    ParameterLadder,
};
use vgrad::spectral::{grad_sup_norm, run, Grid, Quantity, RunParams, ScalarField, SimState, Snapshot};

use crate::config::{Config, InitKind};
use crate::error::CliError;
use crate::manifest::{Outputs, RunManifest, CHECKS_NAME};
use crate::Context;

const RECORDED: [Quantity; 6] = [
    Quantity::GradSup,
    Quantity::Energy,
    Quantity::Enstrophy,
    Quantity::L2,
    Quantity::Linf,
    Quantity::MaxSpeed,
];

/// Fields whose parity defect is below this count as even data.
const EVEN_DATA: f64 = 1e-12;

pub fn resolve_ladder(cfg: &Config) -> Result<ParameterLadder, CliError> {
    let l = &cfg.ladder;
    let o = LadderOverrides {
        eps2: l.eps2,
        eps1: l.eps1,
        upsilon: l.upsilon,
        tau: l.tau,
        sigma: l.sigma,
        confinement_exponent: l.confinement_exponent,
    };
    Ok(resolve_ladder_with(cfg.horizon(), l.lambda, LadderMode::parse(&l.mode)?, &o)?)
}

pub fn smooth_even(grid: Grid) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        x.sin() * y.sin() + 0.6 * (2.0 * x + y).cos() + 0.3 * (x - 3.0 * y).cos()
    })
}

/// Initial state per `[init]`, with the ladder when the data needs one.
pub fn initial_state(cfg: &Config, n: usize, alpha: f64) -> Result<(SimState, Option<ParameterLadder>), CliError> {
    let init = &cfg.init;
    let grid = || Grid::new(n);
    let (theta, ladder) = match init.kind {
        InitKind::Shear => (ScalarField::from_fn(grid()?, |x, _| x.cos()), None),
        InitKind::Smooth => (smooth_even(grid()?), None),
        InitKind::Cross => {
            let ladder = resolve_ladder(cfg)?;
            (mollified_cross(grid()?, ladder.sigma())?, Some(ladder))
        }
        InitKind::CrossBump => {
            let ladder = resolve_ladder(cfg)?;
            let spec = BumpSpec {
                center: (init.center_x, init.center_y),
                support_diameter: init.diameter,
                height: init.height,
            };
            (compose_initial_data(grid()?, &ladder, &spec)?, Some(ladder))
        }
        InitKind::Snapshot => {
            let path = init.path.as_ref().expect("validated");
            if !path.exists() {
                return Err(CliError::Missing(path.clone()));
            }
            let st = Snapshot::read(path)?.into_state()?;
            let theta = st.theta().scaled(init.scale);
            return Ok((SimState::at_time(theta, st.time(), st.alpha_exponent())?, None));
        }
    };
    Ok((SimState::new(theta.scaled(init.scale), alpha)?, ladder))
}

/// Everything a solver run produces besides snapshots.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub series: Vec<DiagnosticSeries>,
    pub max_divergence: f64,
    pub max_parity_defect: f64,
    pub initially_even: bool,
    pub initial_grad: f64,
    pub sup_theta: f64,
    pub alpha_exponent: f64,
}

impl RunRecord {
    pub fn grad(&self) -> &DiagnosticSeries {
        &self.series[0]
    }

    pub fn ratio(&self) -> DiagnosticSeries {
        let g0 = self.initial_grad;
        self.grad().map("ratio", |_, v| v / g0)
    }

    pub fn envelope_kind(&self) -> EnvelopeKind {
        if self.alpha_exponent == 1.0 {
            EnvelopeKind::Lipschitz
        } else {
            EnvelopeKind::Exponential
        }
    }

    pub fn envelope_c(&self) -> Result<f64, CliError> {
        let base = BaseNorms {
            initial: self.initial_grad,
            sup_theta: self.sup_theta,
        };
        Ok(envelope_check(self.grad(), self.envelope_kind(), base)?.fitted_c)
    }

    pub fn checks(&self, cfg: &Config, prefix: &str) -> Result<CheckReport, CliError> {
        let mut r = CheckReport::new();
        r.push(CheckRow::new(
            format!("{prefix}divergence"),
            "incompressibility",
            self.max_divergence,
            "<= 1e-12",
            self.max_divergence <= 1e-12,
        ));
        if self.initially_even {
            r.push(CheckRow::new(
                format!("{prefix}parity defect"),
                "parity",
                self.max_parity_defect,
                "<= 1e-8",
                self.max_parity_defect <= 1e-8,
            ));
        }
        let tol = cfg.checks.drift_tolerance;
        for s in &self.series[1..3] {
            let d = s.relative_drift();
            r.push(CheckRow::new(
                format!("{prefix}{} drift", s.name()),
                "conservation",
                d,
                format!("<= {tol:e}"),
                d <= tol,
            ));
        }
        let c = self.envelope_c()?;
        let cmax = cfg.checks.envelope_c_max;
        r.push(CheckRow::new(
            format!("{prefix}{} envelope constant", self.envelope_kind().name()),
            "gradient-envelope",
            c,
            format!("<= {cmax}"),
            c <= cmax,
        ));
        Ok(r)
    }
}

/// Runs the solver to `t_end`, sampling diagnostics every `sample_every`.
/// `on_sample` sees every sampled state (used for snapshots).
pub fn run_record(
    cfg: &Config,
    mut state: SimState,
    mut on_sample: impl FnMut(&SimState) -> vgrad::Result<()>,
) -> Result<RunRecord, CliError> {
    let mut series: Vec<DiagnosticSeries> = RECORDED.iter().map(|q| DiagnosticSeries::new(q.name())).collect();
    let initially_even = state.theta().evenness_defect() <= EVEN_DATA;
    let initial_grad = grad_sup_norm(state.theta())?;
    let sup_theta = state.theta().sup_norm();
    let alpha_exponent = state.alpha_exponent();
    let (mut div, mut parity) = (0.0f64, 0.0f64);
    let mut observe = |s: &SimState| -> vgrad::Result<()> {
        for (q, out) in RECORDED.iter().zip(series.iter_mut()) {
            out.push(s.time(), q.measure(s)?)?;
        }
        div = div.max(s.velocity().divergence_ratio());
        parity = parity.max(s.theta().evenness_defect());
        on_sample(s)
    };
    let t_end = cfg.time.t_end;
    if t_end == state.time() {
        observe(&state)?;
    } else {
        let params = RunParams {
            t_end,
            cfl: cfg.time.cfl,
            sample_every: cfg.time.sample_every,
        };
        run(&mut state, &params, &mut observe)?;
    }
    Ok(RunRecord {
        series,
        max_divergence: div,
        max_parity_defect: parity,
        initially_even,
        initial_grad,
        sup_theta,
        alpha_exponent,
    })
}

pub fn write_record(out: &mut Outputs, rec: &RunRecord, series_name: &str, growth_name: &str) -> Result<(), CliError> {
    write_series_csv(&out.file(series_name), &rec.series)?;
    write_series_csv(&out.file(growth_name), &[rec.ratio()])?;
    Ok(())
}

pub fn cmd_simulate(ctx: &Context, out: &mut Outputs) -> Result<(RunManifest, CheckReport), CliError> {
    let cfg = &ctx.config;
    let start = Instant::now();
    let (state, ladder) = initial_state(cfg, cfg.grid.n, cfg.solver.alpha_exponent)?;
    let n = state.grid().n();
    let setup = start.elapsed().as_secs_f64();

    let every = cfg.time.snapshot_every;
    let t_end = cfg.time.t_end;
    let mut snaps: Vec<(String, Snapshot)> = Vec::new();
    let mut next_snap = state.time();
    let rec = run_record(cfg, state, |s| {
        let t = s.time();
        let last = t >= t_end;
        if t >= next_snap - 1e-12 || last {
            if snaps.last().is_none_or(|(_, p)| p.time != t) {
                snaps.push((format!("snapshot_{:04}.bin", snaps.len()), Snapshot::from_state(s)));
            }
            next_snap = if every > 0.0 { next_snap + every } else { f64::INFINITY };
            while every > 0.0 && next_snap <= t + 1e-12 {
                next_snap += every;
            }
        }
        Ok(())
    })?;
    let run_time = start.elapsed().as_secs_f64() - setup;

    for (name, s) in &snaps {
        s.write(&out.file(name))?;
    }
    write_record(out, &rec, "series.csv", "growth.csv")?;
    let checks = rec.checks(cfg, "")?;
    out.write_text(CHECKS_NAME, &checks.render())?;

    let manifest = RunManifest {
        command: "simulate".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        grid_n: Some(n),
        threads: ctx.threads,
        seed: ctx.seed,
        timings: vec![("setup".into(), setup), ("run".into(), run_time)],
        config: ctx.config_text.clone(),
        ladder: ladder.map(|l| l.to_kv()),
        files: Vec::new(),
    };
    Ok((manifest, checks))
}
