use super::fit::{fit_double_exponential, RateFit, MIN_FIT_SAMPLES};
use super::series::DiagnosticSeries;
use crate::error::{Error, Result};
use crate::par;

/// Gradient sup-norm record of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRun {
    pub label: String,
    /// Family parameter the trend is taken over (for example `h2 / h1`).
    pub parameter: f64,
    pub series: DiagnosticSeries,
    /// `||grad theta_0||_inf`
    pub initial: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub label: String,
    pub parameter: f64,
    /// `||grad theta(t)||_inf / ||grad theta_0||_inf`
    pub ratio: DiagnosticSeries,
    pub max_ratio: f64,
    pub t_at_max: f64,
    /// End of the initial stretch over which the ratio strictly increases.
    pub increasing_until: f64,
    /// `ln ln ratio` against `t` over the increasing stretch, where it has
    /// enough samples above 1.
    pub active_fit: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTable {
    /// Sorted by parameter.
    pub rows: Vec<GrowthRow>,
    /// Max ratio never decreases as the parameter increases.
    pub nondecreasing: bool,
}

fn row(run: &GrowthRun) -> Result<GrowthRow> {
    if !(run.initial > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "run `{}` has initial gradient {}",
            run.label, run.initial
        )));
    }
    let ratio = run.series.map("ratio", |_, v| v / run.initial);
    let (mut max_ratio, mut t_at_max) = (f64::NEG_INFINITY, 0.0);
    for &(t, r) in ratio.samples() {
        if r > max_ratio {
            max_ratio = r;
            t_at_max = t;
        }
    }
    let s = ratio.samples();
    let mut increasing_until = s.first().map(|p| p.0).unwrap_or(0.0);
    for w in s.windows(2) {
        if w[1].1 > w[0].1 {
            increasing_until = w[1].0;
        } else {
            break;
        }
    }
    let active = DiagnosticSeries::from_samples(
        "active",
        ratio
            .samples()
            .iter()
            .copied()
            .filter(|&(t, r)| t <= increasing_until && r > 1.0)
            .collect(),
    )?;
    let active_fit = if active.len() >= MIN_FIT_SAMPLES {
        fit_double_exponential(&active, None).ok().map(|(_, f)| f)
    } else {
        None
    };
    Ok(GrowthRow {
        label: run.label.clone(),
        parameter: run.parameter,
        ratio,
        max_ratio,
        t_at_max,
        increasing_until,
        active_fit,
    })
}

/// Per-run growth ratios and the trend of the maximum across the family.
pub fn growth_ratio_probe(runs: &[GrowthRun]) -> Result<GrowthTable> {
    let mut rows = par::map_slice(runs, row).into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    let nondecreasing = rows.windows(2).all(|w| w[1].max_ratio >= w[0].max_ratio);
    Ok(GrowthTable { rows, nondecreasing })
}

/// Largest difference between two ratio series sampled at corresponding
/// times, after scaling the second series' times by `time_scale`.
pub fn ratio_table_distance(a: &GrowthRow, b: &GrowthRow, time_scale: f64) -> Result<f64> {
    let (sa, sb) = (a.ratio.samples(), b.ratio.samples());
    if sa.len() != sb.len() {
        return Err(Error::InvalidArgument(format!(
            "ratio series have {} and {} samples",
            sa.len(),
            sb.len()
        )));
    }
    let mut worst = (a.max_ratio - b.max_ratio).abs();
    for (&(ta, ra), &(tb, rb)) in sa.iter().zip(sb) {
        if (ta - tb * time_scale).abs() > 1e-9 * ta.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "sample times {ta} and {tb} do not correspond under scale {time_scale}"
            )));
        }
        worst = worst.max((ra - rb).abs());
    }
    Ok(worst)
}
