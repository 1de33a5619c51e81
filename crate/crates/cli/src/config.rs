//! Run configuration: sectioned `key = value` text (TOML syntax, strings
//! quoted). Unknown keys are rejected so a typo never silently falls back to
//! a default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub grid: GridSection,
    pub time: TimeSection,
    pub solver: SolverSection,
    pub init: InitSection,
    pub ladder: LadderSection,
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub checks: ChecksSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Points per side of the periodic grid.
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 256 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    /// Final time T.
    pub t_end: f64,
    pub cfl: f64,
    /// Diagnostic sampling interval.
    pub sample_every: f64,
    /// Snapshot interval; 0 writes only the first and last state.
    pub snapshot_every: f64,
    /// Step for the model ODE integrator.
    pub dt: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            t_end: 1.0,
            cfl: 0.4,
            sample_every: 0.05,
            snapshot_every: 0.0,
            dt: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// Exponent of the inversion psi = -|k|^(-2 alpha) theta; 1 is Euler.
    pub alpha_exponent: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { alpha_exponent: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum InitKind {
    #[serde(rename = "shear")]
    Shear,
    #[serde(rename = "smooth")]
    Smooth,
    #[serde(rename = "cross")]
    Cross,
    #[serde(rename = "cross+bump")]
    CrossBump,
    #[serde(rename = "snapshot")]
    Snapshot,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    pub kind: InitKind,
    /// Multiplies the whole initial field (mu in the rescaling theta -> mu theta).
    pub scale: f64,
    /// Bump centre (x, y) in the first quadrant; the mirror copy is added.
    pub center_x: f64,
    pub center_y: f64,
    /// Bump support diameter h1.
    pub diameter: f64,
    /// Bump peak value h2 (negative to dip below the cross).
    pub height: f64,
    /// Snapshot file for `kind = "snapshot"`.
    pub path: Option<PathBuf>,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection {
            kind: InitKind::Cross,
            scale: 1.0,
            center_x: 0.42,
            center_y: 0.78,
            diameter: 0.1,
            height: -1.0,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSection {
    /// "relaxed" or "faithful".
    pub mode: String,
    /// Horizon the ladder is built for; defaults to `time.t_end`.
    pub horizon: Option<f64>,
    /// Target growth factor lambda.
    pub lambda: f64,
    pub eps2: Option<f64>,
    pub eps1: Option<f64>,
    pub upsilon: Option<f64>,
    pub tau: Option<f64>,
    /// Mollifier radius of the cross.
    pub sigma: Option<f64>,
    /// Power p in eps1 < alpha < beta^p.
    pub confinement_exponent: Option<f64>,
}

impl Default for LadderSection {
    fn default() -> Self {
        LadderSection {
            mode: "relaxed".into(),
            horizon: None,
            lambda: 10.0,
            eps2: None,
            eps1: None,
            upsilon: None,
            tau: None,
            sigma: None,
            confinement_exponent: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// "exact" or "leading".
    pub variant: String,
    /// Coefficient of the exact field's log kernel.
    pub c1: f64,
    /// Coefficient of the leading-order field `(-x ln y, y ln y)`.
    pub c2: f64,
    /// Explicit starting points (alpha, beta), used before any random sample.
    pub points: Vec<[f64; 2]>,
    /// Extra starting points drawn log-uniformly from the initial set.
    pub samples: usize,
    /// "none" or "linear": the synthetic perturbation field.
    pub perturbation: String,
    /// Perturbation size as a fraction of the admissible bound.
    pub perturbation_scale: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            variant: "exact".into(),
            c1: 0.5,
            c2: 1.0,
            points: Vec::new(),
            samples: 0,
            perturbation: "none".into(),
            perturbation_scale: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepAxis {
    /// Bump height over support diameter.
    #[serde(rename = "ratio")]
    Ratio,
    /// Interface-layer displacement.
    #[serde(rename = "tau")]
    Tau,
    /// Bump support diameter, halved in area per member.
    #[serde(rename = "omega")]
    Omega,
    /// Grid size.
    #[serde(rename = "n")]
    N,
    /// Inversion exponent.
    #[serde(rename = "alpha_exponent")]
    AlphaExponent,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axis: Option<SweepAxis>,
    /// Member values of the axis (for omega: ignored, see `steps`).
    pub values: Vec<f64>,
    /// Number of area halvings for the omega axis.
    pub steps: usize,
    /// Radii at which the tau axis samples the layer field.
    pub radii: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            axis: None,
            values: Vec::new(),
            steps: 5,
            radii: vec![0.3],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSection {
    /// Relative drift allowed in energy and enstrophy.
    pub drift_tolerance: f64,
    /// Largest acceptable fitted gradient-envelope constant.
    pub envelope_c_max: f64,
    /// Relative change allowed between members of an n-sweep.
    pub refinement_tolerance: f64,
}

impl Default for ChecksSection {
    fn default() -> Self {
        ChecksSection {
            drift_tolerance: 1e-6,
            envelope_c_max: 10.0,
            refinement_tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl Config {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|message| CliError::Config {
            path: origin.to_path_buf(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: format!("cannot read: {e}"),
        })?;
        Ok((Config::parse(&text, path)?, text))
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.time.t_end >= 0.0 && self.time.t_end.is_finite()) {
            return Err(format!("[time] t_end = {} must be finite and >= 0", self.time.t_end));
        }
        if !(self.time.sample_every > 0.0) {
            return Err(format!("[time] sample_every = {} must be positive", self.time.sample_every));
        }
        if self.time.snapshot_every < 0.0 {
            return Err("[time] snapshot_every must be >= 0".into());
        }
        if self.init.kind == InitKind::Snapshot && self.init.path.is_none() {
            return Err("[init] kind = \"snapshot\" needs `path`".into());
        }
        if !(self.init.scale > 0.0) {
            return Err(format!("[init] scale = {} must be positive", self.init.scale));
        }
        if !["none", "linear"].contains(&self.model.perturbation.as_str()) {
            return Err(format!(
                "[model] perturbation = {:?}; expected \"none\" or \"linear\"",
                self.model.perturbation
            ));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.ladder.horizon.unwrap_or(self.time.t_end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_carry_line_numbers() {
        let text = "[grid]\nn = 64\n\n[time]\nt_end = oops\n";
        let e = Config::parse(text, Path::new("c.toml")).unwrap_err().to_string();
        assert!(e.contains("line 5"), "{e}");
        let e = Config::parse("[grid]\nm = 3\n", Path::new("c.toml")).unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains('m'), "{e}");
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let c = Config::parse("[init]\nkind = \"cross+bump\"\n", Path::new("c")).unwrap();
        assert_eq!(c.init.kind, InitKind::CrossBump);
        assert_eq!(c.grid.n, 256);
        assert_eq!(c.horizon(), 1.0);
    }
}
