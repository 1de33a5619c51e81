use std::path::Path;

use crate::error::{Error, Result};

/// Timestamped scalar samples with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticSeries {
    name: String,
    samples: Vec<(f64, f64)>,
}

impl DiagnosticSeries {
    pub fn new(name: impl Into<String>) -> Self {
        DiagnosticSeries {
            name: name.into(),
            samples: Vec::new(),
        }
    }

    pub fn from_samples(name: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self> {
        let mut s = DiagnosticSeries::new(name);
        for (t, v) in samples {
            s.push(t, v)?;
        }
        Ok(s)
    }

    /// Samples `f` at the given times.
    pub fn from_fn(name: impl Into<String>, times: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        DiagnosticSeries::from_samples(name, times.iter().map(|&t| (t, f(t))).collect())
    }

    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if !t.is_finite() || !value.is_finite() {
            return Err(Error::OutOfRange {
                what: "diagnostic sample",
                t,
                value,
            });
        }
        if let Some(&(last, _)) = self.samples.last() {
            if t <= last {
                return Err(Error::InvalidArgument(format!(
                    "series `{}`: time {t} does not follow {last}",
                    self.name
                )));
            }
        }
        self.samples.push((t, value));
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn first(&self) -> Option<(f64, f64)> {
        self.samples.first().copied()
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values().reduce(f64::max)
    }

    /// Samples with `t_min <= t <= t_max`.
    pub fn window(&self, t_min: f64, t_max: f64) -> DiagnosticSeries {
        DiagnosticSeries {
            name: self.name.clone(),
            samples: self
                .samples
                .iter()
                .copied()
                .filter(|&(t, _)| t >= t_min && t <= t_max)
                .collect(),
        }
    }

    /// Largest relative deviation from the first value.
    pub fn relative_drift(&self) -> f64 {
        let Some((_, v0)) = self.first() else {
            return 0.0;
        };
        let scale = v0.abs();
        self.values()
            .map(|v| {
                if scale == 0.0 {
                    v.abs()
                } else {
                    (v - v0).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn map(&self, name: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> DiagnosticSeries {
        DiagnosticSeries {
            name: name.into(),
            samples: self.samples.iter().map(|&(t, v)| (t, f(t, v))).collect(),
        }
    }
}

/// Decimal rendering with 17 significant digits.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes series sharing one time axis as CSV: `t,<name>,<name>,...`.
pub fn write_series_csv(path: &Path, series: &[DiagnosticSeries]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["t".to_string()];
    header.extend(series.iter().map(|s| s.name().to_string()));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    let rows = series.first().map_or(0, |s| s.len());
    for s in series {
        if s.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "series `{}` has {} samples, expected {rows}",
                s.name(),
                s.len()
            )));
        }
    }
    for r in 0..rows {
        let t = series[0].samples()[r].0;
        let mut rec = vec![format_sig17(t)];
        for s in series {
            let (ts, v) = s.samples()[r];
            if ts != t {
                return Err(Error::InvalidArgument(format!(
                    "series `{}` is not aligned with `{}` at row {r}",
                    s.name(),
                    series[0].name()
                )));
            }
            rec.push(format_sig17(v));
        }
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a CSV written by [`write_series_csv`].
pub fn read_series_csv(path: &Path) -> Result<Vec<DiagnosticSeries>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.get(0) != Some("t") {
        return Err(Error::Format(format!(
            "{}: first column must be `t`",
            path.display()
        )));
    }
    let mut out: Vec<DiagnosticSeries> = headers.iter().skip(1).map(DiagnosticSeries::new).collect();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("{}: bad number `{s}`", path.display())))
        };
        let t = parse(&rec[0])?;
        for (k, s) in out.iter_mut().enumerate() {
            s.push(t, parse(&rec[k + 1])?)?;
        }
    }
    Ok(out)
}
