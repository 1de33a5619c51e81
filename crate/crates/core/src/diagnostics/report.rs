use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// One named check: what was measured, against which tolerance, and whether
/// it passed. `tag` names the property being checked.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub tag: String,
    pub measured: f64,
    pub tolerance: String,
    pub passed: bool,
}

impl CheckRow {
    pub fn new(
        name: impl Into<String>,
        tag: impl Into<String>,
        measured: f64,
        tolerance: impl Into<String>,
        passed: bool,
    ) -> Self {
        CheckRow {
            name: name.into(),
            tag: tag.into(),
            measured,
            tolerance: tolerance.into(),
            passed,
        }
    }
}

const SEP: &str = " | ";

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{SEP}{}{SEP}{:e}{SEP}{}{SEP}{}",
            self.name,
            self.tag,
            self.measured,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStatus {
    Pass,
    Fail { failed: usize },
    /// No checks at all; neither a pass nor a failure.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn new() -> Self {
        CheckReport::default()
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.rows.extend(other.rows);
    }

    pub fn status(&self) -> ReportStatus {
        if self.rows.is_empty() {
            return ReportStatus::Empty;
        }
        match self.rows.iter().filter(|r| !r.passed).count() {
            0 => ReportStatus::Pass,
            failed => ReportStatus::Fail { failed },
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    /// One line per check: `name | tag | measured | tolerance | PASS|FAIL`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(SEP).collect();
            let bad = |why: &str| Error::Format(format!("check line {}: {why}: `{line}`", k + 1));
            let [name, tag, measured, tolerance, status] = parts[..] else {
                return Err(bad("expected five fields"));
            };
            let measured = measured.trim().parse::<f64>().map_err(|_| bad("bad measured value"))?;
            let passed = match status.trim() {
                "PASS" => true,
                "FAIL" => false,
                _ => return Err(bad("status must be PASS or FAIL")),
            };
            rows.push(CheckRow::new(name.trim(), tag.trim(), measured, tolerance.trim(), passed));
        }
        Ok(CheckReport { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["name", "tag", "measured", "tolerance", "status"])
            .map_err(|e| Error::csv(path, e))?;
        for r in &self.rows {
            w.write_record([
                r.name.as_str(),
                r.tag.as_str(),
                &format!("{:e}", r.measured),
                r.tolerance.as_str(),
                if r.passed { "PASS" } else { "FAIL" },
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_of_empty_passing_and_failing() {
        let mut r = CheckReport::new();
        assert_eq!(r.status(), ReportStatus::Empty);
        r.push(CheckRow::new("drift", "energy", 1e-9, "<= 1e-6", true));
        assert_eq!(r.status(), ReportStatus::Pass);
        r.push(CheckRow::new("envelope", "gradient-envelope", 0.3, "stable within 15%", false));
        assert_eq!(r.status(), ReportStatus::Fail { failed: 1 });
        assert_eq!(r.failing().next().unwrap().tag, "gradient-envelope");
    }

    #[test]
    fn render_parse_round_trip() {
        let mut r = CheckReport::new();
        r.push(CheckRow::new("a b", "t", 0.1 + 0.2, "in [0.35, 0.65]", true));
        r.push(CheckRow::new("c", "u", -3e-300, "< 1", false));
        let back = CheckReport::parse(&r.render()).unwrap();
        assert_eq!(back, r);
        assert!(CheckReport::parse("x | y | nan? | z | PASS").is_err());
        assert!(CheckReport::parse("only | three | fields").is_err());
    }
}
