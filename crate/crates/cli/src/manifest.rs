//! Run manifests and the output directory that feeds them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.txt";
pub const CHECKS_NAME: &str = "checks.txt";

/// Output directory that remembers every file handed out, so the manifest
/// lists exactly what was written.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Path for a new output file, registered for the manifest.
    pub fn file(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let p = self.file(name);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub grid_n: Option<usize>,
    pub threads: usize,
    pub seed: u64,
    /// `(label, seconds)`
    pub timings: Vec<(String, f64)>,
    pub config: String,
    pub ladder: Option<String>,
    /// Paths relative to the manifest's directory.
    pub files: Vec<String>,
}

const CONFIG_PREFIX: &str = "config| ";
const LADDER_PREFIX: &str = "ladder| ";

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::from("# vgrad run manifest\n");
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", self.version);
        if let Some(n) = self.grid_n {
            let _ = writeln!(s, "grid.n = {n}");
        }
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "seed = {}", self.seed);
        for (k, v) in &self.timings {
            let _ = writeln!(s, "timing.{k} = {v:.6}");
        }
        for f in &self.files {
            let _ = writeln!(s, "file = {f}");
        }
        for line in self.config.lines() {
            let _ = writeln!(s, "{CONFIG_PREFIX}{line}");
        }
        if let Some(l) = &self.ladder {
            for line in l.lines() {
                let _ = writeln!(s, "{LADDER_PREFIX}{line}");
            }
        }
        s
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let bad = |k: usize, why: String| CliError::Config {
            path: origin.to_path_buf(),
            message: format!("line {}: {why}", k + 1),
        };
        let mut m = RunManifest::default();
        let (mut config, mut ladder) = (String::new(), String::new());
        for (k, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix(CONFIG_PREFIX).or(line.strip_prefix("config|")) {
                config.push_str(rest);
                config.push('\n');
                continue;
            }
            if let Some(rest) = line.strip_prefix(LADDER_PREFIX).or(line.strip_prefix("ladder|")) {
                ladder.push_str(rest);
                ladder.push('\n');
                continue;
            }
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| bad(k, format!("expected `key = value`, got `{line}`")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(k, format!("bad number `{v}`")));
            match key {
                "command" => m.command = value.into(),
                "version" => m.version = value.into(),
                "grid.n" => m.grid_n = Some(num(value)? as usize),
                "threads" => m.threads = num(value)? as usize,
                "seed" => m.seed = value.parse().map_err(|_| bad(k, format!("bad seed `{value}`")))?,
                "file" => m.files.push(value.into()),
                _ => match key.strip_prefix("timing.") {
                    Some(label) => m.timings.push((label.into(), num(value)?)),
                    None => return Err(bad(k, format!("unknown key `{key}`"))),
                },
            }
        }
        m.config = config;
        m.ladder = (!ladder.is_empty()).then_some(ladder);
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        if !path.exists() {
            return Err(CliError::Missing(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        RunManifest::parse(&text, path)
    }
}
