use std::path::{Path, PathBuf};

use vgrad::diagnostics::CheckReport;

use crate::error::CliError;
use crate::manifest::{RunManifest, CHECKS_NAME};

/// Collects the check tables listed in each manifest, in manifest order.
pub fn collect(manifests: &[PathBuf]) -> Result<CheckReport, CliError> {
    let mut all = CheckReport::new();
    for path in manifests {
        let m = RunManifest::read(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for f in m.files.iter().filter(|f| f.ends_with(CHECKS_NAME)) {
            let p = dir.join(f);
            if !p.exists() {
                return Err(CliError::Missing(p));
            }
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            all.extend(CheckReport::parse(&text)?);
        }
    }
    Ok(all)
}
