//! The bundled regression corpus: seven phase files and a scenario file.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub const SCENARIO_FILE: &str = "scenarios.toml";

const SCENARIOS: &str = include_str!("scenarios.toml");

/// Write the canonical phase families and the scenario file into `dir`.
pub fn bundle_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for (name, family) in fhkit::corpus::canonical_families() {
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, family.to_json() + "\n").map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join(SCENARIO_FILE);
    std::fs::write(&path, SCENARIOS).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(written)
}
