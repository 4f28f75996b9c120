use std::path::{Path, PathBuf};

use rwn_core::RwnConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliResult, Failure};

/// Everything needed to audit or replay one `perturb` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RwnConfig,
    pub input: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    pub output: PathBuf,
    pub missing_token: String,
    pub input_sha256: String,
    pub output_sha256: String,
    pub records: usize,
    pub columns: usize,
    pub wall_ms: f64,
    pub distance_evaluations: u64,
    pub partition_evaluations: Vec<u64>,
    pub modified_cells: usize,
    pub nullified_records: Vec<usize>,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::io(e).context(format!("reading manifest {}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("manifest {}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Failure::io(e).context(format!("writing {}", path.display())))
    }
}

/// `out/wp.csv` → `out/wp.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.manifest.json"))
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(e).context(format!("reading {}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
