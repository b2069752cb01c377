use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to a command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: Option<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub version: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub wall_time_s: f64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).with_context(|| format!("cannot read {}", path.display()))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Collects inputs and outputs while a command runs.
pub struct Recorder {
    command: String,
    config: Option<PathBuf>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    started_unix_s: f64,
    clock: Instant,
}

impl Recorder {
    pub fn start(command: &str, config: Option<&Path>, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config: config.map(Path::to_path_buf),
            seed,
            inputs: config.map(Path::to_path_buf).into_iter().collect(),
            started_unix_s: unix_now(),
            clock: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Hashes everything and writes the manifest atomically to `path`.
    /// Output paths are stored relative to the manifest's directory.
    pub fn finish(&self, path: &Path, outputs: &[PathBuf]) -> Result<RunManifest> {
        let base = path.parent().unwrap_or(Path::new(""));
        let hash = |p: &PathBuf, relative: bool| -> Result<FileHash> {
            let shown = if relative { p.strip_prefix(base).unwrap_or(p) } else { p };
            Ok(FileHash { path: shown.display().to_string(), sha256: sha256_file(p)? })
        };
        let manifest = RunManifest {
            command: self.command.clone(),
            args: std::env::args().skip(1).collect(),
            config: self.config.as_ref().map(|p| p.display().to_string()),
            seed: self.seed,
            inputs: self.inputs.iter().map(|p| hash(p, false)).collect::<Result<_>>()?,
            outputs: outputs.iter().map(|p| hash(p, true)).collect::<Result<_>>()?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: self.started_unix_s,
            finished_unix_s: unix_now(),
            wall_time_s: self.clock.elapsed().as_secs_f64(),
        };
        write_atomic(path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
        Ok(manifest)
    }
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} to {}", tmp.display(), path.display()))
}
