use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Result, SmsError};

/// Record of one command invocation: config identity, seed, wall-clock and
/// the files the command produced. Written next to those files.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub wall_clock_secs: f64,
    pub files: Vec<PathBuf>,
    pub version: String,
}

impl RunManifest {
    pub fn new(config_hash: String, seed: u64) -> Self {
        RunManifest {
            config_hash,
            seed,
            wall_clock_secs: 0.0,
            files: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Every listed file must exist at write time.
    pub fn write(&self, path: &Path) -> Result<()> {
        for f in &self.files {
            if !f.exists() {
                return Err(SmsError::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("manifest lists missing file {}", f.display()),
                )));
            }
        }
        let mut s = String::new();
        writeln!(s, "config_hash = {}", self.config_hash).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "wall_clock_secs = {:.3}", self.wall_clock_secs).unwrap();
        writeln!(s, "version = {}", self.version).unwrap();
        for f in &self.files {
            writeln!(s, "file = {}", f.display()).unwrap();
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}
