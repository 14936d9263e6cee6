use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
    /// Primary outputs are byte-identical across re-runs; others (timings)
    /// are not.
    #[serde(default = "yes")]
    pub primary: bool,
}

fn yes() -> bool {
    true
}

/// Record of one command run: enough to repeat it and check the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    /// Working directory relative paths in `argv` resolve against.
    pub cwd: PathBuf,
    pub seed: u64,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    #[serde(default)]
    pub report: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn hash_entry(path: &Path, primary: bool) -> Result<FileHash> {
    Ok(FileHash {
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
        primary,
    })
}

impl Manifest {
    pub fn new(command: &str, argv: &[String], seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: argv.to_vec(),
            cwd: std::env::current_dir().unwrap_or_default(),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            report: serde_json::Value::Null,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(hash_entry(path, true)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path, primary: bool) -> Result<()> {
        self.outputs.push(hash_entry(path, primary)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))
    }

    /// Primary outputs whose current hash differs from the recorded one.
    pub fn changed_outputs(&self) -> Result<Vec<PathBuf>> {
        let mut changed = Vec::new();
        for o in self.outputs.iter().filter(|o| o.primary) {
            let p = if o.path.is_relative() {
                self.cwd.join(&o.path)
            } else {
                o.path.clone()
            };
            if sha256_file(&p)? != o.sha256 {
                changed.push(o.path.clone());
            }
        }
        Ok(changed)
    }
}
