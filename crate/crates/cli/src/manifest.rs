//! Run manifests: what was run, on which inputs, producing which files.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: Option<InputHash>,
    pub seed: Option<u64>,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    /// Excluded from [`Manifest::hash`].
    pub wall_ms: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<InputHash> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(InputHash { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

impl Manifest {
    pub fn new(command: &str, args: &[String], seed: Option<u64>) -> Self {
        Manifest {
            command: command.to_string(),
            args: args.to_vec(),
            config: None,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_ms: 0.0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(hash_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Hash of everything except wall time, so it is stable across reruns.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("manifest serializes");
        value.as_object_mut().expect("object").remove("wall_ms");
        sha256_hex(value.to_string().as_bytes())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut value = serde_json::to_value(self)?;
        value.as_object_mut().expect("object").insert("hash".into(), self.hash().into());
        std::fs::write(path, serde_json::to_string_pretty(&value)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

/// `out.csv` → `out.csv.manifest.json`
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Prefixes CSV text with the manifest-hash comment.
pub fn with_hash_comment(hash: &str, csv: &str) -> String {
    format!("# manifest {hash}\n{csv}")
}
