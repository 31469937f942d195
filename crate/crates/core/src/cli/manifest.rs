//! `run_manifest.json`: everything needed to repeat a run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::settings::Settings;
use crate::error::{Error, Result};

pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Wall-clock times; the only part of a manifest that varies between reruns.
#[derive(Debug, Clone, Serialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: Settings,
    /// Subcommand-specific options.
    pub arguments: serde_json::Value,
    /// Input path → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name → SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub timestamps: Timestamps,
}

/// Collects inputs and outputs of one command run.
pub struct Run {
    pub out: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    started: String,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Run {
    pub fn start(out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(Run {
            out: out.to_path_buf(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            started: now(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, contents.as_ref()).map_err(|e| Error::io(&path, e))?;
        self.record(name)
    }

    /// Registers a file something else already wrote into the output dir.
    pub fn record(&mut self, name: &str) -> Result<()> {
        let digest = sha256_file(&self.out.join(name))?;
        self.outputs.insert(name.to_string(), digest);
        Ok(())
    }

    pub fn finish(self, command: &str, settings: &Settings, arguments: serde_json::Value) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed: settings.seed,
            config: settings.clone(),
            arguments,
            inputs: self.inputs,
            outputs: self.outputs,
            timestamps: Timestamps {
                started: self.started,
                finished: now(),
            },
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.out.join(RUN_MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
