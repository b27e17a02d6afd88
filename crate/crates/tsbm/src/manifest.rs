//! Run manifests written next to every command's outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::io::write_json;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    /// Every flag of the command, including defaults.
    pub config: serde_json::Value,
    pub seed: u64,
    pub input_digest: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    /// Wall time per phase in milliseconds.
    pub phase_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: u64) -> Result<Self> {
        Ok(RunManifest {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION"),
            config: serde_json::to_value(config)?,
            seed,
            input_digest: BTreeMap::new(),
            outputs: Vec::new(),
            phase_ms: BTreeMap::new(),
        })
    }

    pub fn input(&mut self, path: &Path, digest: String) {
        self.input_digest.insert(path.display().to_string(), digest);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Runs `f` and records its wall time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phase_ms
            .insert(phase.to_owned(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}
