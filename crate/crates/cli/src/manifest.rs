use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use specialty::export::{to_json_pretty, write_atomic};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// Input path to sha256 hex digest.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_ms: u128,
}

/// Collects inputs, outputs and warnings while a command runs.
pub struct Run {
    out_dir: PathBuf,
    started: Instant,
    manifest: RunManifest,
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

impl Run {
    pub fn new(command: &str, config: serde_json::Value, out_dir: &Path) -> Self {
        Run {
            out_dir: out_dir.to_path_buf(),
            started: Instant::now(),
            manifest: RunManifest {
                command: command.to_string(),
                config,
                inputs: BTreeMap::new(),
                outputs: Vec::new(),
                warnings: Vec::new(),
                exit_code: 0,
                error: None,
                wall_time_ms: 0,
            },
        }
    }

    pub fn input(&mut self, path: &Path) -> io::Result<()> {
        let digest = sha256_file(path)?;
        self.manifest
            .inputs
            .insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.manifest.warnings.push(message.into());
    }

    pub fn warnings(&self) -> &[String] {
        &self.manifest.warnings
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> io::Result<()> {
        write_atomic(&self.out_dir.join(name), contents.as_ref())?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        self.write(name, to_json_pretty(value))
    }

    pub fn finish(mut self, exit_code: i32, error: Option<String>) -> io::Result<()> {
        self.manifest.exit_code = exit_code;
        self.manifest.error = error;
        self.manifest.wall_time_ms = self.started.elapsed().as_millis();
        self.manifest.outputs.sort();
        write_atomic(
            &self.out_dir.join(MANIFEST_FILE),
            to_json_pretty(&self.manifest).as_bytes(),
        )
    }
}
