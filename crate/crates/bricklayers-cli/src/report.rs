//! Run manifests and output-file plumbing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
    pub event_count: u64,
    pub wall_seconds: f64,
    pub passed: bool,
}

/// Output directory handle; the directory must already exist.
pub struct OutDir {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl OutDir {
    pub fn open(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            anyhow::bail!(
                "output directory {} does not exist (create it first)",
                dir.display()
            );
        }
        Ok(OutDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Create (truncate) an output file and remember it for the manifest.
    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    /// Write the resolved config and the manifest last, capturing wall time
    /// and the file list.
    pub fn finish(
        mut self,
        command: &str,
        seed: u64,
        config: &ExperimentConfig,
        event_count: u64,
        passed: bool,
    ) -> Result<()> {
        let mut w = self.create("resolved_config.toml")?;
        w.write_all(config.to_toml()?.as_bytes())?;
        drop(w);
        let manifest = Manifest {
            command: command.to_string(),
            seed,
            config: config.clone(),
            outputs: {
                let mut o = self.files.clone();
                o.push("manifest.json".to_string());
                o
            },
            event_count,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            passed,
        };
        self.write_json("manifest.json", &manifest)
    }
}
