use super::config::ResolvedConfig;
use crate::wigner::{WignerGrid, WignerLabel};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifies where an output came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: String,
    pub model: String,
    /// SHA-256 of the resolved configuration (output directory excluded).
    pub param_hash: String,
    pub code_version: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(cfg: &ResolvedConfig) -> Self {
        let canonical = serde_json::to_vec(cfg).expect("resolved configuration serialises");
        Self {
            scenario: cfg.scenario.to_string(),
            model: cfg.model.to_string(),
            param_hash: hex::encode(Sha256::digest(&canonical)),
            code_version: CODE_VERSION.to_string(),
            seed: cfg.seed,
        }
    }

    fn csv_header(&self) -> String {
        format!(
            "# diracsim {}\n# scenario={} model={} seed={}\n# params={}\n",
            self.code_version, self.scenario, self.model, self.seed, self.param_hash
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    Partial,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub provenance: Provenance,
    pub status: RunStatus,
    pub files: Vec<FileRecord>,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
    pub config: serde_json::Value,
}

/// Collects a run's output files, metrics and diagnostics, then writes the manifest.
#[derive(Debug)]
pub struct RunRecorder {
    dir: PathBuf,
    provenance: Provenance,
    config: serde_json::Value,
    files: Vec<FileRecord>,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

impl RunRecorder {
    pub fn new(cfg: &ResolvedConfig) -> std::io::Result<Self> {
        std::fs::create_dir_all(&cfg.output_dir)?;
        Ok(Self {
            dir: cfg.output_dir.clone(),
            provenance: Provenance::of(cfg),
            config: serde_json::to_value(cfg).expect("resolved configuration serialises"),
            files: Vec::new(),
            metrics: BTreeMap::new(),
            warnings: Vec::new(),
            failures: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn write_bytes(&mut self, name: String, bytes: Vec<u8>) -> std::io::Result<()> {
        std::fs::write(self.dir.join(&name), &bytes)?;
        self.files.push(FileRecord { sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len(), name });
        Ok(())
    }

    /// CSV table with the provenance header; values use shortest round-trip formatting.
    pub fn write_table(&mut self, stem: &str, columns: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
        let mut buf = self.provenance.csv_header().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(columns).map_err(std::io::Error::other)?;
            for row in rows {
                w.write_record(row.iter().map(|v| v.to_string())).map_err(std::io::Error::other)?;
            }
            w.flush()?;
        }
        self.write_bytes(format!("{stem}.csv"), buf)
    }

    /// Wigner grid as CSV (with provenance header) and as labelled JSON.
    pub fn write_wigner(&mut self, stem: &str, w: &WignerGrid, time: f64, outcome: &str) -> std::io::Result<()> {
        let label = WignerLabel {
            scenario: Some(self.provenance.scenario.clone()),
            time_ns: Some(time),
            outcome: Some(outcome.to_string()),
            model: Some(self.provenance.model.clone()),
            param_hash: Some(self.provenance.param_hash.clone()),
            code_version: Some(self.provenance.code_version.clone()),
        };
        let w = w.clone().with_label(label);
        let mut csv = self.provenance.csv_header().into_bytes();
        w.write_csv(&mut csv).map_err(std::io::Error::other)?;
        self.write_bytes(format!("{stem}.csv"), csv)?;
        let mut json = Vec::new();
        w.write_json(&mut json).map_err(std::io::Error::other)?;
        self.write_bytes(format!("{stem}.json"), json)
    }

    pub fn finish(&mut self, status: RunStatus) -> std::io::Result<Manifest> {
        let manifest = Manifest {
            provenance: self.provenance.clone(),
            status,
            files: self.files.clone(),
            metrics: self.metrics.clone(),
            warnings: self.warnings.clone(),
            failures: self.failures.clone(),
            config: self.config.clone(),
        };
        let mut text = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push(b'\n');
        std::fs::write(self.dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

/// Snapshot file stem fragment: `90` for 90.0, `2p5` for 2.5.
pub fn time_tag(t: f64) -> String {
    format!("{t}").replace('.', "p")
}
