use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fsutil::{sha256_hex, write_file};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub scenario_seed: u64,
    pub fusion_seed: u64,
    pub uwb_seed: u64,
    /// Relative artifact path → SHA-256 of its bytes.
    pub artifacts: BTreeMap<String, String>,
}

/// Collects artifacts written under one output directory.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    artifacts: BTreeMap<String, String>,
}

impl ArtifactWriter {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(relative);
        write_file(&path, bytes)?;
        self.artifacts.insert(relative.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    /// Records a file written by someone else.
    pub fn record(&mut self, relative: &str) -> Result<()> {
        let bytes = crate::fsutil::read_file(&self.path(relative))?;
        self.artifacts.insert(relative.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn finish(self, mut manifest: Manifest) -> Result<Manifest> {
        manifest.artifacts = self.artifacts;
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        write_file(&self.root.join(MANIFEST_FILE), json.as_bytes())?;
        Ok(manifest)
    }
}
