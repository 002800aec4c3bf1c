//! Output files: every artifact starts with a metadata comment block
//! (config hash, seed, tool version, command) so reruns are attributable,
//! followed by a mandatory CSV header row. Floats are written in the
//! shortest round-trip form; identical config and seed therefore reproduce
//! identical bytes for the deterministic commands.

use mfc_core::seeding::fnv1a64;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn config_hash(source: &str) -> String {
    format!("{:016x}", fnv1a64(source.as_bytes()))
}

pub fn metadata_block(config_source: &str, seed: u64, command: &str) -> String {
    format!(
        "# tool_version={TOOL_VERSION}\n# core_version={}\n# command={command}\n# config_hash={}\n# seed={seed}\n",
        mfc_core::VERSION,
        config_hash(config_source)
    )
}

pub struct OutputWriter {
    out_dir: PathBuf,
    metadata: String,
}

impl OutputWriter {
    pub fn new(out_dir: &Path, config_source: &str, seed: u64, command: &str) -> io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            metadata: metadata_block(config_source, seed, command),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Write a CSV file: metadata block, header row, then the records.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> io::Result<PathBuf> {
        let path = self.path(name);
        let mut text = self.metadata.clone();
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Write pre-rendered content (e.g. a table or checkpoint) under the
    /// metadata block.
    pub fn write_with_metadata(&self, name: &str, content: &str) -> io::Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, format!("{}{}", self.metadata, content))?;
        Ok(path)
    }

    /// Write raw bytes untouched (binary formats carry no comments).
    pub fn write_binary(&self, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, bytes)?;
        Ok(path)
    }
}

/// Shortest round-trip float formatting shared by all CSV writers.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
