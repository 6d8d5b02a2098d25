//! CSV tables and JSON summaries.
//!
//! CSV: header row, `,` separator, LF line endings, floats in Rust's
//! shortest round-trip form. JSON: pretty-printed with sorted keys and a
//! trailing newline. Nothing time- or thread-dependent is ever written, so
//! identical inputs give identical bytes.

use std::fmt::Display;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

pub const SCHEMA_NAME: &str = "bloch-collapse-summary";
pub const SCHEMA_VERSION: u32 = 1;

/// Column-oriented CSV writer.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, cells: &[&dyn Display]) {
        debug_assert_eq!(cells.len(), self.header.len());
        let line: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        self.rows.push(line.join(","));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.header.join(",").as_bytes())?;
        w.write_all(b"\n")?;
        for r in &self.rows {
            w.write_all(r.as_bytes())?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Envelope shared by every summary file.
#[derive(Debug, Serialize)]
pub struct Summary<P: Serialize, R: Serialize> {
    pub schema: &'static str,
    pub version: u32,
    pub command: &'static str,
    pub preset: Option<&'static str>,
    pub seed: Option<u64>,
    pub parameters: P,
    pub results: R,
    pub files: Vec<String>,
}

impl<P: Serialize, R: Serialize> Summary<P, R> {
    pub fn new(command: &'static str, preset: Option<&'static str>, seed: Option<u64>, parameters: P, results: R) -> Self {
        Self { schema: SCHEMA_NAME, version: SCHEMA_VERSION, command, preset, seed, parameters, results, files: Vec::new() }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        // going through Value sorts object keys
        let value: Value = serde_json::to_value(self).context("serializing summary")?;
        let mut text = serde_json::to_string_pretty(&value).context("serializing summary")?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Create the output directory and return the path of `name` inside it.
pub fn prepare(dir: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

/// Non-finite values become JSON null.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
