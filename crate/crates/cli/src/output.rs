//! Output files: CSV tables, JSON documents and the run sidecar.
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! a reader never sees a half-written table.

use anyhow::{Context, Result};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Names of the files written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).context("cannot create a temporary file")?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        let target = self.path(name);
        tmp.persist(&target).with_context(|| format!("cannot write {}", target.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes rows of plain numbers and integers under a header.
    pub fn write_csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }
}
