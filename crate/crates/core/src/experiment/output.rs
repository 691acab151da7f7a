use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Fixed 17-significant-digit rendering used in every CSV file.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // Avoid a distinct `-0` rendering.
        return format!("{:.16e}", 0.0);
    }
    format!("{v:.16e}")
}

/// One written file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Writes CSV files into one directory and keeps their hashes.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
        Ok(Self { dir, entries: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    /// RFC 4180 CSV with a header row and LF line endings.
    pub fn write_csv<S: AsRef<str>>(&mut self, name: &str, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(AsRef::as_ref))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io { path: self.dir.join(name), source: e.into_error() })?;
        self.write_bytes(name, &bytes)
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| Error::Io { path, source })?;
        self.entries.retain(|e| e.file != name);
        self.entries.push(ManifestEntry { file: name.to_owned(), bytes: bytes.len(), sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    /// Writes `manifest.csv` listing every file so far and returns the entries.
    pub fn finish(mut self) -> Result<Vec<ManifestEntry>> {
        let rows: Vec<Vec<String>> =
            self.entries.iter().map(|e| vec![e.file.clone(), e.bytes.to_string(), e.sha256.clone()]).collect();
        let entries = self.entries.clone();
        self.write_csv("manifest.csv", &["file", "bytes", "sha256"], &rows)?;
        Ok(entries)
    }
}
