//! Result tables and their CSV form.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// A rectangular table of numbers; `None` marks an undefined cell (for
/// example the first rate of a ladder).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics if the width differs from the header.
    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(format_number).unwrap_or_default())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn from_csv_str(text: &str) -> io::Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers().map_err(io::Error::other)?.iter().map(String::from).collect();
        let mut table = Self { columns, rows: Vec::new() };
        for rec in r.records() {
            let rec = rec.map_err(io::Error::other)?;
            let row = rec
                .iter()
                .map(|s| {
                    if s.is_empty() {
                        Ok(None)
                    } else {
                        s.parse::<f64>().map(Some).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
                    }
                })
                .collect::<io::Result<Vec<_>>>()?;
            if row.len() != table.columns.len() {
                return Err(io::Error::new(io::ErrorKind::InvalidData, "ragged CSV row"));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// Scientific notation with six significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.5e}")
}

pub fn write_csv(table: &ResultTable, path: &Path) -> io::Result<()> {
    fs::write(path, table.to_csv_string())
}

/// SHA-256 of the canonical configuration text, hex encoded.
pub fn config_hash(config_text: &str) -> String {
    hex::encode(Sha256::digest(config_text.as_bytes()))
}

/// Path of the metadata file that accompanies `csv`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta");
    csv.with_file_name(name)
}

/// Writes the sidecar: hash and timestamp as comments, followed by the full
/// configuration, which `parse_config` reads back unchanged.
pub fn write_metadata(csv: &Path, config_text: &str) -> io::Result<()> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or_default();
    let body = format!("# config_hash = {}\n# unix_time = {stamp}\n{config_text}", config_hash(config_text));
    fs::write(metadata_path(csv), body)
}
