//! Deterministic result serialization: CSV tables with fixed column
//! order and 12-significant-digit decimals, and JSON manifests that
//! record the configuration echo and a SHA-256 checksum of every emitted
//! file. Identical inputs and seed must reproduce byte-identical data
//! files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Default significant digits for floating-point CSV fields.
pub const CSV_SIG_DIGITS: usize = 12;

/// Fixed-precision decimal text for a float: 12 significant digits in
/// scientific notation, locale-independent and bit-reproducible.
pub fn format_sig(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    format!("{:.*e}", CSV_SIG_DIGITS - 1, value)
}

/// A CSV table with a fixed header; rows are emitted in insertion order.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        CsvTable {
            header: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row<S: Into<String>>(&mut self, row: Vec<S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<String> {
        let body = self.to_csv_string();
        write_bytes(path, body.as_bytes())?;
        Ok(sha256_hex(body.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(bytes).map_err(io_err)
}

/// Checksum entry for one emitted file.
#[derive(Debug, Clone, Serialize)]
pub struct OutputChecksum {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Run manifest: configuration echo, artifact version, wall time and the
/// checksums of everything written.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputChecksum>,
}

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed,
            wall_time_secs: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, sha256: String) -> Result<()> {
        let bytes = std::fs::metadata(path)
            .map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?
            .len();
        self.outputs.push(OutputChecksum {
            path: path.display().to_string(),
            sha256,
            bytes,
        });
        Ok(())
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self)
            .expect("manifest serializes")
            + "\n";
        write_bytes(path, body.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_format_fixtures() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1.00000000000e0");
        assert_eq!(format_sig(-0.5), "-5.00000000000e-1");
        let ln2 = format_sig(2f64.ln());
        assert_eq!(ln2, "6.93147180560e-1");
        // Round-trips to the same 12 digits.
        let back: f64 = ln2.parse().unwrap();
        assert!((back - 2f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn csv_shape_and_determinism() {
        let build = || {
            let mut t = CsvTable::new(vec!["k", "value"]);
            t.push_row(vec!["1".to_string(), format_sig(0.25)]);
            t.push_row(vec!["2".to_string(), format_sig(1.0 / 3.0)]);
            t.to_csv_string()
        };
        let a = build();
        let b = build();
        assert_eq!(a, b);
        assert!(a.starts_with("k,value\n"));
        assert_eq!(a.lines().count(), 3);
        assert_eq!(sha256_hex(a.as_bytes()), sha256_hex(b.as_bytes()));
    }

    #[test]
    fn header_only_csv() {
        let t = CsvTable::new(vec!["a", "b", "c"]);
        assert_eq!(t.to_csv_string(), "a,b,c\n");
    }

    #[test]
    fn manifest_checksums_match_files() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("out.csv");
        let mut table = CsvTable::new(vec!["x"]);
        table.push_row(vec!["7"]);
        let checksum = table.write_to(&csv_path).unwrap();

        let mut manifest = Manifest::new("demo", serde_json::json!({"x": 7}), Some(11));
        manifest.record_output(&csv_path, checksum.clone()).unwrap();
        let manifest_path = dir.path().join("manifest.json");
        manifest.write_to(&manifest_path).unwrap();

        let body = std::fs::read(&csv_path).unwrap();
        assert_eq!(sha256_hex(&body), checksum);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
        assert_eq!(json["outputs"][0]["sha256"], checksum.as_str());
        assert_eq!(json["seed"], 11);
    }

    #[test]
    fn io_errors_carry_path_context() {
        let t = CsvTable::new(vec!["x"]);
        let err = t.write_to(Path::new("/dev/null/not-a-dir/out.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("not-a-dir"), "{msg}");
    }
}
