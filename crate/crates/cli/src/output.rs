//! Artifact formatting and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use ldlab_core::ExtendedReal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST: &str = "manifest.json";

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

pub fn ext(x: ExtendedReal) -> String {
    x.to_string()
}

/// In-memory CSV table; nothing touches the disk until the run completes.
#[derive(Debug, Clone)]
pub struct Csv {
    body: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            body: format!("{}\n", header.join(",")),
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        let _ = writeln!(self.body, "{}", cells.join(","));
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.body.into_bytes()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub seed: u64,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn read(dir: &Path) -> Option<Manifest> {
        let text = std::fs::read_to_string(dir.join(MANIFEST)).ok()?;
        serde_json::from_str(&text).ok()
    }
}

/// Everything an experiment produces, written in one pass at the end.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
    }

    pub fn write(self, dir: &Path, kind: &str, seed: u64, config_raw: &[u8]) -> CliResult<Manifest> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.files.len() + 1);
        let mut all = self.files;
        all.push(("config.toml".into(), config_raw.to_vec()));
        for (name, bytes) in &all {
            std::fs::write(dir.join(name), bytes)?;
            files.push(FileEntry {
                path: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            });
        }
        let manifest = Manifest {
            tool: "ldlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            kind: kind.into(),
            seed,
            config_sha256: sha256_hex(config_raw),
            files,
            summary: serde_json::Value::Object(self.summary),
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        std::fs::write(dir.join(MANIFEST), json)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.130812] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(1.0), "1.0");
        assert_eq!(ext(ExtendedReal::PosInfinity), "inf");
    }

    #[test]
    fn csv_rows() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[num(1.0), num(0.5)]);
        assert_eq!(String::from_utf8(c.into_bytes()).unwrap(), "a,b\n1.0,0.5\n");
    }
}
