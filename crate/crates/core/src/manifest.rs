//! Run manifests: parameters, seeds and SHA-256 checksums of every artifact a
//! run wrote. Artifacts never carry timestamps; the manifest does.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::SCHEMA_VERSION;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
    bytes.push(b'\n');
    bytes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seeds: Vec<u64>,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
    /// File name -> SHA-256 of its bytes.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        parameters: BTreeMap<String, serde_json::Value>,
        seeds: Vec<u64>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: format!("regtri {}", env!("CARGO_PKG_VERSION")),
            subcommand: subcommand.to_string(),
            parameters,
            seeds,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            outputs: Vec::new(),
            checksums: BTreeMap::new(),
        }
    }

    /// Writes `bytes` to `dir/name` and records its checksum.
    pub fn write_artifact(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        self.outputs.push(name.to_string());
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, to_json_bytes(self))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Names of recorded artifacts under `dir` whose bytes no longer match.
    pub fn verify(&self, dir: &Path) -> io::Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, sum) in &self.checksums {
            match fs::read(dir.join(name)) {
                Ok(bytes) if sha256_hex(&bytes) == *sum => {}
                Ok(_) => bad.push(name.clone()),
                Err(e) if e.kind() == io::ErrorKind::NotFound => bad.push(name.clone()),
                Err(e) => return Err(e),
            }
        }
        Ok(bad)
    }

    /// True when both manifests describe the same run inputs.
    pub fn same_inputs(&self, other: &Self) -> bool {
        self.subcommand == other.subcommand
            && self.parameters == other.parameters
            && self.seeds == other.seeds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_round_trip() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("census", BTreeMap::new(), vec![1]);
        m.write_artifact(dir.path(), "a.json", b"{}\n").unwrap();
        let path = m.write(dir.path()).unwrap();
        let back = RunManifest::read(&path).unwrap();
        assert_eq!(back, m);
        assert!(back.verify(dir.path()).unwrap().is_empty());
        fs::write(dir.path().join("a.json"), b"[]\n").unwrap();
        assert_eq!(back.verify(dir.path()).unwrap(), vec!["a.json".to_string()]);
    }
}
