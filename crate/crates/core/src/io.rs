//! File artifacts: numeric tables as CSV with a one-line header, metadata as
//! JSON sidecars, and a manifest listing every artifact with its digest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a CSV
//! read back reproduces the stored values bit for bit and equal inputs give
//! byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pde::{Field, Grid};
use crate::profile::{ProfileSolution, ProfileState};

/// A numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Artifact(e.to_string());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Artifact(e.to_string()))
    }

    pub fn from_csv_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| Error::Artifact(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Artifact(e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Artifact(format!("row {}: `{s}`: {e}", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Artifact(format!("row {} has {} fields, expected {}", i + 1, row.len(), columns.len())));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv_bytes(&fs::read(path)?)
    }
}

/// Metadata written next to every CSV (`name.csv` → `name.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar<M> {
    pub config_hash: String,
    pub columns: Vec<String>,
    pub meta: M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

/// Index of an output directory; `stages` records which commands completed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub producer: String,
    pub stages: Vec<String>,
    pub artifacts: BTreeMap<String, ArtifactEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts into one directory, all stamped with the same config hash.
#[derive(Debug)]
pub struct ArtifactStore {
    root: PathBuf,
    hash: String,
    write_once: bool,
    manifest: Manifest,
}

impl ArtifactStore {
    pub const MANIFEST: &'static str = "manifest.json";

    /// Opens (or creates) `root`. With `write_once`, an existing manifest
    /// from a different configuration is an error and published artifacts are
    /// never replaced; otherwise a foreign manifest is discarded.
    pub fn open(root: &Path, config_hash: &str, write_once: bool) -> Result<Self> {
        fs::create_dir_all(root)?;
        let mpath = root.join(Self::MANIFEST);
        let existing: Option<Manifest> = if mpath.exists() { Some(read_json(&mpath)?) } else { None };
        let existing = existing.filter(|m| write_once || m.config_hash == config_hash);
        let manifest = if let Some(m) = existing {
            if m.config_hash != config_hash {
                return Err(Error::Artifact(format!(
                    "{} was produced by config {}, not {config_hash}; use a fresh output directory",
                    root.display(),
                    m.config_hash
                )));
            }
            m
        } else {
            Manifest {
                config_hash: config_hash.into(),
                producer: format!("fastfront {}", env!("CARGO_PKG_VERSION")),
                ..Manifest::default()
            }
        };
        Ok(Self { root: root.into(), hash: config_hash.into(), write_once, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn has_stage(&self, stage: &str) -> bool {
        self.manifest.stages.iter().any(|s| s == stage)
    }

    /// True when `name` is listed and its digest still matches the file.
    pub fn is_intact(&self, name: &str) -> bool {
        let Some(e) = self.manifest.artifacts.get(name) else { return false };
        fs::read(self.root.join(&e.path)).map(|b| sha256_hex(&b) == e.sha256).unwrap_or(false)
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let digest = sha256_hex(bytes);
        if let Some(e) = self.manifest.artifacts.get(name) {
            // same config, same bytes: nothing to do; anything else would
            // overwrite a published result
            if e.sha256 == digest && path.exists() {
                return Ok(());
            }
            if self.write_once && path.exists() && fs::read(&path).map(|b| sha256_hex(&b)).ok().as_deref() == Some(e.sha256.as_str()) {
                return Err(Error::Artifact(format!("refusing to overwrite {name} with different content")));
            }
        }
        fs::write(&path, bytes)?;
        self.manifest.artifacts.insert(name.into(), ArtifactEntry { path: name.into(), sha256: digest });
        Ok(())
    }

    /// Writes `name.csv` and the sidecar `name.json`.
    pub fn write_table<M: Serialize>(&mut self, name: &str, table: &Table, meta: &M) -> Result<()> {
        self.put(&format!("{name}.csv"), &table.to_csv_bytes()?)?;
        let side = Sidecar { config_hash: self.hash.clone(), columns: table.columns.clone(), meta };
        self.put(&format!("{name}.json"), &json_bytes(&side)?)
    }

    /// Writes a standalone JSON document wrapped with the config hash.
    pub fn write_json<M: Serialize>(&mut self, name: &str, value: &M) -> Result<()> {
        #[derive(Serialize)]
        struct Stamped<'a, M> {
            config_hash: &'a str,
            #[serde(flatten)]
            value: &'a M,
        }
        self.put(&format!("{name}.json"), &json_bytes(&Stamped { config_hash: &self.hash, value })?)
    }

    pub fn read_table<M: DeserializeOwned>(&self, name: &str) -> Result<(Table, M)> {
        let table = Table::read(&self.root.join(format!("{name}.csv")))?;
        let side: Sidecar<M> = read_json(&self.root.join(format!("{name}.json")))?;
        if side.config_hash != self.hash {
            return Err(Error::Artifact(format!("{name}: config hash mismatch")));
        }
        if side.columns != table.columns {
            return Err(Error::Artifact(format!("{name}: header disagrees with sidecar")));
        }
        Ok((table, side.meta))
    }

    pub fn read_json<M: DeserializeOwned>(&self, name: &str) -> Result<M> {
        read_json(&self.root.join(format!("{name}.json")))
    }

    /// Records a completed stage and persists the manifest.
    pub fn finish_stage(&mut self, stage: &str) -> Result<()> {
        if !self.has_stage(stage) {
            self.manifest.stages.push(stage.into());
        }
        self.save()
    }

    pub fn save(&self) -> Result<()> {
        fs::write(self.root.join(Self::MANIFEST), json_bytes(&self.manifest)?)?;
        Ok(())
    }
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))
}

/// Profile samples as a `z, phi, q` table; the rest of the solution goes to
/// the sidecar.
pub fn profile_table(sol: &ProfileSolution) -> (Table, ProfileSolution) {
    let mut t = Table::new(&["z", "phi", "q"]);
    for s in &sol.samples {
        t.push(vec![s.z, s.phi, s.q]);
    }
    let meta = ProfileSolution { samples: Vec::new(), ..sol.clone() };
    (t, meta)
}

pub fn profile_from_table(table: &Table, meta: ProfileSolution) -> Result<ProfileSolution> {
    if table.columns != ["z", "phi", "q"] {
        return Err(Error::Artifact(format!("profile columns {:?}", table.columns)));
    }
    let samples = table.rows.iter().map(|r| ProfileState { z: r[0], phi: r[1], q: r[2] }).collect();
    Ok(ProfileSolution { samples, ..meta })
}

/// Snapshot as an `x, u` table.
pub fn field_table(grid: &Grid, field: &Field) -> Table {
    let mut t = Table::new(&["x", "u"]);
    for (&x, &u) in grid.nodes.iter().zip(&field.values) {
        t.push(vec![x, u]);
    }
    t
}

pub fn field_from_table(table: &Table, t: f64) -> Result<(Grid, Field)> {
    let (Some(x), Some(u)) = (table.column("x"), table.column("u")) else {
        return Err(Error::Artifact("snapshot needs x and u columns".into()));
    };
    Ok((Grid::new(x)?, Field { t, values: u }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![0.1 + 0.2, 1e-300]);
        t.push(vec![std::f64::consts::PI, -2.5e17]);
        let bytes = t.to_csv_bytes().unwrap();
        assert_eq!(bytes.iter().filter(|&&b| b == b'\n').count(), 3);
        let back = Table::from_csv_bytes(&bytes).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv_bytes().unwrap(), bytes);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(Table::from_csv_bytes(b"a,b\n1,x\n").is_err());
        assert!(Table::from_csv_bytes(b"a,b\n1,2,3\n").is_err());
    }

    #[test]
    fn store_is_write_once_per_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ArtifactStore::open(dir.path(), "h1", true).unwrap();
        let mut t = Table::new(&["x"]);
        t.push(vec![1.0]);
        s.write_table("a", &t, &()).unwrap();
        s.write_table("a", &t, &()).unwrap();
        t.push(vec![2.0]);
        assert!(s.write_table("a", &t, &()).is_err());
        s.finish_stage("one").unwrap();
        let s2 = ArtifactStore::open(dir.path(), "h1", true).unwrap();
        assert!(s2.has_stage("one") && s2.is_intact("a.csv"));
        let (back, ()) = s2.read_table::<()>("a").unwrap();
        assert_eq!(back.rows, vec![vec![1.0]]);
        assert!(ArtifactStore::open(dir.path(), "h2", true).is_err());
        let s3 = ArtifactStore::open(dir.path(), "h2", false).unwrap();
        assert!(s3.manifest().artifacts.is_empty());
    }
}
