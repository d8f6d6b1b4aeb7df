use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MoleculeSource {
    /// FCIDUMP file; relative paths resolve against the manifest directory.
    Fcidump { path: PathBuf },
    /// H₂ / STO-3G at the given separation (bohr).
    H2 { separation: f64 },
    /// Linear hydrogen chain / STO-3G; `bonds` is cycled along the chain.
    HydrogenChain { n_atoms: usize, bonds: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub source: MoleculeSource,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_label() -> String {
    "target".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub entries: Vec<ManifestEntry>,
    /// Directory used to resolve relative FCIDUMP paths; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self {
            format_version: MANIFEST_VERSION,
            entries,
            base_dir: PathBuf::new(),
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != MANIFEST_VERSION {
            return Err(Error::Dataset(format!(
                "unsupported manifest format_version {} (expected {MANIFEST_VERSION})",
                self.format_version
            )));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Dataset(format!("duplicate molecule id '{}'", e.id)));
            }
            if let MoleculeSource::Fcidump { path } = &e.source {
                let p = self.resolve(path);
                if !p.is_file() {
                    return Err(Error::Dataset(format!(
                        "molecule '{}': FCIDUMP {} not found",
                        e.id,
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("{}: {e}", path.display()),
    })?;
    m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    m.validate()?;
    Ok(m)
}

/// Rows of per-molecule features over a shared time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            ids: Vec::new(),
            times,
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, id: impl Into<String>, row: Vec<f64>) -> Result<()> {
        if row.len() != self.times.len() {
            return Err(Error::Dimension(format!(
                "row has {} values, table has {} columns",
                row.len(),
                self.times.len()
            )));
        }
        self.ids.push(id.into());
        self.values.push(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("molecule_id");
        for t in &self.times {
            out.push_str(&format!(",t={t}"));
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.values) {
            out.push_str(id);
            for v in row {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?;
        if header.get(0) != Some("molecule_id") {
            return Err(Error::Parse {
                line: 1,
                msg: "first column must be 'molecule_id'".into(),
            });
        }
        let mut times = Vec::new();
        for h in header.iter().skip(1) {
            let t = h
                .strip_prefix("t=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or(Error::Parse {
                    line: 1,
                    msg: format!("column header '{h}' is not of the form t=<value>"),
                })?;
            times.push(t);
        }
        let mut table = FeatureTable::new(times);
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if rec.len() != table.times.len() + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!(
                        "row has {} fields, header has {}",
                        rec.len(),
                        table.times.len() + 1
                    ),
                });
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("non-numeric value '{v}'"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(&rec[0], row)?;
        }
        Ok(table)
    }
}

pub fn save_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FeatureTable::from_csv(&text)
}
