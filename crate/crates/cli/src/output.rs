//! Artifact files: targets CSV, provenance and the plain writers.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

pub const FEATURES: &str = "features.csv";
pub const TARGETS: &str = "targets.csv";
pub const CV_REPORT: &str = "cv_report.json";
pub const PREDICTIONS: &str = "predicted_vs_actual.csv";
pub const COMPONENT_SWEEP: &str = "component_sweep.csv";
pub const SUMMARY: &str = "summary.csv";
pub const LABELS: &str = "labels.csv";
pub const CLUSTER_MEANS: &str = "cluster_means.csv";
pub const ELBOW: &str = "elbow.csv";
pub const PCA: &str = "pca.csv";
pub const GP_HISTORY: &str = "gp_history.json";
pub const BEST_OPERATOR: &str = "best_operator.json";
pub const EXACT_DEVIATION: &str = "exact_deviation.json";
pub const MANIFEST: &str = "manifest.json";
pub const PROVENANCE: &str = "provenance.json";

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn sub(&self, name: &str) -> CliResult<Self> {
        Self::create(&self.0.join(name))
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
        let p = self.path(name);
        std::fs::write(&p, contents).map_err(|e| CliError::io(p, e))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.write(name, text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
    pub arguments: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &str, config: Option<&PipelineConfig>, arguments: impl Serialize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.cloned(),
            arguments: serde_json::to_value(arguments).expect("arguments serialize"),
        }
    }
}

/// `molecule_id,<label>` rows.
pub fn targets_csv(label: &str, ids: &[String], values: &[f64]) -> String {
    let mut out = format!("molecule_id,{label}\n");
    for (id, v) in ids.iter().zip(values) {
        out.push_str(&format!("{id},{v}\n"));
    }
    out
}

pub struct Targets {
    pub label: String,
    pub ids: Vec<String>,
    pub values: Vec<f64>,
}

pub fn load_targets(path: &Path) -> CliResult<Targets> {
    let data = |m: String| CliError::Data(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data(e.to_string()))?;
    let header = rdr.headers().map_err(|e| data(e.to_string()))?.clone();
    if header.len() != 2 || &header[0] != "molecule_id" {
        return Err(data("header must be 'molecule_id,<label>'".into()));
    }
    let mut t = Targets {
        label: header[1].to_string(),
        ids: Vec::new(),
        values: Vec::new(),
    };
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| data(format!("line {line}: {e}")))?;
        let v: f64 = rec[1]
            .parse()
            .map_err(|_| data(format!("line {line}: non-numeric target '{}'", &rec[1])))?;
        if !seen.insert(rec[0].to_string()) {
            return Err(data(format!("line {line}: duplicate id '{}'", &rec[0])));
        }
        t.ids.push(rec[0].to_string());
        t.values.push(v);
    }
    Ok(t)
}

/// Reorders `targets` to `ids`, listing every id present on only one side.
pub fn align_targets(ids: &[String], targets: &Targets) -> CliResult<Vec<f64>> {
    let feature_ids: HashSet<&str> = ids.iter().map(String::as_str).collect();
    let target_ids: HashSet<&str> = targets.ids.iter().map(String::as_str).collect();
    let no_target: Vec<&str> = ids
        .iter()
        .map(String::as_str)
        .filter(|i| !target_ids.contains(i))
        .collect();
    let no_features: Vec<&str> = targets
        .ids
        .iter()
        .map(String::as_str)
        .filter(|i| !feature_ids.contains(i))
        .collect();
    if feature_ids.len() != ids.len() {
        return Err(CliError::Data("feature table repeats molecule ids".into()));
    }
    if !no_target.is_empty() || !no_features.is_empty() {
        let mut msg = String::from("feature and target ids differ");
        if !no_target.is_empty() {
            msg.push_str(&format!("; without target: {}", no_target.join(", ")));
        }
        if !no_features.is_empty() {
            msg.push_str(&format!("; without features: {}", no_features.join(", ")));
        }
        return Err(CliError::Data(msg));
    }
    Ok(ids
        .iter()
        .map(|id| {
            let k = targets.ids.iter().position(|t| t == id).unwrap();
            targets.values[k]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_round_trip_and_align() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let ids: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        std::fs::write(&p, targets_csv("z", &ids, &[1.0, 1.0 / 3.0])).unwrap();
        let t = load_targets(&p).unwrap();
        assert_eq!(t.label, "z");
        assert_eq!(t.values, [1.0, 1.0 / 3.0]);
        let swapped = vec!["b".to_string(), "a".to_string()];
        assert_eq!(align_targets(&swapped, &t).unwrap(), [1.0 / 3.0, 1.0]);
    }

    #[test]
    fn mismatches_listed_on_both_sides() {
        let t = Targets {
            label: "z".into(),
            ids: vec!["a".into(), "x".into(), "y".into()],
            values: vec![0.0; 3],
        };
        let ids = vec!["a".to_string(), "b".to_string()];
        let msg = align_targets(&ids, &t).unwrap_err().to_string();
        assert!(msg.contains("without target: b"), "{msg}");
        assert!(msg.contains("without features: x, y"), "{msg}");
    }
}
