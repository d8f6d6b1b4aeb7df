//! Pipeline configuration file.

use std::path::{Path, PathBuf};

use qfp_core::embedding::ExchangeFactor;
use qfp_core::fingerprint_ml::{time_grid, EmbeddingMode, EmbeddingSpec, Evolver, ObservableSpec};
use qfp_core::quantum_sim::{Amplification, InitialState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MIN_SEPARATION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: DatasetSource,
    pub embedding: EmbeddingSpec,
    pub initial_state: InitialState,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub evolver: Evolver,
    pub observable: ObservableSpec,
    #[serde(default)]
    pub target: TargetSource,
    #[serde(default)]
    pub model: ModelChoice,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub measurement: MeasurementConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Relative paths resolve against the config file's directory.
    Manifest { path: PathBuf },
    /// `count` H₂ separations evenly spaced over `[rmin, rmax]` bohr.
    H2 { rmin: f64, rmax: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        time_grid(self.start, self.stop, self.step).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Where regression targets come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSource {
    /// Manifest entry targets (the separation for generated H₂ sets).
    #[default]
    Manifest,
    /// RHF HOMO-LUMO gap of each embedded Hamiltonian.
    HomoLumoGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelChoice {
    Pls {
        n_components: usize,
    },
    /// Component count chosen by pooled CV R² over `1..=max_components`.
    PlsSweep {
        max_components: usize,
    },
    Krr {
        length_scale: f64,
        ridge: f64,
    },
}

impl Default for ModelChoice {
    fn default() -> Self {
        ModelChoice::PlsSweep { max_components: 14 }
    }
}

impl ModelChoice {
    pub fn validate(&self) -> CliResult<()> {
        match *self {
            ModelChoice::Pls { n_components: 0 } | ModelChoice::PlsSweep { max_components: 0 } => {
                Err(CliError::Config("PLS needs at least one component".into()))
            }
            ModelChoice::Krr {
                length_scale,
                ridge,
            } if !(length_scale > 0.0 && length_scale.is_finite())
                || !(ridge >= 0.0 && ridge.is_finite()) =>
            {
                Err(CliError::Config(format!(
                    "kernel ridge needs length_scale > 0 and ridge >= 0, got {length_scale}, {ridge}"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 5, seed: 0 }
    }
}

/// Simulated hardware noise with zero-noise extrapolation over `scales`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub p: f64,
    pub scales: Vec<f64>,
    pub seed: u64,
    pub trajectories: usize,
    #[serde(default = "default_fit_order")]
    pub fit_order: usize,
    #[serde(default)]
    pub amplification: Amplification,
}

fn default_fit_order() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    pub validation_fraction: f64,
    pub test_fraction: f64,
    /// Box for each free parameter of the symmetric measurement matrix
    /// (diagonal first, then the upper triangle row by row).
    pub bound: (f64, f64),
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            validation_fraction: 0.2,
            test_fraction: 0.1,
            bound: (-1.0, 1.0),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config; returns it with the directory that
    /// relative dataset paths resolve against.
    pub fn load(path: &Path) -> CliResult<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg = Self::from_json(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, dir))
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if let DatasetSource::H2 { rmin, rmax, count } = self.dataset {
            check_h2_range(rmin, rmax, count)?;
        }
        let e = &self.embedding;
        if e.active_orbitals == 0 || e.active_electrons == 0 {
            return bad("active space needs at least one electron and one orbital".into());
        }
        if e.active_electrons % 2 != 0 || e.active_electrons > 2 * e.active_orbitals {
            return bad(format!(
                "active space ({}e, {}o) is not a closed-shell fit",
                e.active_electrons, e.active_orbitals
            ));
        }
        match e.mode {
            EmbeddingMode::ActiveSpace if !e.fragment.is_empty() => {
                return bad("fragment indices only apply to dmet embedding".into())
            }
            EmbeddingMode::Dmet if e.fragment.is_empty() => {
                return bad("dmet embedding needs fragment indices".into())
            }
            EmbeddingMode::ActiveSpace if e.exchange_factor != ExchangeFactor::Half => {
                return bad("exchange_factor only applies to dmet embedding".into())
            }
            _ => {}
        }
        self.time_grid.points()?;
        if self.time_grid.start < 0.0 {
            return bad("time grid must start at t >= 0".into());
        }
        check_evolver(&self.evolver)?;
        match &self.observable {
            ObservableSpec::Custom { matrix } => {
                let n = e.active_orbitals;
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return bad(format!("observable matrix must be {n}x{n}"));
                }
                let asym = (0..n).any(|i| (0..n).any(|j| matrix[i][j] != matrix[j][i]));
                if asym || matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("observable matrix must be finite and symmetric".into());
                }
            }
            ObservableSpec::RdmElement { r, s } => {
                if *r >= e.active_orbitals || *s >= e.active_orbitals {
                    return bad(format!("1-RDM element ({r},{s}) outside the active space"));
                }
            }
            ObservableSpec::F => {}
        }
        self.model.validate()?;
        if self.cv.k < 2 {
            return bad(format!("cv.k must be at least 2, got {}", self.cv.k));
        }
        if let Some(n) = &self.noise {
            n.validate(&self.evolver)?;
        }
        let m = &self.measurement;
        let frac_ok = |f: f64| (0.0..1.0).contains(&f);
        if !frac_ok(m.validation_fraction)
            || !frac_ok(m.test_fraction)
            || m.validation_fraction + m.test_fraction >= 1.0
        {
            return bad("measurement fractions must be in [0, 1) and sum below 1".into());
        }
        if !(m.bound.0.is_finite() && m.bound.1.is_finite() && m.bound.0 < m.bound.1) {
            return bad(format!(
                "measurement bound {:?} is not an interval",
                m.bound
            ));
        }
        Ok(())
    }
}

pub fn check_evolver(ev: &Evolver) -> CliResult<()> {
    if let Evolver::Trotter { order, r, .. } = *ev {
        if order != 1 && order != 2 {
            return Err(CliError::Config(format!(
                "Trotter order must be 1 or 2, got {order}"
            )));
        }
        if r == 0 {
            return Err(CliError::Config("Trotter r must be at least 1".into()));
        }
    }
    Ok(())
}

pub fn check_h2_range(rmin: f64, rmax: f64, count: usize) -> CliResult<()> {
    if !(rmin >= MIN_SEPARATION) || !rmax.is_finite() || rmax < rmin {
        return Err(CliError::Config(format!(
            "separations need {MIN_SEPARATION} <= rmin <= rmax, got {rmin}..{rmax}"
        )));
    }
    if count < 2 {
        return Err(CliError::Config(format!(
            "count must be at least 2, got {count}"
        )));
    }
    Ok(())
}

/// `count` evenly spaced points; the endpoints are exact.
pub fn h2_separations(rmin: f64, rmax: f64, count: usize) -> Vec<f64> {
    let h = (rmax - rmin) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                rmax
            } else {
                rmin + i as f64 * h
            }
        })
        .collect()
}

impl NoiseConfig {
    fn validate(&self, evolver: &Evolver) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !matches!(evolver, Evolver::Trotter { .. }) {
            return bad("noise needs a trotter evolver".into());
        }
        if self.scales.is_empty() || self.trajectories == 0 {
            return bad("noise needs at least one scale and one trajectory".into());
        }
        if self.scales.len() > 1 && self.fit_order >= self.scales.len() {
            return bad(format!(
                "fit_order {} needs more than {} scales",
                self.fit_order,
                self.scales.len()
            ));
        }
        for &s in &self.scales {
            self.spec(s, 0)
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn spec(&self, scale: f64, seed_offset: u64) -> qfp_core::quantum_sim::NoiseSpec {
        qfp_core::quantum_sim::NoiseSpec {
            p: self.p,
            scale,
            seed: self.seed.wrapping_add(seed_offset),
            amplification: self.amplification,
        }
    }
}
