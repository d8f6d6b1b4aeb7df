//! Dataset loading and per-molecule fingerprinting.

use std::path::Path;

use nalgebra::DMatrix;
use qfp_core::chem_io::{load_manifest, DatasetManifest, ManifestEntry, MoleculeSource};
use qfp_core::fingerprint_ml::{
    build_hamiltonian, compute_fingerprint, load_integrals, Evolver, ObservableSpec,
};
use qfp_core::quantum_sim::{
    jordan_wigner, noisy_expectation, one_body_observable, prepare_initial,
    trotter_sequence_ordered, zne_extrapolate, InitialState,
};
use qfp_core::EmbeddedHamiltonian;
use rayon::prelude::*;

use crate::config::{h2_separations, DatasetSource, NoiseConfig, PipelineConfig, TargetSource};
use crate::error::{CliError, CliResult, Context};

pub struct Dataset {
    pub manifest: DatasetManifest,
    pub label: String,
}

impl Dataset {
    pub fn load(source: &DatasetSource, base_dir: &Path) -> CliResult<Self> {
        match source {
            DatasetSource::Manifest { path } => {
                let p = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                let manifest = load_manifest(&p).context(|| "loading manifest".into())?;
                let label = manifest
                    .entries
                    .first()
                    .map_or_else(|| "target".into(), |e| e.label.clone());
                Ok(Self { manifest, label })
            }
            DatasetSource::H2 { rmin, rmax, count } => Ok(Self {
                manifest: h2_manifest(*rmin, *rmax, *count, |_, z| MoleculeSource::H2 {
                    separation: z,
                }),
                label: "z".into(),
            }),
        }
    }
}

pub fn h2_id(i: usize) -> String {
    format!("h2_{i:03}")
}

pub fn h2_manifest(
    rmin: f64,
    rmax: f64,
    count: usize,
    source: impl Fn(usize, f64) -> MoleculeSource,
) -> DatasetManifest {
    let entries = h2_separations(rmin, rmax, count)
        .into_iter()
        .enumerate()
        .map(|(i, z)| ManifestEntry {
            id: h2_id(i),
            source: source(i, z),
            target: Some(z),
            label: "z".into(),
        })
        .collect();
    DatasetManifest::new(entries)
}

/// One molecule's fingerprint and target.
#[derive(Debug, Clone)]
pub struct Row {
    pub id: String,
    pub target: Option<f64>,
    pub values: Vec<f64>,
}

pub fn hamiltonian(
    entry: &ManifestEntry,
    manifest: &DatasetManifest,
    cfg: &PipelineConfig,
) -> CliResult<EmbeddedHamiltonian> {
    let ctx = || format!("molecule '{}'", entry.id);
    let m = load_integrals(&entry.source, Some(manifest)).context(ctx)?;
    build_hamiltonian(&m, &cfg.embedding).context(ctx)
}

pub fn target(
    entry: &ManifestEntry,
    eh: &EmbeddedHamiltonian,
    source: TargetSource,
) -> CliResult<Option<f64>> {
    match source {
        TargetSource::Manifest => Ok(entry.target),
        TargetSource::HomoLumoGap => eh
            .homo_lumo_gap()
            .map(Some)
            .context(|| format!("molecule '{}'", entry.id)),
    }
}

/// Fingerprints every manifest entry on `times`, fanned out over the
/// worker pool and returned in manifest order.
pub fn fingerprint_rows(
    ds: &Dataset,
    cfg: &PipelineConfig,
    times: &[f64],
    evolver: Evolver,
    initial: InitialState,
) -> CliResult<Vec<Row>> {
    ds.manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, entry)| {
            let eh = hamiltonian(entry, &ds.manifest, cfg)?;
            let target = target(entry, &eh, cfg.target)?;
            let values = match &cfg.noise {
                None => {
                    compute_fingerprint(&entry.id, &eh, initial, times, &cfg.observable, evolver)
                        .context(|| format!("molecule '{}'", entry.id))?
                        .values
                }
                Some(noise) => {
                    noisy_series(&eh, initial, times, &cfg.observable, evolver, noise, i)
                        .context(|| format!("molecule '{}'", entry.id))?
                }
            };
            Ok(Row {
                id: entry.id.clone(),
                target,
                values,
            })
        })
        .collect()
}

/// The one-body matrix whose expectation is `spec`.
pub fn observable_matrix(spec: &ObservableSpec, eh: &EmbeddedHamiltonian) -> DMatrix<f64> {
    let n = eh.n_active_orbitals;
    match spec {
        ObservableSpec::F => eh.h_eff.clone(),
        ObservableSpec::Custom { matrix } => DMatrix::from_fn(n, n, |i, j| matrix[i][j]),
        ObservableSpec::RdmElement { r, s } => {
            let mut o = DMatrix::zeros(n, n);
            o[(*r, *s)] += 0.5;
            o[(*s, *r)] += 0.5;
            o
        }
    }
}

/// Trajectory-averaged values of the Trotter circuit at every grid time,
/// extrapolated to zero noise when more than one scale is given. Seeds
/// are offset per (molecule, time, scale) so every estimate is independent.
fn noisy_series(
    eh: &EmbeddedHamiltonian,
    initial: InitialState,
    times: &[f64],
    observable: &ObservableSpec,
    evolver: Evolver,
    noise: &NoiseConfig,
    molecule: usize,
) -> qfp_core::Result<Vec<f64>> {
    let Evolver::Trotter {
        order,
        r,
        term_order,
    } = evolver
    else {
        return Err(qfp_core::Error::InvalidInput(
            "noise needs a trotter evolver".into(),
        ));
    };
    let ph = jordan_wigner(eh)?;
    let (prep, _) = prepare_initial::<f64>(initial, ph.n_qubits, eh.n_active_electrons)?;
    let obs = one_body_observable(&observable_matrix(observable, eh))?;
    let perm = term_order.permutation(&ph);
    let ns = noise.scales.len();
    times
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let mut gs = prep.clone();
            gs.gates
                .extend(trotter_sequence_ordered(&ph, t, order, r, &perm)?.gates);
            let points = noise
                .scales
                .iter()
                .enumerate()
                .map(|(si, &s)| {
                    let offset = ((molecule * times.len() + ti) * ns + si) as u64;
                    let est =
                        noisy_expectation(&gs, &obs, &noise.spec(s, offset), noise.trajectories)?;
                    Ok((s, est.mean))
                })
                .collect::<qfp_core::Result<Vec<(f64, f64)>>>()?;
            if ns == 1 {
                Ok(points[0].1)
            } else {
                zne_extrapolate(&points, noise.fit_order)
            }
        })
        .collect()
}

/// Targets of all rows, or a data error naming the molecules without one.
pub fn require_targets(rows: &[Row]) -> CliResult<Vec<f64>> {
    let missing: Vec<&str> = rows
        .iter()
        .filter(|r| r.target.is_none())
        .map(|r| r.id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Data(format!(
            "no target for: {}",
            missing.join(", ")
        )));
    }
    Ok(rows.iter().map(|r| r.target.unwrap()).collect())
}
