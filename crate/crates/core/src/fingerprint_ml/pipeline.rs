//! Molecule-to-Hamiltonian plumbing shared by the command line and tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::cv::{holdout_split, mse, r2_score, select_entries, select_rows};
use super::fingerprint::observable_series;
use super::krr::{krr_fit, krr_predict};
use crate::chem_io::{
    hydrogen_chain, read_fcidump, s_orbital_integrals, DatasetManifest, MolecularIntegrals,
    MoleculeSource,
};
use crate::embedding::{
    cluster_reduce, dmet_embed, homo_lumo_active_space, DmetOptions, EmbeddedHamiltonian,
    ExchangeFactor, FragmentSpec,
};
use crate::error::{Error, Result};
use crate::mean_field::{scf_converged, ScfOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMode {
    /// HOMO-LUMO window of the whole-molecule RHF solution.
    #[default]
    ActiveSpace,
    /// DMET fragment + bath cluster, reduced to the active window inside it.
    Dmet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub mode: EmbeddingMode,
    #[serde(default)]
    pub fragment: Vec<usize>,
    pub active_electrons: usize,
    pub active_orbitals: usize,
    #[serde(default = "yes")]
    pub fit_mu: bool,
    #[serde(default)]
    pub exchange_factor: ExchangeFactor,
}

fn yes() -> bool {
    true
}

impl EmbeddingSpec {
    pub fn active_space(active_electrons: usize, active_orbitals: usize) -> Self {
        Self {
            mode: EmbeddingMode::ActiveSpace,
            fragment: Vec::new(),
            active_electrons,
            active_orbitals,
            fit_mu: true,
            exchange_factor: ExchangeFactor::Half,
        }
    }

    pub fn dmet(fragment: Vec<usize>, active_electrons: usize, active_orbitals: usize) -> Self {
        Self {
            mode: EmbeddingMode::Dmet,
            fragment,
            ..Self::active_space(active_electrons, active_orbitals)
        }
    }
}

pub fn load_integrals(
    source: &MoleculeSource,
    manifest: Option<&DatasetManifest>,
) -> Result<MolecularIntegrals<f64>> {
    match source {
        MoleculeSource::Fcidump { path } => {
            let p = manifest.map_or_else(|| path.clone(), |m| m.resolve(path));
            read_fcidump(&p)
        }
        MoleculeSource::H2 { separation } => {
            s_orbital_integrals(&hydrogen_chain(2, &[*separation]))
        }
        MoleculeSource::HydrogenChain { n_atoms, bonds } => {
            s_orbital_integrals(&hydrogen_chain(*n_atoms, bonds))
        }
    }
}

/// RHF followed by the requested embedding.
pub fn build_hamiltonian(
    m: &MolecularIntegrals<f64>,
    spec: &EmbeddingSpec,
) -> Result<EmbeddedHamiltonian<f64>> {
    let mf = scf_converged(m, &ScfOptions::default())?;
    match spec.mode {
        EmbeddingMode::ActiveSpace => {
            homo_lumo_active_space(m, &mf, spec.active_electrons, spec.active_orbitals)
        }
        EmbeddingMode::Dmet => {
            let opts = DmetOptions {
                exchange: spec.exchange_factor,
                fit_mu: spec.fit_mu,
                ..DmetOptions::default()
            };
            let emb = dmet_embed(
                m,
                &mf,
                &FragmentSpec::new(spec.fragment.clone(), "fragment"),
                &opts,
            )?;
            let eh = emb.hamiltonian;
            if eh.n_active_orbitals == spec.active_orbitals
                && eh.n_active_electrons == spec.active_electrons
            {
                Ok(eh)
            } else {
                cluster_reduce(
                    &eh,
                    &emb.fock_cluster,
                    spec.active_electrons,
                    spec.active_orbitals,
                )
            }
        }
    }
}

/// Two-orbital symmetric observable from `(O00, O11, O01)`.
pub fn two_orbital_observable(p: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[p[0], p[2], p[2], p[1]])
}

/// Selecting a one-body measurement by the validation error of a kernel
/// ridge model trained on the resulting fingerprints.
#[derive(Debug, Clone)]
pub struct MeasurementProblem {
    pub ids: Vec<String>,
    /// Per molecule, the real 1-RDM at each grid time.
    pub rdms: Vec<Vec<DMatrix<f64>>>,
    pub targets: Vec<f64>,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub length_scale: f64,
    pub ridge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementScore {
    pub validation_mse: f64,
    pub validation_r2: f64,
}

impl MeasurementProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ids: Vec<String>,
        rdms: Vec<Vec<DMatrix<f64>>>,
        targets: Vec<f64>,
        validation_fraction: f64,
        test_fraction: f64,
        seed: u64,
        length_scale: f64,
        ridge: f64,
    ) -> Result<Self> {
        if rdms.len() != ids.len() || targets.len() != ids.len() {
            return Err(Error::Dimension(
                "ids, trajectories and targets differ in length".into(),
            ));
        }
        let (train, validation, test) =
            holdout_split(&ids, validation_fraction, test_fraction, seed)?;
        if validation.is_empty() {
            return Err(Error::Dataset(
                "measurement optimization needs a validation set".into(),
            ));
        }
        Ok(Self {
            ids,
            rdms,
            targets,
            train,
            validation,
            test,
            length_scale,
            ridge,
        })
    }

    pub fn features(&self, o: &DMatrix<f64>) -> DMatrix<f64> {
        let rows: Vec<Vec<f64>> = self.rdms.iter().map(|r| observable_series(r, o)).collect();
        let cols = rows.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn score(&self, o: &DMatrix<f64>) -> Result<MeasurementScore> {
        let x = self.features(o);
        let y = DVector::from_vec(self.targets.clone());
        let model = krr_fit(
            &select_rows(&x, &self.train),
            &select_entries(&y, &self.train),
            self.length_scale,
            self.ridge,
        )?;
        let pred = krr_predict(&model, &select_rows(&x, &self.validation))?;
        let actual: Vec<f64> = self.validation.iter().map(|&i| self.targets[i]).collect();
        let pred: Vec<f64> = pred.iter().copied().collect();
        Ok(MeasurementScore {
            validation_mse: mse(&actual, &pred),
            validation_r2: r2_score(&actual, &pred).0,
        })
    }
}
