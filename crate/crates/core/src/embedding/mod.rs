//! Embedded fragment Hamiltonians: HOMO-LUMO active spaces, DMET
//! fragment+bath clusters, and active-space reduction inside a cluster.

mod active_space;
mod dmet;

pub use active_space::{cluster_reduce, homo_lumo_active_space};
pub use dmet::{
    dmet_cluster_basis, dmet_embed, dmet_hamiltonian, fit_chemical_potential, fragment_filling,
    ClusterBasis, DmetEmbedding, DmetOptions, MuFit, DEFAULT_BATH_TOL,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chem_io::MolecularIntegrals;
use crate::error::{Error, Result};
use crate::fci::{self, DeterminantBasis};
use crate::linalg::{coulomb_exchange, is_symmetric, EriTensor};
use crate::mean_field::{scf_converged, ScfOptions};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ActiveSpace,
    Dmet,
    ClusterReduced,
}

/// Prefactor of the exchange term in the frozen-density potential `J - x K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeFactor {
    #[default]
    Half,
    Full,
}

impl ExchangeFactor {
    pub fn value<T: Real>(self) -> T {
        match self {
            ExchangeFactor::Half => T::lit(0.5),
            ExchangeFactor::Full => T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentSpec {
    /// Indices into the localized orbital basis.
    pub orbitals: Vec<usize>,
    pub label: String,
}

impl FragmentSpec {
    pub fn new(orbitals: Vec<usize>, label: impl Into<String>) -> Self {
        Self {
            orbitals,
            label: label.into(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.orbitals.is_empty() {
            return Err(Error::invalid("fragment has no orbitals"));
        }
        let mut seen = vec![false; n];
        for &i in &self.orbitals {
            if i >= n {
                return Err(Error::invalid(format!(
                    "fragment orbital {i} out of range 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("fragment orbital {i} listed twice")));
            }
        }
        Ok(())
    }
}

/// Effective Hamiltonian over an active orbital set:
/// `sum h_eff a†a + ½ sum (pq|rs) a†a†aa + e_core`, with any DMET
/// chemical-potential shift already folded into `h_eff`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedHamiltonian<T> {
    pub n_active_orbitals: usize,
    pub n_active_electrons: usize,
    pub h_eff: DMatrix<T>,
    pub eri_active: EriTensor<T>,
    pub e_core: T,
    pub mu: T,
    /// Active orbitals that carry the `-mu` shift.
    pub fragment_mask: Vec<bool>,
    pub provenance: Provenance,
    /// Mean-field orbital energies of the active orbitals, when the basis is
    /// an energy-ordered canonical one.
    pub orbital_energies: Option<DVector<T>>,
}

impl<T: Real> EmbeddedHamiltonian<T> {
    pub fn validate(&self) -> Result<()> {
        let n = self.n_active_orbitals;
        if self.h_eff.shape() != (n, n)
            || self.eri_active.dim() != n
            || self.fragment_mask.len() != n
        {
            return Err(Error::Dimension(format!(
                "embedded Hamiltonian blocks disagree with {n} orbitals"
            )));
        }
        if !is_symmetric(&self.h_eff, T::lit(1e-10)) {
            return Err(Error::invalid("h_eff is not symmetric"));
        }
        if self.eri_active.symmetry_defect() > T::lit(1e-10) {
            return Err(Error::invalid("active ERIs violate 8-fold symmetry"));
        }
        if self.n_active_electrons % 2 != 0 || self.n_active_electrons > 2 * n {
            return Err(Error::invalid(format!(
                "{} active electrons in {n} orbitals",
                self.n_active_electrons
            )));
        }
        Ok(())
    }

    /// Wraps integrals of an orthonormal basis (e.g. an FCIDUMP) directly.
    pub fn from_integrals(m: &MolecularIntegrals<T>) -> Result<Self> {
        if !m.is_orthonormal(T::lit(1e-10)) {
            return Err(Error::invalid(
                "embedded Hamiltonians need an orthonormal basis",
            ));
        }
        let n = m.n_orbitals;
        let eh = Self {
            n_active_orbitals: n,
            n_active_electrons: m.n_electrons,
            h_eff: m.h_core.clone(),
            eri_active: m.eri.clone(),
            e_core: m.e_nuclear,
            mu: T::zero(),
            fragment_mask: vec![false; n],
            provenance: Provenance::ActiveSpace,
            orbital_energies: None,
        };
        eh.validate()?;
        Ok(eh)
    }

    /// Orthonormal-basis integrals with `e_core` in the constant slot.
    pub fn to_integrals(&self) -> MolecularIntegrals<T> {
        MolecularIntegrals::orthonormal(
            self.n_active_electrons,
            self.h_eff.clone(),
            self.eri_active.clone(),
            self.e_core,
        )
    }

    /// Determinant basis with equal α/β counts for the active electrons.
    pub fn singlet_sector(&self) -> DeterminantBasis {
        let half = self.n_active_electrons / 2;
        DeterminantBasis::spin_sector(self.n_active_orbitals, half, half)
    }

    /// FCI matrix (including `e_core`) over `basis`.
    pub fn fci_matrix(&self, basis: &DeterminantBasis) -> Result<DMatrix<T>> {
        fci::hamiltonian_matrix(&self.h_eff, &self.eri_active, self.e_core, basis)
    }

    /// Ground energy (including `e_core`) and state in the singlet sector.
    pub fn ground_state(&self) -> Result<(T, DVector<T>, DeterminantBasis)> {
        let basis = self.singlet_sector();
        let (e, v) = fci::ground_state(&self.h_eff, &self.eri_active, self.e_core, &basis)?;
        Ok((e, v, basis))
    }

    /// HOMO-LUMO gap of a restricted Hartree-Fock solution of this Hamiltonian.
    pub fn homo_lumo_gap(&self) -> Result<T> {
        let sol = scf_converged(&self.to_integrals(), &ScfOptions::default())?;
        sol.homo_lumo_gap()
            .ok_or_else(|| Error::invalid("no virtual orbital in the active space"))
    }
}

/// Freezes doubly occupied orbitals `occ` and projects onto `act`.
///
/// Both are column sets in the basis of `h`/`eri` (which need not be
/// orthonormal). Returns `(h_eff, eri_active, e_core)` with
/// `h_eff = actᵀ (h + J - xK) act` for the frozen density `D = 2 occ occᵀ`.
pub(crate) fn freeze_orbitals<T: Real>(
    h: &DMatrix<T>,
    eri: &EriTensor<T>,
    e_const: T,
    frozen_density: &DMatrix<T>,
    act: &DMatrix<T>,
    exchange: ExchangeFactor,
) -> (DMatrix<T>, EriTensor<T>, T) {
    let (j, k) = coulomb_exchange(frozen_density, eri);
    let g = j - k * exchange.value::<T>();
    let e_core = e_const + frozen_density.component_mul(&(h + &g * T::lit(0.5))).sum();
    let h_eff = act.transpose() * (h + g) * act;
    let h_eff = (&h_eff + h_eff.transpose()) * T::lit(0.5);
    (h_eff, eri.transform(act), e_core)
}

pub(crate) fn check_gap<T: Real>(eps: &DVector<T>, below: usize, location: &str) -> Result<()> {
    if below == 0 || below >= eps.len() {
        return Ok(());
    }
    let (lo, hi) = (eps[below - 1], eps[below]);
    if hi - lo < T::lit(crate::mean_field::DEGENERACY_TOL) {
        return Err(Error::Degenerate {
            location: location.into(),
            lower: lo.to_f64_lossy(),
            upper: hi.to_f64_lossy(),
        });
    }
    Ok(())
}
