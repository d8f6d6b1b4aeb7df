use nalgebra::DMatrix;

use super::{check_gap, freeze_orbitals, EmbeddedHamiltonian, ExchangeFactor, Provenance};
use crate::chem_io::MolecularIntegrals;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::mean_field::MeanFieldSolution;
use crate::scalar::Real;

struct Window {
    n_frozen: usize,
    n_active: usize,
}

fn window(
    n_orbitals: usize,
    n_occupied: usize,
    n_elec_act: usize,
    n_orb_act: usize,
) -> Result<Window> {
    if n_elec_act % 2 != 0 {
        return Err(Error::invalid(format!(
            "active electron count {n_elec_act} must be even"
        )));
    }
    let occ_act = n_elec_act / 2;
    if occ_act > n_occupied {
        return Err(Error::invalid(format!(
            "{n_elec_act} active electrons exceed the {} available",
            2 * n_occupied
        )));
    }
    if n_orb_act < occ_act || n_orb_act - occ_act > n_orbitals - n_occupied {
        return Err(Error::invalid(format!(
            "({n_elec_act}e, {n_orb_act}o) window does not fit {n_occupied} occupied / {} virtual orbitals",
            n_orbitals - n_occupied
        )));
    }
    Ok(Window {
        n_frozen: n_occupied - occ_act,
        n_active: n_orb_act,
    })
}

/// Active space centred on the Fermi level of a converged RHF solution:
/// lower occupied MOs are frozen, high virtuals discarded.
pub fn homo_lumo_active_space<T: Real>(
    m: &MolecularIntegrals<T>,
    mf: &MeanFieldSolution<T>,
    n_elec_act: usize,
    n_orb_act: usize,
) -> Result<EmbeddedHamiltonian<T>> {
    mf.require_converged()?;
    let n = m.n_orbitals;
    let w = window(n, mf.n_occupied, n_elec_act, n_orb_act)?;
    let eps = &mf.orbital_energies;
    check_gap(eps, w.n_frozen, "frozen-core edge of the active window")?;
    check_gap(
        eps,
        w.n_frozen + w.n_active,
        "virtual edge of the active window",
    )?;

    let c = &mf.coefficients;
    let occ = c.columns(0, w.n_frozen).into_owned();
    let act = c.columns(w.n_frozen, w.n_active).into_owned();
    let d_frozen = &occ * occ.transpose() * T::lit(2.0);
    let (h_eff, eri_active, e_core) = freeze_orbitals(
        &m.h_core,
        &m.eri,
        m.e_nuclear,
        &d_frozen,
        &act,
        ExchangeFactor::Half,
    );
    let eh = EmbeddedHamiltonian {
        n_active_orbitals: w.n_active,
        n_active_electrons: n_elec_act,
        h_eff,
        eri_active,
        e_core,
        mu: T::zero(),
        fragment_mask: vec![false; w.n_active],
        provenance: Provenance::ActiveSpace,
        orbital_energies: Some(eps.rows(w.n_frozen, w.n_active).into_owned()),
    };
    eh.validate()?;
    Ok(eh)
}

/// Rotates a cluster Hamiltonian into the eigenbasis of the projected
/// mean-field Fock matrix and applies the same HOMO-LUMO freezing inside it.
pub fn cluster_reduce<T: Real>(
    eh: &EmbeddedHamiltonian<T>,
    fock_cluster: &DMatrix<T>,
    n_elec_act: usize,
    n_orb_act: usize,
) -> Result<EmbeddedHamiltonian<T>> {
    let n = eh.n_active_orbitals;
    if fock_cluster.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "cluster Fock is {:?}, cluster has {n} orbitals",
            fock_cluster.shape()
        )));
    }
    let n_occ = eh.n_active_electrons / 2;
    let w = window(n, n_occ, n_elec_act, n_orb_act)?;
    let (eps, v) = sym_eigen(fock_cluster);
    check_gap(&eps, w.n_frozen, "frozen-core edge of the cluster window")?;
    check_gap(
        &eps,
        w.n_frozen + w.n_active,
        "virtual edge of the cluster window",
    )?;

    let occ = v.columns(0, w.n_frozen).into_owned();
    let act = v.columns(w.n_frozen, w.n_active).into_owned();
    let d_frozen = &occ * occ.transpose() * T::lit(2.0);
    let (h_eff, eri_active, e_core) = freeze_orbitals(
        &eh.h_eff,
        &eh.eri_active,
        eh.e_core,
        &d_frozen,
        &act,
        ExchangeFactor::Half,
    );
    let out = EmbeddedHamiltonian {
        n_active_orbitals: w.n_active,
        n_active_electrons: n_elec_act,
        h_eff,
        eri_active,
        e_core,
        mu: eh.mu,
        fragment_mask: vec![false; w.n_active],
        provenance: Provenance::ClusterReduced,
        orbital_energies: Some(eps.rows(w.n_frozen, w.n_active).into_owned()),
    };
    out.validate()?;
    Ok(out)
}
