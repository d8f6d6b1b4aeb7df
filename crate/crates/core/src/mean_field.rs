//! Restricted Hartree-Fock via the Roothaan equations `F C = S C E`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chem_io::MolecularIntegrals;
use crate::error::{Error, Result};
use crate::linalg::{coulomb_exchange, inv_sqrt_spd, max_abs, sym_eigen};
use crate::scalar::Real;

/// Orbital-energy separation below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScfOptions<T> {
    pub max_iter: usize,
    pub tol: T,
    /// Fraction of the previous density mixed into the next one.
    pub damping: T,
}

impl<T: Real> Default for ScfOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: T::lit(1e-8),
            damping: T::zero(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeanFieldSolution<T> {
    /// AO → MO coefficients, one MO per column.
    pub coefficients: DMatrix<T>,
    /// Ascending.
    pub orbital_energies: DVector<T>,
    /// Spin-summed AO density, `2 C_occ C_occᵀ`.
    pub density: DMatrix<T>,
    pub fock: DMatrix<T>,
    pub e_total: T,
    pub converged: bool,
    pub n_iterations: usize,
    pub n_occupied: usize,
    /// Largest density change in the last iteration.
    pub residual: T,
    /// Total energy after every iteration, including the nuclear term.
    pub energy_history: Vec<T>,
}

impl<T: Real> MeanFieldSolution<T> {
    pub fn homo_lumo_gap(&self) -> Option<T> {
        let n = self.orbital_energies.len();
        (self.n_occupied > 0 && self.n_occupied < n).then(|| {
            self.orbital_energies[self.n_occupied] - self.orbital_energies[self.n_occupied - 1]
        })
    }

    /// Errors unless the SCF converged; downstream stages call this.
    pub fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged {
                iterations: self.n_iterations,
                residual: self.residual.to_f64_lossy(),
            })
        }
    }
}

/// Löwdin symmetric orthonormalization `X = S^{-1/2}`.
pub fn lowdin_orthonormalize<T: Real>(s: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !s.is_square() {
        return Err(Error::Dimension("overlap must be square".into()));
    }
    inv_sqrt_spd(s, T::lit(1e-10))
}

/// Closed-shell Fock matrix `F = h + J[D] - ½ K[D]` for a spin-summed density.
pub fn fock_build<T: Real>(d: &DMatrix<T>, m: &MolecularIntegrals<T>) -> Result<DMatrix<T>> {
    let n = m.n_orbitals;
    if d.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "density is {:?}, integrals have {n} orbitals",
            d.shape()
        )));
    }
    let (j, k) = coulomb_exchange(d, &m.eri);
    Ok(&m.h_core + j - k * T::lit(0.5))
}

fn electronic_energy<T: Real>(d: &DMatrix<T>, h: &DMatrix<T>, f: &DMatrix<T>) -> T {
    d.component_mul(&(h + f)).sum() * T::lit(0.5)
}

/// Solves `F C = S C E` for a fixed Fock matrix through the orthogonalizer `x`.
fn roothaan_diagonalize<T: Real>(f: &DMatrix<T>, x: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let fp = x.transpose() * f * x;
    let (eps, cp) = sym_eigen(&fp);
    (eps, x * cp)
}

fn density_from<T: Real>(c: &DMatrix<T>, n_occ: usize) -> DMatrix<T> {
    let occ = c.columns(0, n_occ);
    occ * occ.transpose() * T::lit(2.0)
}

/// Damped fixed-point RHF iteration from the core-Hamiltonian guess.
///
/// A run that exhausts `max_iter` still returns its last iterate with
/// `converged = false`.
pub fn scf_solve<T: Real>(
    m: &MolecularIntegrals<T>,
    opts: &ScfOptions<T>,
) -> Result<MeanFieldSolution<T>> {
    m.validate()?;
    if !(opts.damping >= T::zero() && opts.damping < T::one()) {
        return Err(Error::invalid("damping must lie in [0, 1)"));
    }
    let n = m.n_orbitals;
    let n_occ = m.n_electrons / 2;
    if n_occ == 0 || n_occ > n {
        return Err(Error::invalid(format!(
            "{} electrons do not fit in {n} orbitals",
            m.n_electrons
        )));
    }
    let x = lowdin_orthonormalize(&m.overlap)?;

    let (_, c0) = roothaan_diagonalize(&m.h_core, &x);
    let mut d = density_from(&c0, n_occ);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = T::lit(f64::INFINITY);

    for it in 1..=opts.max_iter {
        iterations = it;
        let f = fock_build(&d, m)?;
        history.push(electronic_energy(&d, &m.h_core, &f) + m.e_nuclear);
        let (_, c) = roothaan_diagonalize(&f, &x);
        let d_new = density_from(&c, n_occ);
        let delta = max_abs(&(&d_new - &d));
        residual = delta;
        if delta < opts.tol {
            d = d_new;
            converged = true;
            break;
        }
        d = &d_new * (T::one() - opts.damping) + &d * opts.damping;
    }

    // C from the last Fock matrix, then D and F rebuilt so D = 2 C_occ C_occᵀ holds exactly
    let (eps, c) = roothaan_diagonalize(&fock_build(&d, m)?, &x);
    let d = density_from(&c, n_occ);
    let f = fock_build(&d, m)?;
    let e_total = electronic_energy(&d, &m.h_core, &f) + m.e_nuclear;
    if converged && n_occ < n {
        let (homo, lumo) = (eps[n_occ - 1], eps[n_occ]);
        if lumo - homo < T::lit(DEGENERACY_TOL) {
            return Err(Error::Degenerate {
                location: "Fermi level".into(),
                lower: homo.to_f64_lossy(),
                upper: lumo.to_f64_lossy(),
            });
        }
    }
    if !converged {
        log::warn!("SCF not converged after {iterations} iterations");
    }
    Ok(MeanFieldSolution {
        coefficients: c,
        orbital_energies: eps,
        density: d,
        fock: f,
        e_total,
        converged,
        n_iterations: iterations,
        n_occupied: n_occ,
        residual,
        energy_history: history,
    })
}

/// Converged RHF from `opts`, retrying with heavier damping when the
/// undamped iteration oscillates.
pub fn scf_converged<T: Real>(
    m: &MolecularIntegrals<T>,
    opts: &ScfOptions<T>,
) -> Result<MeanFieldSolution<T>> {
    let mut last = None;
    for damping in [opts.damping, T::lit(0.5), T::lit(0.8)] {
        if damping < opts.damping {
            continue;
        }
        let sol = scf_solve(m, &ScfOptions { damping, ..*opts })?;
        if sol.converged {
            return Ok(sol);
        }
        log::debug!("SCF retry with damping {damping}");
        last = Some(sol);
    }
    let sol = last.expect("at least one attempt");
    sol.require_converged()?;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem_io::{hydrogen_chain, s_orbital_integrals};
    use crate::linalg::EriTensor;

    fn one_orbital() -> MolecularIntegrals<f64> {
        let mut eri = EriTensor::zeros(1);
        eri.set(0, 0, 0, 0, 0.5);
        MolecularIntegrals::orthonormal(2, DMatrix::from_element(1, 1, -1.0), eri, 0.7)
    }

    #[test]
    fn lowdin_examples() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!(max_abs(&(lowdin_orthonormalize(&i).unwrap() - &i)) < 1e-14);

        let d = DMatrix::from_diagonal(&DVector::<f64>::from_vec(vec![4.0, 1.0]));
        let x = lowdin_orthonormalize(&d).unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-14 && (x[(1, 1)] - 1.0).abs() < 1e-14);
        assert!(x[(0, 1)].abs() < 1e-14);

        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let x = lowdin_orthonormalize(&s).unwrap();
        assert!(max_abs(&(x.transpose() * &s * &x - DMatrix::identity(2, 2))) < 1e-12);
        assert!(max_abs(&(&x - x.transpose())) < 1e-14);
    }

    #[test]
    fn lowdin_rejects_linear_dependence() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0 - 1e-12, 1.0 - 1e-12, 1.0]);
        assert!(matches!(
            lowdin_orthonormalize(&s),
            Err(Error::LinearDependence { .. })
        ));
    }

    #[test]
    fn fock_examples() {
        let m = one_orbital();
        let f0 = fock_build(&DMatrix::zeros(1, 1), &m).unwrap();
        assert_eq!(f0, m.h_core);
        let f = fock_build(&DMatrix::from_element(1, 1, 2.0), &m).unwrap();
        assert!((f[(0, 0)] - (-1.0 + 0.5)).abs() < 1e-15);
        assert!(fock_build(&DMatrix::zeros(2, 2), &m).is_err());
    }

    #[test]
    fn one_orbital_energy_closed_form() {
        let sol = scf_solve(&one_orbital(), &ScfOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.e_total - (-0.8)).abs() < 1e-14);
    }

    #[test]
    fn h2_energy_and_frontier_signs() {
        let m = s_orbital_integrals(&hydrogen_chain::<f64>(2, &[1.4])).unwrap();
        let sol = scf_solve(&m, &ScfOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.e_total + 1.1167).abs() < 2e-3, "{}", sol.e_total);
        assert!(sol.orbital_energies[0] < 0.0 && sol.orbital_energies[1] > 0.0);
        // Fock matrix of the converged density reproduces the orbital energies
        let f = fock_build(&sol.density, &m).unwrap();
        let resid = &f * &sol.coefficients
            - &m.overlap * &sol.coefficients * DMatrix::from_diagonal(&sol.orbital_energies);
        assert!(max_abs(&resid) < 1e-8);
    }

    #[test]
    fn odd_electrons_rejected() {
        let mut m = one_orbital();
        m.n_electrons = 1;
        assert!(scf_solve(&m, &ScfOptions::default()).is_err());
    }

    #[test]
    fn exhausted_iterations_flagged() {
        let m = s_orbital_integrals(&hydrogen_chain::<f64>(4, &[1.4])).unwrap();
        let sol = scf_solve(
            &m,
            &ScfOptions {
                max_iter: 1,
                tol: 1e-14,
                damping: 0.0,
            },
        )
        .unwrap();
        assert!(!sol.converged);
        assert!(sol.require_converged().is_err());
    }
}
