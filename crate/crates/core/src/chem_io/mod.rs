//! Molecular integral data: the container type, FCIDUMP interchange,
//! analytic s-Gaussian integrals, and dataset/feature persistence.

mod fcidump;
mod gaussian;
mod manifest;

pub use fcidump::{emit_fcidump, parse_fcidump, read_fcidump, write_fcidump};
pub use gaussian::{
    hydrogen_chain, s_orbital_integrals, sto3g_hydrogen, Atom, GaussianGeometry, Primitive,
};
pub use manifest::{
    load_features, load_manifest, save_features, DatasetManifest, FeatureTable, ManifestEntry,
    MoleculeSource, MANIFEST_VERSION,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, max_abs, sym_eigen, EriTensor};
use crate::scalar::Real;

/// One- and two-electron integrals of a closed-shell molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals<T> {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub overlap: DMatrix<T>,
    /// Kinetic plus external potential, Hartree.
    pub h_core: DMatrix<T>,
    pub eri: EriTensor<T>,
    pub e_nuclear: T,
}

impl<T: Real> MolecularIntegrals<T> {
    /// Integrals in an orthonormal basis (`S = I`).
    pub fn orthonormal(
        n_electrons: usize,
        h_core: DMatrix<T>,
        eri: EriTensor<T>,
        e_nuclear: T,
    ) -> Self {
        let n = h_core.nrows();
        Self {
            n_orbitals: n,
            n_electrons,
            overlap: DMatrix::identity(n, n),
            h_core,
            eri,
            e_nuclear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_orbitals;
        if self.overlap.shape() != (n, n) || self.h_core.shape() != (n, n) || self.eri.dim() != n {
            return Err(Error::Dimension(format!(
                "integral blocks do not all have dimension {n}"
            )));
        }
        if self.n_electrons % 2 != 0 {
            return Err(Error::invalid(format!(
                "closed shell requires an even electron count, got {}",
                self.n_electrons
            )));
        }
        let finite = self
            .overlap
            .iter()
            .chain(self.h_core.iter())
            .all(|x| x.is_finite())
            && self.eri.is_finite()
            && self.e_nuclear.is_finite();
        if !finite {
            return Err(Error::invalid("non-finite integral"));
        }
        let tol = T::lit(1e-10);
        if !is_symmetric(&self.overlap, tol) || !is_symmetric(&self.h_core, tol) {
            return Err(Error::invalid(
                "overlap and core Hamiltonian must be symmetric",
            ));
        }
        if self.eri.symmetry_defect() > tol {
            return Err(Error::invalid(
                "two-electron integrals violate 8-fold symmetry",
            ));
        }
        if n > 0 {
            let (w, _) = sym_eigen(&self.overlap);
            if w[0] <= T::zero() {
                return Err(Error::LinearDependence {
                    min_eigenvalue: w[0].to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    pub fn is_orthonormal(&self, tol: T) -> bool {
        let n = self.n_orbitals;
        max_abs(&(&self.overlap - DMatrix::<T>::identity(n, n))) <= tol
    }

    /// Re-expresses the integrals in the basis whose functions are the
    /// columns of `c` (AO coefficients). The result has `S' = CᵀSC`.
    pub fn transform(&self, c: &DMatrix<T>) -> Self {
        let ct = c.transpose();
        Self {
            n_orbitals: c.ncols(),
            n_electrons: self.n_electrons,
            overlap: &ct * &self.overlap * c,
            h_core: &ct * &self.h_core * c,
            eri: self.eri.transform(c),
            e_nuclear: self.e_nuclear,
        }
    }

    /// Largest elementwise difference across all integral blocks.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.n_orbitals != other.n_orbitals {
            return T::max_value().unwrap_or_else(T::one);
        }
        max_abs(&(&self.overlap - &other.overlap))
            .max(max_abs(&(&self.h_core - &other.h_core)))
            .max(self.eri.max_abs_diff(&other.eri))
            .max((self.e_nuclear - other.e_nuclear).abs())
    }
}
