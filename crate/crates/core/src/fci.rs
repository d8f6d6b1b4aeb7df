//! Exact diagonalization in an explicit Slater-determinant basis.
//!
//! Determinants are bitmasks over spin orbitals using the interleaved
//! convention: bit `2p` is spatial orbital `p` spin-α, bit `2p + 1` spin-β.
//! Operators are applied with explicit fermionic sign counting, so this
//! route is independent of the Pauli-string machinery in `quantum_sim`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, EriTensor};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    pub n_spin_orbitals: usize,
    dets: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl DeterminantBasis {
    fn from_dets(n_spin_orbitals: usize, dets: Vec<u64>) -> Self {
        let index = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        Self {
            n_spin_orbitals,
            dets,
            index,
        }
    }

    /// Every occupation pattern, ordered by integer value (matches qubit order).
    pub fn fock_space(n_spin_orbitals: usize) -> Self {
        assert!(n_spin_orbitals < 31, "Fock space too large");
        Self::from_dets(n_spin_orbitals, (0..1u64 << n_spin_orbitals).collect())
    }

    pub fn number_sector(n_spin_orbitals: usize, n_electrons: usize) -> Self {
        assert!(n_spin_orbitals < 31, "Fock space too large");
        let dets = (0..1u64 << n_spin_orbitals)
            .filter(|d| d.count_ones() as usize == n_electrons)
            .collect();
        Self::from_dets(n_spin_orbitals, dets)
    }

    /// Determinants with fixed α and β counts over `n_spatial` orbitals.
    pub fn spin_sector(n_spatial: usize, n_alpha: usize, n_beta: usize) -> Self {
        let n = 2 * n_spatial;
        assert!(n < 31, "Fock space too large");
        let alpha_mask: u64 = (0..n_spatial).map(|p| 1u64 << (2 * p)).sum();
        let dets = (0..1u64 << n)
            .filter(|d| {
                (d & alpha_mask).count_ones() as usize == n_alpha
                    && (d & !alpha_mask).count_ones() as usize == n_beta
            })
            .collect();
        Self::from_dets(n, dets)
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn dets(&self) -> &[u64] {
        &self.dets
    }

    pub fn position(&self, det: u64) -> Option<usize> {
        self.index.get(&det).copied()
    }
}

#[inline]
fn parity_below(det: u64, k: usize) -> bool {
    (det & ((1u64 << k) - 1)).count_ones() % 2 == 1
}

/// `a_k |det>`; returns `(sign_negative, det')` or `None` when it vanishes.
#[inline]
fn annihilate(det: u64, k: usize) -> Option<(bool, u64)> {
    (det >> k & 1 == 1).then(|| (parity_below(det, k), det ^ (1u64 << k)))
}

#[inline]
fn create(det: u64, k: usize) -> Option<(bool, u64)> {
    (det >> k & 1 == 0).then(|| (parity_below(det, k), det | (1u64 << k)))
}

/// Applies `a†_{ops[0]} ... ` right-to-left: `ops` lists `(is_creation, spin_orbital)`
/// in operator-product order.
fn apply_string(det: u64, ops: &[(bool, usize)]) -> Option<(bool, u64)> {
    let mut neg = false;
    let mut d = det;
    for &(creation, k) in ops.iter().rev() {
        let (s, nd) = if creation {
            create(d, k)?
        } else {
            annihilate(d, k)?
        };
        neg ^= s;
        d = nd;
    }
    Some((neg, d))
}

/// Dense matrix of
/// `sum h_pq a†_pσ a_qσ + ½ sum (pq|rs) a†_pσ a†_rτ a_sτ a_qσ + e_const`
/// restricted to `basis`. Terms leaving the basis are dropped.
pub fn hamiltonian_matrix<T: Real>(
    h: &DMatrix<T>,
    eri: &EriTensor<T>,
    e_const: T,
    basis: &DeterminantBasis,
) -> Result<DMatrix<T>> {
    let n = h.nrows();
    if eri.dim() != n || basis.n_spin_orbitals != 2 * n {
        return Err(Error::Dimension(format!(
            "h is {n}x{n}, eri {} orbitals, basis {} spin orbitals",
            eri.dim(),
            basis.n_spin_orbitals
        )));
    }
    let dim = basis.len();
    let half = T::lit(0.5);
    let mut mat = DMatrix::zeros(dim, dim);
    for (col, &det) in basis.dets().iter().enumerate() {
        mat[(col, col)] += e_const;
        for p in 0..n {
            for q in 0..n {
                let v = h[(p, q)];
                if v == T::zero() {
                    continue;
                }
                for sigma in 0..2 {
                    if let Some((neg, d)) =
                        apply_string(det, &[(true, 2 * p + sigma), (false, 2 * q + sigma)])
                    {
                        if let Some(row) = basis.position(d) {
                            mat[(row, col)] += if neg { -v } else { v };
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = eri.get(p, q, r, s);
                        if v == T::zero() {
                            continue;
                        }
                        let v = v * half;
                        for sigma in 0..2 {
                            for tau in 0..2 {
                                let ops = [
                                    (true, 2 * p + sigma),
                                    (true, 2 * r + tau),
                                    (false, 2 * s + tau),
                                    (false, 2 * q + sigma),
                                ];
                                if let Some((neg, d)) = apply_string(det, &ops) {
                                    if let Some(row) = basis.position(d) {
                                        mat[(row, col)] += if neg { -v } else { v };
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(mat)
}

/// Lowest eigenpair within `basis`.
pub fn ground_state<T: Real>(
    h: &DMatrix<T>,
    eri: &EriTensor<T>,
    e_const: T,
    basis: &DeterminantBasis,
) -> Result<(T, DVector<T>)> {
    if basis.is_empty() {
        return Err(Error::invalid("empty determinant basis"));
    }
    let mat = hamiltonian_matrix(h, eri, e_const, basis)?;
    let (w, v) = sym_eigen(&mat);
    Ok((w[0], v.column(0).into_owned()))
}

/// Spin-summed spatial 1-RDM `rho_rs = sum_σ <a†_sσ a_rσ>` of a real state.
pub fn one_rdm<T: Real>(basis: &DeterminantBasis, state: &DVector<T>) -> DMatrix<T> {
    let n = basis.n_spin_orbitals / 2;
    let mut rho = DMatrix::zeros(n, n);
    for (col, &det) in basis.dets().iter().enumerate() {
        let c = state[col];
        if c == T::zero() {
            continue;
        }
        for r in 0..n {
            for s in 0..n {
                for sigma in 0..2 {
                    if let Some((neg, d)) =
                        apply_string(det, &[(true, 2 * s + sigma), (false, 2 * r + sigma)])
                    {
                        if let Some(row) = basis.position(d) {
                            let v = state[row] * c;
                            rho[(r, s)] += if neg { -v } else { v };
                        }
                    }
                }
            }
        }
    }
    rho
}
