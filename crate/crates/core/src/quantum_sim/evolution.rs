//! Initial-state preparation, exact propagation and Trotter circuits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::gates::{Gate, GateSequence};
use super::pauli::PauliHamiltonian;
use super::statevector::Statevector;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::scalar::Real;

/// Register size above which dense propagation is refused.
pub const MAX_EXACT_QUBITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Lowest `n_electrons` spin orbitals occupied.
    HfGround,
    /// HF with the HOMO α/β pair promoted to the LUMO.
    HomoLumoExcited,
    /// `Ry(π/2)` on every qubit.
    HalfOccupied,
}

/// Gate preparation from `|0...0>` and the resulting state.
pub fn prepare_initial<T: Real>(
    kind: InitialState,
    n_qubits: usize,
    n_electrons: usize,
) -> Result<(GateSequence<T>, Statevector<T>)> {
    if n_qubits % 2 != 0 {
        return Err(Error::invalid(format!(
            "{n_qubits} qubits do not pair into spatial orbitals"
        )));
    }
    let mut gs = GateSequence::new(n_qubits);
    match kind {
        InitialState::HfGround | InitialState::HomoLumoExcited => {
            if n_electrons == 0 || n_electrons % 2 != 0 || n_electrons > n_qubits {
                return Err(Error::invalid(format!(
                    "{n_electrons} electrons on {n_qubits} qubits"
                )));
            }
            let mut occ: Vec<usize> = (0..n_electrons).collect();
            if kind == InitialState::HomoLumoExcited {
                if n_electrons == n_qubits {
                    return Err(Error::invalid("no LUMO available for the excitation"));
                }
                let (h, l) = (n_electrons / 2 - 1, n_electrons / 2);
                occ.retain(|&q| q / 2 != h);
                occ.extend([2 * l, 2 * l + 1]);
            }
            for q in occ {
                gs.push(Gate::X(q));
            }
        }
        InitialState::HalfOccupied => {
            let angle = T::frac_pi_2();
            for q in 0..n_qubits {
                gs.push(Gate::Ry(angle, q));
            }
        }
    }
    let psi0 = Statevector::zero_state(n_qubits)?;
    let psi = super::gates::run_sequence(&gs, &psi0)?;
    Ok((gs, psi))
}

struct Block<T: Real> {
    indices: Vec<usize>,
    eigenvalues: DVector<T>,
    vectors: DMatrix<Complex<T>>,
}

/// Reusable `exp(-iHt)` built from an eigendecomposition of the dense
/// Hamiltonian. Particle-number blocks are diagonalized separately when
/// `H` conserves the excitation count, which it does for any fermionic
/// Hamiltonian mapped this way.
pub struct ExactPropagator<T: Real> {
    pub n_qubits: usize,
    blocks: Vec<Block<T>>,
}

impl<T: Real> ExactPropagator<T> {
    pub fn new(h: &PauliHamiltonian<T>) -> Result<Self> {
        let nq = h.n_qubits;
        if nq > MAX_EXACT_QUBITS {
            return Err(Error::invalid(format!(
                "exact evolution is limited to {MAX_EXACT_QUBITS} qubits, got {nq}"
            )));
        }
        let dim = 1usize << nq;
        let zero = Complex::new(T::zero(), T::zero());
        let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); nq + 1];
        for b in 0..dim {
            sectors[b.count_ones() as usize].push(b);
        }
        let mut pos = vec![0usize; dim];
        for s in &sectors {
            for (i, &b) in s.iter().enumerate() {
                pos[b] = i;
            }
        }
        // column-by-column build; leaks out of a weight sector break the split
        let mut mats: Vec<DMatrix<Complex<T>>> = sectors
            .iter()
            .map(|s| DMatrix::from_element(s.len(), s.len(), zero))
            .collect();
        let mut col = vec![zero; dim];
        let mut touched = Vec::new();
        let mut leak = T::zero();
        for b in 0..dim {
            for (c, p) in &h.terms {
                let (ph, bp) = p.apply_basis::<T>(b);
                if col[bp] == zero {
                    touched.push(bp);
                }
                col[bp] += ph * *c;
            }
            let w = b.count_ones() as usize;
            for &bp in &touched {
                let v = col[bp];
                if bp.count_ones() as usize == w {
                    mats[w][(pos[bp], pos[b])] += v;
                } else {
                    leak = leak.max(crate::scalar::cabs(v));
                }
                col[bp] = zero;
            }
            touched.clear();
        }
        let real = h.is_real();
        let blocks = if leak <= T::lit(1e-12) {
            sectors
                .into_iter()
                .zip(mats)
                .filter(|(s, _)| !s.is_empty())
                .map(|(s, m)| Self::diagonalize(s, m, real))
                .collect()
        } else {
            vec![Self::diagonalize((0..dim).collect(), h.to_dense(), real)]
        };
        Ok(Self {
            n_qubits: nq,
            blocks,
        })
    }

    fn diagonalize(indices: Vec<usize>, m: DMatrix<Complex<T>>, real: bool) -> Block<T> {
        let m = (&m + m.adjoint()) * Complex::new(T::lit(0.5), T::zero());
        if real {
            let (w, v) = sym_eigen(&m.map(|c| c.re));
            Block {
                indices,
                eigenvalues: w,
                vectors: v.map(|x| Complex::new(x, T::zero())),
            }
        } else {
            let eig = m.symmetric_eigen();
            Block {
                indices,
                eigenvalues: eig.eigenvalues,
                vectors: eig.eigenvectors,
            }
        }
    }

    /// All eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<T> {
        let mut all: Vec<T> = self
            .blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all
    }

    pub fn evolve(&self, psi0: &Statevector<T>, t: T) -> Result<Statevector<T>> {
        if psi0.n_qubits != self.n_qubits {
            return Err(Error::Dimension(format!(
                "propagator on {} qubits, state on {}",
                self.n_qubits, psi0.n_qubits
            )));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; psi0.dim()];
        for blk in &self.blocks {
            let sub = DVector::from_iterator(
                blk.indices.len(),
                blk.indices.iter().map(|&b| psi0.amps[b]),
            );
            if sub.iter().all(|c| *c == zero) {
                continue;
            }
            let mut coef = blk.vectors.adjoint() * sub;
            for (k, c) in coef.iter_mut().enumerate() {
                *c *= crate::scalar::cis(-blk.eigenvalues[k] * t);
            }
            let res = &blk.vectors * coef;
            for (i, &b) in blk.indices.iter().enumerate() {
                out[b] = res[i];
            }
        }
        Statevector::from_amplitudes(self.n_qubits, out)
    }
}

/// `exp(-iHt)|psi0>` by dense diagonalization.
pub fn evolve_exact<T: Real>(
    h: &PauliHamiltonian<T>,
    t: T,
    psi0: &Statevector<T>,
) -> Result<Statevector<T>> {
    ExactPropagator::new(h)?.evolve(psi0, t)
}

/// Order in which a product formula visits the Hamiltonian terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrder {
    /// The Hamiltonian's canonical (lexicographic) order.
    #[default]
    Lexicographic,
    /// Grouped by X mask (ascending), canonical order inside a group. The
    /// terms of one group commute for a real Hamiltonian and their sum maps
    /// `|b>` only to `|b ^ mask>`, so each group exponential commutes with
    /// `N` and the circuit conserves particle number exactly. Single JW
    /// terms such as `XZX` do not, which is why the lexicographic order can
    /// leak weight between number sectors.
    FlipGrouped,
}

impl TermOrder {
    /// Indices into `h.terms` in visiting order.
    pub fn permutation<T: Real>(self, h: &PauliHamiltonian<T>) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..h.terms.len()).collect();
        if self == TermOrder::FlipGrouped {
            perm.sort_by_key(|&i| h.terms[i].1.x);
        }
        perm
    }
}

/// Product-formula circuit for `exp(-iHt)` with `r` steps.
///
/// Order 1 applies each non-identity term once per step in the Hamiltonian's
/// canonical order; order 2 applies the half-step product forward then
/// backward. The identity coefficient becomes the sequence's global phase.
pub fn trotter_sequence<T: Real>(
    h: &PauliHamiltonian<T>,
    t: T,
    order: u32,
    r: usize,
) -> Result<GateSequence<T>> {
    trotter_sequence_ordered(h, t, order, r, &TermOrder::Lexicographic.permutation(h))
}

/// As [`trotter_sequence`], with terms visited in the order `perm`
/// (indices into `h.terms`).
pub fn trotter_sequence_ordered<T: Real>(
    h: &PauliHamiltonian<T>,
    t: T,
    order: u32,
    r: usize,
    perm: &[usize],
) -> Result<GateSequence<T>> {
    if r == 0 {
        return Err(Error::invalid("Trotter step count must be positive"));
    }
    if order != 1 && order != 2 {
        return Err(Error::invalid(format!(
            "Trotter order {order} is not 1 or 2"
        )));
    }
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..h.terms.len()).collect::<Vec<_>>() {
        return Err(Error::invalid(
            "term order is not a permutation of the Hamiltonian terms",
        ));
    }
    let terms: Vec<_> = perm
        .iter()
        .map(|&i| h.terms[i])
        .filter(|(_, p)| !p.is_identity())
        .collect();
    let mut gs = GateSequence::new(h.n_qubits);
    gs.global_phase = -h.identity_coefficient() * t;
    let dt = t / crate::scalar::usize_to::<T>(r);
    let two = T::lit(2.0);
    for _ in 0..r {
        if order == 1 {
            for (c, p) in &terms {
                gs.push(Gate::PauliRotation(two * *c * dt, *p));
            }
        } else {
            for (c, p) in terms.iter().chain(terms.iter().rev()) {
                gs.push(Gate::PauliRotation(*c * dt, *p));
            }
        }
    }
    Ok(gs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_sim::gates::run_sequence;
    use crate::quantum_sim::pauli::PauliString;

    #[test]
    fn initial_bitstrings() {
        let (_, hf) = prepare_initial::<f64>(InitialState::HfGround, 8, 4).unwrap();
        assert_eq!(hf.bitstring(0b1111), "00001111");
        assert!((hf.amps[0b1111].re - 1.0).abs() < 1e-15);
        let (_, ex) = prepare_initial::<f64>(InitialState::HomoLumoExcited, 8, 4).unwrap();
        assert!((ex.amps[0b0011_0011].re - 1.0).abs() < 1e-15);
        let (_, half) = prepare_initial::<f64>(InitialState::HalfOccupied, 4, 2).unwrap();
        for a in &half.amps {
            assert!((a.re - 0.25).abs() < 1e-15);
        }
        assert!(prepare_initial::<f64>(InitialState::HomoLumoExcited, 4, 4).is_err());
    }

    #[test]
    fn single_term_trotter_is_exact() {
        let h = PauliHamiltonian::new(
            2,
            vec![
                (0.3, PauliString::IDENTITY),
                (0.7, PauliString::parse("XY").unwrap()),
            ],
        );
        let psi0 = Statevector::<f64>::basis(2, 1).unwrap();
        let exact = evolve_exact(&h, 1.9, &psi0).unwrap();
        let gs = trotter_sequence(&h, 1.9, 1, 1).unwrap();
        let tr = run_sequence(&gs, &psi0).unwrap();
        assert!(tr.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn propagator_is_unitary_and_rejects_large_registers() {
        let h = PauliHamiltonian::new(
            3,
            vec![
                (0.5, PauliString::parse("XXI").unwrap()),
                (-0.2, PauliString::parse("ZIZ").unwrap()),
                (0.1, PauliString::parse("IYX").unwrap()),
            ],
        );
        let mut psi0 = Statevector::<f64>::zero_state(3).unwrap();
        psi0.apply_ry(0.3, 1).unwrap();
        let u = ExactPropagator::new(&h).unwrap();
        let psi = u.evolve(&psi0, 2.5).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        let big = PauliHamiltonian::<f64>::new(17, vec![(1.0, PauliString::z_on(0))]);
        assert!(ExactPropagator::new(&big).is_err());
    }
}
