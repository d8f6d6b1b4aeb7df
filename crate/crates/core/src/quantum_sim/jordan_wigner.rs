//! Jordan-Wigner encoding of second-quantized operators.
//!
//! Spin orbital `2p + σ` (σ = 0 for α, 1 for β) maps to qubit `2p + σ`, and
//! `a_j = Z_0 ... Z_{j-1} (X_j + i Y_j) / 2`, with `|1>` meaning occupied.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::pauli::{PauliAccumulator, PauliHamiltonian, PauliString};
use crate::embedding::EmbeddedHamiltonian;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coefficients below this magnitude are dropped after merging.
pub const DROP_TOL: f64 = 1e-14;

fn ladder<T: Real>(j: usize, creation: bool) -> Vec<(Complex<T>, PauliString)> {
    let zmask = (1u64 << j) - 1;
    let half = T::lit(0.5);
    let x = PauliString {
        x: 1 << j,
        z: zmask,
    };
    let y = PauliString {
        x: 1 << j,
        z: zmask | (1 << j),
    };
    let iy = if creation { -half } else { half };
    vec![
        (Complex::new(half, T::zero()), x),
        (Complex::new(T::zero(), iy), y),
    ]
}

fn one_body_into<T: Real>(acc: &mut PauliAccumulator<T>, m: &DMatrix<T>, transpose: bool) {
    let n = m.nrows();
    for p in 0..n {
        for q in 0..n {
            let v = if transpose { m[(q, p)] } else { m[(p, q)] };
            if v == T::zero() {
                continue;
            }
            for sigma in 0..2 {
                acc.add_product(
                    &[ladder(2 * p + sigma, true), ladder(2 * q + sigma, false)],
                    Complex::new(v, T::zero()),
                );
            }
        }
    }
}

/// Qubit Hamiltonian on `2 * n_active_orbitals` qubits, including `e_core`
/// as the identity coefficient. The chemical-potential shift is already in
/// `h_eff` and is not added again.
pub fn jordan_wigner<T: Real>(eh: &EmbeddedHamiltonian<T>) -> Result<PauliHamiltonian<T>> {
    eh.validate()?;
    let n = eh.n_active_orbitals;
    let nq = 2 * n;
    if nq > 64 {
        return Err(Error::invalid(format!(
            "{nq} qubits exceed the 64-qubit string width"
        )));
    }
    let mut acc = PauliAccumulator::new();
    acc.add(PauliString::IDENTITY, Complex::new(eh.e_core, T::zero()));
    one_body_into(&mut acc, &eh.h_eff, false);
    let half = T::lit(0.5);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = eh.eri_active.get(p, q, r, s);
                    if v == T::zero() {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (ps, qs, rt, st) =
                                (2 * p + sigma, 2 * q + sigma, 2 * r + tau, 2 * s + tau);
                            if ps == rt || qs == st {
                                continue;
                            }
                            acc.add_product(
                                &[
                                    ladder(ps, true),
                                    ladder(rt, true),
                                    ladder(st, false),
                                    ladder(qs, false),
                                ],
                                Complex::new(v * half, T::zero()),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(acc.into_hamiltonian(nq, T::lit(DROP_TOL)))
}

/// Qubit form of the spin-summed one-body operator `sum_rs O_rs sum_σ a†_sσ a_rσ`,
/// whose expectation is `sum_rs O_rs rho_rs`.
pub fn one_body_observable<T: Real>(o: &DMatrix<T>) -> Result<PauliHamiltonian<T>> {
    let n = o.nrows();
    if o.ncols() != n {
        return Err(Error::Dimension(format!(
            "observable is {}x{}",
            n,
            o.ncols()
        )));
    }
    if 2 * n > 64 {
        return Err(Error::invalid(
            "observable exceeds the 64-qubit string width",
        ));
    }
    let mut acc = PauliAccumulator::new();
    one_body_into(&mut acc, o, true);
    Ok(acc.into_hamiltonian(2 * n, T::lit(DROP_TOL)))
}

/// Total number operator on `n_qubits` spin orbitals.
pub fn number_operator<T: Real>(n_qubits: usize) -> PauliHamiltonian<T> {
    let half = T::lit(0.5);
    let mut terms = vec![(
        half * crate::scalar::usize_to::<T>(n_qubits),
        PauliString::IDENTITY,
    )];
    for q in 0..n_qubits {
        terms.push((-half, PauliString::z_on(q)));
    }
    PauliHamiltonian::new(n_qubits, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_sim::pauli::PauliString;

    #[test]
    fn number_operator_of_single_mode() {
        // a†_0 a_0 = (I - Z_0) / 2
        let o = DMatrix::from_element(1, 1, 1.0);
        let h = one_body_observable(&o).unwrap();
        assert_eq!(h.coefficient(&PauliString::IDENTITY), 1.0);
        assert_eq!(h.coefficient(&PauliString::z_on(0)), -0.5);
        assert_eq!(h.coefficient(&PauliString::z_on(1)), -0.5);
        assert_eq!(h.terms.len(), 3);
    }

    #[test]
    fn hopping_term_strings() {
        // a†_0a_1 + a†_1a_0 between spatial orbitals 0 and 1, α only: ½(X0 Z? ...)
        let o = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let h = one_body_observable(&o).unwrap();
        // α: qubits 0 and 2 with Z on qubit 1 in between
        let xzx = PauliString::parse("XZX").unwrap();
        let yzy = PauliString::parse("YZY").unwrap();
        assert!((h.coefficient(&xzx) - 0.5f64).abs() < 1e-15);
        assert!((h.coefficient(&yzy) - 0.5f64).abs() < 1e-15);
    }
}
