use num_complex::Complex;

use super::pauli::{PauliHamiltonian, PauliString};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest register handled by the dense simulator.
pub const MAX_QUBITS: usize = 26;

/// Dense amplitudes indexed by the integer whose bit `k` is qubit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T> {
    pub n_qubits: usize,
    pub amps: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "{n_qubits} qubits exceed the {MAX_QUBITS}-qubit limit"
            )));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, amps })
    }

    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |a, c| a + c.norm_sqr())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector<T>) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |a, (x, y)| {
                a + x.conj() * y
            })
    }

    pub fn fidelity(&self, other: &Statevector<T>) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn max_abs_diff(&self, other: &Statevector<T>) -> T {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(T::zero(), |a, (x, y)| a.max(crate::scalar::cabs(x - y)))
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::invalid(format!(
                "qubit {q} outside a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for b in 0..self.dim() {
            if b & bit == 0 {
                self.amps.swap(b, b | bit);
            }
        }
        Ok(())
    }

    /// `Ry(θ) = exp(-iθY/2)`.
    pub fn apply_ry(&mut self, theta: T, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let half = theta * T::lit(0.5);
        let (s, c) = (half.sin(), half.cos());
        let bit = 1usize << q;
        for b in 0..self.dim() {
            if b & bit == 0 {
                let a0 = self.amps[b];
                let a1 = self.amps[b | bit];
                self.amps[b] = a0 * c - a1 * s;
                self.amps[b | bit] = a0 * s + a1 * c;
            }
        }
        Ok(())
    }

    /// `P|psi>` in place.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.support() >> self.n_qubits != 0 {
            return Err(Error::invalid(format!(
                "Pauli string {p} exceeds {} qubits",
                self.n_qubits
            )));
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        for (b, a) in self.amps.iter().enumerate() {
            let (ph, bp) = p.apply_basis::<T>(b);
            out[bp] = ph * a;
        }
        self.amps = out;
        Ok(())
    }

    /// `exp(-iθP/2) = cos(θ/2) I - i sin(θ/2) P`.
    pub fn apply_pauli_rotation(&mut self, theta: T, p: &PauliString) -> Result<()> {
        if p.support() >> self.n_qubits != 0 {
            return Err(Error::invalid(format!(
                "Pauli string {p} exceeds {} qubits",
                self.n_qubits
            )));
        }
        let half = theta * T::lit(0.5);
        let c = Complex::new(half.cos(), T::zero());
        let ms = Complex::new(T::zero(), -half.sin());
        let x = p.x as usize;
        if x == 0 {
            // diagonal: each amplitude picks up cos ∓ i sin
            for (b, a) in self.amps.iter_mut().enumerate() {
                let (ph, _) = p.apply_basis::<T>(b);
                *a = *a * (c + ms * ph);
            }
            return Ok(());
        }
        let pivot = 1usize << (63 - (x as u64).leading_zeros());
        for b in 0..self.dim() {
            if b & pivot != 0 {
                continue;
            }
            let bp = b ^ x;
            let (ph_b, _) = p.apply_basis::<T>(b);
            let (ph_bp, _) = p.apply_basis::<T>(bp);
            let (a, ap) = (self.amps[b], self.amps[bp]);
            // (P psi)[bp] = ph_b a, (P psi)[b] = ph_bp ap
            self.amps[b] = c * a + ms * ph_bp * ap;
            self.amps[bp] = c * ap + ms * ph_b * a;
        }
        Ok(())
    }

    pub fn scale(&mut self, f: Complex<T>) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    /// `<psi|H|psi>`, the real part of a Hermitian expectation.
    pub fn expectation(&self, h: &PauliHamiltonian<T>) -> Result<T> {
        if h.n_qubits != self.n_qubits {
            return Err(Error::Dimension(format!(
                "operator on {} qubits, state on {}",
                h.n_qubits, self.n_qubits
            )));
        }
        let hp = h.apply(&self.amps);
        let v = self
            .amps
            .iter()
            .zip(&hp)
            .fold(Complex::new(T::zero(), T::zero()), |a, (x, y)| {
                a + x.conj() * y
            });
        Ok(v.re)
    }

    /// Bitstring of basis index `b`, most significant (highest) qubit first.
    pub fn bitstring(&self, b: usize) -> String {
        (0..self.n_qubits)
            .rev()
            .map(|k| if b >> k & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}
