//! Pauli strings as bitmask pairs and real-weighted Pauli sums.
//!
//! A string is stored as `(x, z)` masks: qubit `k` carries X when only
//! bit `k` of `x` is set, Z when only `z`, and Y when both. Textual
//! form lists qubit 0 first, e.g. `"XZIY"` is X on qubit 0 and Y on qubit 3.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

/// Powers of `i`: index `k` is `i^k`.
pub(crate) fn i_pow<T: Real>(k: u32) -> Complex<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x_on(q: usize) -> Self {
        Self { x: 1 << q, z: 0 }
    }

    pub fn y_on(q: usize) -> Self {
        Self {
            x: 1 << q,
            z: 1 << q,
        }
    }

    pub fn z_on(q: usize) -> Self {
        Self { x: 0, z: 1 << q }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn n_y(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn support_qubits(&self) -> Vec<usize> {
        let s = self.support();
        (0..64).filter(|&k| s >> k & 1 == 1).collect()
    }

    /// Symbol on qubit `k`: one of `I`, `X`, `Y`, `Z`.
    pub fn symbol(&self, k: usize) -> char {
        match (self.x >> k & 1, self.z >> k & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    fn rank(&self, k: usize) -> u8 {
        match self.symbol(k) {
            'I' => 0,
            'X' => 1,
            'Y' => 2,
            _ => 3,
        }
    }

    /// Product `self * other = i^phase * result`.
    pub fn mul(&self, other: &PauliString) -> (u32, PauliString) {
        let res = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let sign = (self.z & other.x).count_ones() % 2 * 2;
        let phase = (self.n_y() + other.n_y() + 4 - res.n_y() % 4 + sign) % 4;
        (phase, res)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `P|b> = phase * |b'>`.
    #[inline]
    pub fn apply_basis<T: Real>(&self, b: usize) -> (Complex<T>, usize) {
        let neg = (b as u64 & self.z).count_ones() % 2;
        let phase = i_pow::<T>(self.n_y() + 2 * neg);
        (phase, b ^ self.x as usize)
    }

    pub fn to_label(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|k| self.symbol(k)).collect()
    }

    pub fn parse(label: &str) -> Result<Self> {
        let mut p = PauliString::default();
        if label.len() > 64 {
            return Err(Error::invalid("Pauli strings are limited to 64 qubits"));
        }
        for (k, ch) in label.chars().enumerate() {
            match ch {
                'I' => {}
                'X' => p.x |= 1 << k,
                'Y' => {
                    p.x |= 1 << k;
                    p.z |= 1 << k;
                }
                'Z' => p.z |= 1 << k,
                other => return Err(Error::invalid(format!("invalid Pauli symbol '{other}'"))),
            }
        }
        Ok(p)
    }

    /// Lexicographic order of the textual form (qubit 0 first, I < X < Y < Z).
    pub fn lex_cmp(&self, other: &PauliString, n_qubits: usize) -> Ordering {
        for k in 0..n_qubits {
            match self.rank(k).cmp(&other.rank(k)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// A sum of Pauli strings with complex coefficients, used while building
/// Hamiltonians before they are reduced to real weights.
#[derive(Debug, Clone, Default)]
pub struct PauliAccumulator<T> {
    terms: HashMap<PauliString, Complex<T>>,
}

impl<T: Real> PauliAccumulator<T> {
    pub fn new() -> Self {
        Self {
            terms: HashMap::new(),
        }
    }

    pub fn add(&mut self, p: PauliString, c: Complex<T>) {
        *self
            .terms
            .entry(p)
            .or_insert_with(|| Complex::new(T::zero(), T::zero())) += c;
    }

    pub fn add_product(&mut self, factors: &[Vec<(Complex<T>, PauliString)>], scale: Complex<T>) {
        let mut acc: Vec<(Complex<T>, PauliString)> = vec![(scale, PauliString::IDENTITY)];
        for f in factors {
            let mut next = Vec::with_capacity(acc.len() * f.len());
            for (ca, pa) in &acc {
                for (cb, pb) in f {
                    let (ph, p) = pa.mul(pb);
                    next.push((*ca * *cb * i_pow::<T>(ph), p));
                }
            }
            acc = next;
        }
        for (c, p) in acc {
            self.add(p, c);
        }
    }

    /// Real-weighted sum; imaginary parts must cancel (Hermitian input).
    pub fn into_hamiltonian(self, n_qubits: usize, drop_below: T) -> PauliHamiltonian<T> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (p, c) in self.terms {
            debug_assert!(
                c.im.abs() <= T::lit(1e-9),
                "non-Hermitian Pauli coefficient {c}"
            );
            if c.re.abs() > drop_below {
                terms.push((c.re, p));
            }
        }
        PauliHamiltonian::new(n_qubits, terms)
    }
}

/// Real-weighted Pauli sum in canonical (lexicographic, merged) form.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian<T> {
    pub n_qubits: usize,
    pub terms: Vec<(T, PauliString)>,
}

impl<T: Real> PauliHamiltonian<T> {
    pub fn new(n_qubits: usize, terms: Vec<(T, PauliString)>) -> Self {
        let mut merged: HashMap<PauliString, T> = HashMap::new();
        for (c, p) in terms {
            *merged.entry(p).or_insert_with(T::zero) += c;
        }
        let mut terms: Vec<(T, PauliString)> = merged.into_iter().map(|(p, c)| (c, p)).collect();
        terms.sort_by(|a, b| a.1.lex_cmp(&b.1, n_qubits));
        Self { n_qubits, terms }
    }

    pub fn identity_coefficient(&self) -> T {
        self.terms
            .iter()
            .filter(|(_, p)| p.is_identity())
            .fold(T::zero(), |a, (c, _)| a + *c)
    }

    pub fn non_identity_terms(&self) -> impl Iterator<Item = &(T, PauliString)> {
        self.terms.iter().filter(|(_, p)| !p.is_identity())
    }

    pub fn coefficient(&self, p: &PauliString) -> T {
        self.terms
            .iter()
            .find(|(_, q)| q == p)
            .map(|(c, _)| *c)
            .unwrap_or_else(T::zero)
    }

    /// `H|psi>` on a dense amplitude vector.
    pub fn apply(&self, amps: &[Complex<T>]) -> Vec<Complex<T>> {
        let dim = amps.len();
        let mut out = vec![Complex::new(T::zero(), T::zero()); dim];
        for (c, p) in &self.terms {
            for (b, a) in amps.iter().enumerate() {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let (ph, bp) = p.apply_basis::<T>(b);
                out[bp] += ph * *a * *c;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        for (c, p) in &self.terms {
            for b in 0..dim {
                let (ph, bp) = p.apply_basis::<T>(b);
                m[(bp, b)] += ph * *c;
            }
        }
        m
    }

    /// Real part of the dense matrix; valid when every string has an even number of Y.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.n_y() % 2 == 0)
    }

    pub fn to_dense_real(&self) -> Option<DMatrix<T>> {
        if !self.is_real() {
            return None;
        }
        Some(self.to_dense().map(|c| c.re))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = 64 - self.support().leading_zeros() as usize;
        write!(f, "{}", self.to_label(n.max(1)))
    }
}
