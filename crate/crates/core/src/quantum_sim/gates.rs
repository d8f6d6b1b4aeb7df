//! Gate sequences and their line-oriented text form.
//!
//! ```text
//! # n_qubits=4
//! # global_phase=0.25
//! X 0
//! RY 1.5707963267948966 2
//! PROT 0.1 XZXI
//! ```

use std::fmt::Write as _;

use super::pauli::PauliString;
use super::statevector::Statevector;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    X(usize),
    Ry(T, usize),
    /// `exp(-iθP/2)`.
    PauliRotation(T, PauliString),
}

impl<T: Real> Gate<T> {
    pub fn inverse(&self) -> Gate<T> {
        match *self {
            Gate::X(q) => Gate::X(q),
            Gate::Ry(t, q) => Gate::Ry(-t, q),
            Gate::PauliRotation(t, p) => Gate::PauliRotation(-t, p),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::Ry(_, q) => vec![*q],
            Gate::PauliRotation(_, p) => p.support_qubits(),
        }
    }

    pub fn apply(&self, psi: &mut Statevector<T>) -> Result<()> {
        match self {
            Gate::X(q) => psi.apply_x(*q),
            Gate::Ry(t, q) => psi.apply_ry(*t, *q),
            Gate::PauliRotation(t, p) => psi.apply_pauli_rotation(*t, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence<T> {
    pub n_qubits: usize,
    pub gates: Vec<Gate<T>>,
    /// Scalar phase `φ` applied as `e^{iφ}` after the gates.
    pub global_phase: T,
}

impl<T: Real> GateSequence<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            global_phase: T::zero(),
        }
    }

    pub fn push(&mut self, g: Gate<T>) {
        self.gates.push(g);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            if let Some(&q) = g.support().iter().find(|&&q| q >= self.n_qubits) {
                return Err(Error::invalid(format!(
                    "gate {i} acts on qubit {q} of a {}-qubit register",
                    self.n_qubits
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n_qubits={}", self.n_qubits);
        let _ = writeln!(s, "# global_phase={:e}", self.global_phase);
        for g in &self.gates {
            let _ = match g {
                Gate::X(q) => writeln!(s, "X {q}"),
                Gate::Ry(t, q) => writeln!(s, "RY {t:e} {q}"),
                Gate::PauliRotation(t, p) => {
                    writeln!(s, "PROT {t:e} {}", p.to_label(self.n_qubits))
                }
            };
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut phase = T::zero();
        let mut gates = Vec::new();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let num = |line: usize, s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| perr(line, format!("invalid number '{s}'")))
        };
        let qubit = |line: usize, s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| perr(line, format!("invalid qubit index '{s}'")))
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(c) = t.strip_prefix('#') {
                let c = c.trim();
                if let Some(v) = c.strip_prefix("n_qubits=") {
                    n_qubits = Some(qubit(line, v.trim())?);
                } else if let Some(v) = c.strip_prefix("global_phase=") {
                    phase = T::lit(num(line, v.trim())?);
                }
                continue;
            }
            let f: Vec<&str> = t.split_whitespace().collect();
            let g = match (f[0], f.len()) {
                ("X", 2) => Gate::X(qubit(line, f[1])?),
                ("RY", 3) => Gate::Ry(T::lit(num(line, f[1])?), qubit(line, f[2])?),
                ("PROT", 3) => Gate::PauliRotation(
                    T::lit(num(line, f[1])?),
                    PauliString::parse(f[2]).map_err(|e| perr(line, e.to_string()))?,
                ),
                _ => return Err(perr(line, format!("unrecognised gate line '{t}'"))),
            };
            gates.push(g);
        }
        let n_qubits = n_qubits.ok_or_else(|| perr(0, "missing '# n_qubits=' line".into()))?;
        let gs = Self {
            n_qubits,
            gates,
            global_phase: phase,
        };
        gs.validate()?;
        Ok(gs)
    }
}

/// Applies every gate to `psi0` in order, then the global phase.
pub fn run_sequence<T: Real>(
    gs: &GateSequence<T>,
    psi0: &Statevector<T>,
) -> Result<Statevector<T>> {
    if gs.n_qubits != psi0.n_qubits {
        return Err(Error::Dimension(format!(
            "sequence on {} qubits, state on {}",
            gs.n_qubits, psi0.n_qubits
        )));
    }
    let mut psi = psi0.clone();
    for g in &gs.gates {
        g.apply(&mut psi)?;
    }
    if gs.global_phase != T::zero() {
        psi.scale(crate::scalar::cis(gs.global_phase));
    }
    Ok(psi)
}
