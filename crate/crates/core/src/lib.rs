//! Quantum fingerprint pipeline.
//!
//! Mean-field chemistry, fragment embedding, fermion-to-qubit mapping and
//! Hamiltonian simulation, and the data-driven models trained on the
//! resulting time-series features. Numerical code is generic over
//! [`Real`]; the aliases at the crate root fix the scalar to `f64`.

pub mod chem_io;
pub mod embedding;
pub mod error;
pub mod fci;
pub mod fingerprint_ml;
pub mod linalg;
pub mod mean_field;
pub mod quantum_sim;
pub mod scalar;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Real;

pub type MolecularIntegrals = chem_io::MolecularIntegrals<f64>;
pub type GaussianGeometry = chem_io::GaussianGeometry<f64>;
pub type EmbeddedHamiltonian = embedding::EmbeddedHamiltonian<f64>;
pub type MeanFieldSolution = mean_field::MeanFieldSolution<f64>;
pub type PauliHamiltonian = quantum_sim::PauliHamiltonian<f64>;
pub type Statevector = quantum_sim::Statevector<f64>;
pub type GateSequence = quantum_sim::GateSequence<f64>;
