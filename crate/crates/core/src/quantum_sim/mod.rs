//! Statevector simulation of Jordan-Wigner-encoded embedded Hamiltonians.

mod evolution;
mod gates;
mod jordan_wigner;
mod noise;
mod observables;
mod pauli;
mod statevector;

pub use evolution::{
    evolve_exact, prepare_initial, trotter_sequence, trotter_sequence_ordered, ExactPropagator,
    InitialState, TermOrder, MAX_EXACT_QUBITS,
};
pub use gates::{run_sequence, Gate, GateSequence};
pub use jordan_wigner::{jordan_wigner, number_operator, one_body_observable, DROP_TOL};
pub use noise::{
    fold_gates, noisy_expectation, zne_extrapolate, Amplification, NoiseSpec, NoisyEstimate,
};
pub use observables::{expval_f, expval_o, rdm1, sample_histogram};
pub use pauli::{PauliAccumulator, PauliHamiltonian, PauliString};
pub use statevector::{Statevector, MAX_QUBITS};
