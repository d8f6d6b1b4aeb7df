#![allow(dead_code)]

use qfp_core::chem_io::MoleculeSource;
use qfp_core::embedding::EmbeddedHamiltonian;
use qfp_core::fingerprint_ml::{build_hamiltonian, load_integrals, EmbeddingSpec};

/// (2e, 2o) H₂ / STO-3G Hamiltonian in the RHF orbital basis.
pub fn h2(z: f64) -> EmbeddedHamiltonian<f64> {
    let m = load_integrals(&MoleculeSource::H2 { separation: z }, None).unwrap();
    build_hamiltonian(&m, &EmbeddingSpec::active_space(2, 2)).unwrap()
}

/// Fragment {0, 1} DMET cluster of the H₄ chain (4 orbitals, 8 qubits).
pub fn h4_cluster() -> EmbeddedHamiltonian<f64> {
    let m = load_integrals(
        &MoleculeSource::HydrogenChain {
            n_atoms: 4,
            bonds: vec![1.4],
        },
        None,
    )
    .unwrap();
    build_hamiltonian(&m, &EmbeddingSpec::dmet(vec![0, 1], 4, 4)).unwrap()
}

/// Near-uniform H₆ chains: a base bond in [1.2, 2.6] bohr with each of the
/// five bonds jittered by up to ±0.1.
pub fn h6_bonds(n: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r: f64 = rng.random_range(1.2..2.6);
            (0..5).map(|_| r + rng.random_range(-0.1..0.1)).collect()
        })
        .collect()
}
