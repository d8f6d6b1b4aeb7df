use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::statevector::Statevector;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Jordan-Wigner ladder action on a basis index: the string of Z below
/// `k` contributes the parity of the occupied qubits below it.
#[inline]
fn jw_ladder(b: usize, k: usize, creation: bool) -> Option<(bool, usize)> {
    let occupied = b >> k & 1 == 1;
    if occupied == creation {
        return None;
    }
    let neg = (b & ((1usize << k) - 1)).count_ones() % 2 == 1;
    Some((neg, b ^ (1usize << k)))
}

/// Spin-summed spatial 1-RDM `rho_rs = sum_σ <a†_sσ a_rσ>`.
pub fn rdm1<T: Real>(psi: &Statevector<T>) -> Result<DMatrix<Complex<T>>> {
    if psi.n_qubits % 2 != 0 {
        return Err(Error::invalid("odd register cannot carry spin orbitals"));
    }
    let n = psi.n_qubits / 2;
    let zero = Complex::new(T::zero(), T::zero());
    let mut rho = DMatrix::from_element(n, n, zero);
    for (b, a) in psi.amps.iter().enumerate() {
        if *a == zero {
            continue;
        }
        for r in 0..n {
            for sigma in 0..2 {
                let Some((n1, b1)) = jw_ladder(b, 2 * r + sigma, false) else {
                    continue;
                };
                for s in 0..n {
                    if let Some((n2, b2)) = jw_ladder(b1, 2 * s + sigma, true) {
                        let v = psi.amps[b2].conj() * a;
                        rho[(r, s)] += if n1 ^ n2 { -v } else { v };
                    }
                }
            }
        }
    }
    Ok(rho)
}

fn contract<T: Real>(o: &DMatrix<T>, rho: &DMatrix<Complex<T>>) -> Result<Complex<T>> {
    if o.shape() != rho.shape() {
        return Err(Error::Dimension(format!(
            "operator {:?} against 1-RDM {:?}",
            o.shape(),
            rho.shape()
        )));
    }
    Ok(o.iter()
        .zip(rho.iter())
        .fold(Complex::new(T::zero(), T::zero()), |a, (x, r)| a + r * *x))
}

fn real_part<T: Real>(v: Complex<T>) -> T {
    debug_assert!(
        v.im.abs() <= T::lit(1e-10) * v.re.abs().max(T::one()),
        "imaginary residue {} in a Hermitian expectation",
        v.im
    );
    v.re
}

/// Mean-field energy functional `F = sum_rs h_rs rho_rs`.
pub fn expval_f<T: Real>(h_eff: &DMatrix<T>, rho: &DMatrix<Complex<T>>) -> Result<T> {
    Ok(real_part(contract(h_eff, rho)?))
}

/// `<O> = sum_rs O_rs rho_rs` for a real symmetric one-body operator.
pub fn expval_o<T: Real>(o: &DMatrix<T>, rho: &DMatrix<Complex<T>>) -> Result<T> {
    if !crate::linalg::is_symmetric(o, T::lit(1e-12)) {
        return Err(Error::invalid("observable matrix is not symmetric"));
    }
    Ok(real_part(contract(o, rho)?))
}

/// Multinomial measurement counts keyed by bitstring (highest qubit first).
pub fn sample_histogram<T: Real>(
    psi: &Statevector<T>,
    shots: u64,
    seed: u64,
) -> BTreeMap<String, u64> {
    let probs = psi.probabilities();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0f64;
    for p in &probs {
        acc += p.to_f64_lossy();
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(b, c)| (psi.bitstring(b), c))
        .collect()
}
