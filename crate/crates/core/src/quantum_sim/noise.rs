//! Stochastic Pauli-channel trajectories and zero-noise extrapolation.
//!
//! After every gate, with probability `p`, a uniformly random non-identity
//! Pauli acts on that gate's support. Noise is amplified either by unitary
//! folding (`G -> G (G† G)^k`, `λ = 2k + 1`) or by scaling the probability.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gates::{Gate, GateSequence};
use super::pauli::{PauliHamiltonian, PauliString};
use super::statevector::Statevector;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplification {
    #[default]
    Folding,
    ProbabilityScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Per-gate error probability at `λ = 1`.
    pub p: f64,
    pub scale: f64,
    pub seed: u64,
    #[serde(default)]
    pub amplification: Amplification,
}

impl NoiseSpec {
    pub fn new(p: f64, scale: f64, seed: u64) -> Self {
        Self {
            p,
            scale,
            seed,
            amplification: Amplification::Folding,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::invalid(format!(
                "error probability {} outside [0, 1)",
                self.p
            )));
        }
        if !(self.scale >= 1.0) {
            return Err(Error::invalid(format!(
                "noise scale {} below 1",
                self.scale
            )));
        }
        if self.p * self.scale >= 1.0 {
            return Err(Error::invalid(format!(
                "p * scale = {} must stay below 1",
                self.p * self.scale
            )));
        }
        if let Amplification::Folding = self.amplification {
            let k = (self.scale - 1.0) / 2.0;
            if k.fract() != 0.0 {
                return Err(Error::invalid(format!(
                    "folding needs an odd integer scale, got {}",
                    self.scale
                )));
            }
        }
        Ok(())
    }

    fn effective(&self) -> (usize, f64) {
        match self.amplification {
            Amplification::Folding => (((self.scale - 1.0) / 2.0) as usize, self.p),
            Amplification::ProbabilityScaling => (0, self.p * self.scale),
        }
    }
}

/// Each gate followed by `folds` copies of `G† G`.
pub fn fold_gates<T: Real>(gs: &GateSequence<T>, folds: usize) -> GateSequence<T> {
    let mut out = GateSequence::new(gs.n_qubits);
    out.global_phase = gs.global_phase;
    for g in &gs.gates {
        out.push(*g);
        for _ in 0..folds {
            out.push(g.inverse());
            out.push(*g);
        }
    }
    out
}

fn random_pauli(rng: &mut ChaCha8Rng, support: &[usize]) -> PauliString {
    let k = support.len() as u32;
    let code = rng.random_range(1..4u64.pow(k));
    let mut p = PauliString::default();
    for (i, &q) in support.iter().enumerate() {
        match code >> (2 * i) & 3 {
            1 => p.x |= 1 << q,
            2 => {
                p.x |= 1 << q;
                p.z |= 1 << q;
            }
            3 => p.z |= 1 << q,
            _ => {}
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_trajectories: usize,
}

/// Trajectory average of `<observable>` for `gs` applied to `|0...0>`.
/// Trajectory `k` draws from ChaCha stream `k` of `noise.seed`, so results
/// do not depend on the thread count.
pub fn noisy_expectation<T: Real>(
    gs: &GateSequence<T>,
    observable: &PauliHamiltonian<T>,
    noise: &NoiseSpec,
    n_trajectories: usize,
) -> Result<NoisyEstimate> {
    noise.validate()?;
    gs.validate()?;
    if n_trajectories == 0 {
        return Err(Error::invalid("at least one trajectory is required"));
    }
    if observable.n_qubits != gs.n_qubits {
        return Err(Error::Dimension(
            "observable and circuit registers differ".into(),
        ));
    }
    let (folds, p) = noise.effective();
    let circuit = fold_gates(gs, folds);
    let supports: Vec<Vec<usize>> = circuit.gates.iter().map(Gate::support).collect();
    let psi0 = Statevector::<T>::zero_state(gs.n_qubits)?;
    let values: Vec<Result<f64>> = (0..n_trajectories)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(k as u64);
            let mut psi = psi0.clone();
            for (g, sup) in circuit.gates.iter().zip(&supports) {
                g.apply(&mut psi)?;
                if p > 0.0 && rng.random::<f64>() < p {
                    psi.apply_pauli(&random_pauli(&mut rng, sup))?;
                }
            }
            Ok(psi.expectation(observable)?.to_f64_lossy())
        })
        .collect();
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(NoisyEstimate {
        mean,
        stderr,
        n_trajectories,
    })
}

/// Least-squares polynomial of degree `fit_order` through `(λ, value)`
/// points, evaluated at `λ = 0`.
pub fn zne_extrapolate(points: &[(f64, f64)], fit_order: usize) -> Result<f64> {
    let mut lambdas: Vec<f64> = points.iter().map(|p| p.0).collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lambdas.dedup();
    if lambdas.len() < fit_order + 1 {
        return Err(Error::Numerical(format!(
            "order-{fit_order} extrapolation needs {} distinct scales, got {}",
            fit_order + 1,
            lambdas.len()
        )));
    }
    let a = DMatrix::from_fn(points.len(), fit_order + 1, |i, j| {
        points[i].0.powi(j as i32)
    });
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let coef = a
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Numerical(format!("extrapolation fit failed: {e}")))?;
    Ok(coef[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_sim::evolution::{prepare_initial, InitialState};

    fn circuit() -> (GateSequence<f64>, PauliHamiltonian<f64>) {
        let (mut gs, _) = prepare_initial::<f64>(InitialState::HfGround, 4, 2).unwrap();
        gs.push(Gate::PauliRotation(
            0.4,
            PauliString::parse("XXYY").unwrap(),
        ));
        let obs = PauliHamiltonian::new(
            4,
            vec![(1.0, PauliString::z_on(0)), (0.5, PauliString::z_on(2))],
        );
        (gs, obs)
    }

    #[test]
    fn zero_noise_matches_ideal() {
        let (gs, obs) = circuit();
        let ideal =
            crate::quantum_sim::gates::run_sequence(&gs, &Statevector::zero_state(4).unwrap())
                .unwrap()
                .expectation(&obs)
                .unwrap();
        let est = noisy_expectation(&gs, &obs, &NoiseSpec::new(0.0, 1.0, 1), 8).unwrap();
        assert_eq!(est.mean, ideal);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn seeded_and_thread_independent() {
        let (gs, obs) = circuit();
        let spec = NoiseSpec::new(0.1, 3.0, 42);
        let a = noisy_expectation(&gs, &obs, &spec, 64).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| noisy_expectation(&gs, &obs, &spec, 64).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn folding_needs_odd_scale() {
        assert!(NoiseSpec::new(0.01, 2.0, 0).validate().is_err());
        let mut s = NoiseSpec::new(0.01, 2.0, 0);
        s.amplification = Amplification::ProbabilityScaling;
        assert!(s.validate().is_ok());
        assert!(NoiseSpec::new(0.4, 3.0, 0).validate().is_err());
        assert!(NoiseSpec::new(1.0, 1.0, 0).validate().is_err());
    }

    #[test]
    fn extrapolation_examples() {
        let lin = [(1.0, 3.0), (3.0, 7.0), (5.0, 11.0)];
        assert!((zne_extrapolate(&lin, 1).unwrap() - 1.0).abs() < 1e-12);
        let quad: Vec<(f64, f64)> = [1.0, 3.0, 5.0]
            .iter()
            .map(|&l| (l, 2.0 - l + 0.5 * l * l))
            .collect();
        assert!((zne_extrapolate(&quad, 2).unwrap() - 2.0).abs() < 1e-12);
        assert!(zne_extrapolate(&[(1.0, 1.0), (1.0, 2.0)], 1).is_err());
    }
}
