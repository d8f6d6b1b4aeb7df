//! Observable trajectories ("quantum fingerprints") over a time grid.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chem_io::FeatureTable;
use crate::embedding::EmbeddedHamiltonian;
use crate::error::{Error, Result};
use crate::quantum_sim::{
    expval_f, expval_o, jordan_wigner, prepare_initial, rdm1, run_sequence,
    trotter_sequence_ordered, ExactPropagator, InitialState, TermOrder,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// `F(t) = sum h_eff_rs rho_rs(t)`.
    F,
    /// `<O(t)> = sum O_rs rho_rs(t)` for a symmetric matrix given row by row.
    Custom { matrix: Vec<Vec<f64>> },
    /// Real part of a single 1-RDM element.
    RdmElement { r: usize, s: usize },
}

impl ObservableSpec {
    pub fn label(&self) -> String {
        match self {
            ObservableSpec::F => "F".into(),
            ObservableSpec::Custom { .. } => "O".into(),
            ObservableSpec::RdmElement { r, s } => format!("rho[{r},{s}]"),
        }
    }

    fn custom_matrix(&self, n: usize) -> Result<Option<DMatrix<f64>>> {
        let ObservableSpec::Custom { matrix } = self else {
            return Ok(None);
        };
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "observable matrix must be {n}x{n} for this active space"
            )));
        }
        Ok(Some(DMatrix::from_fn(n, n, |i, j| matrix[i][j])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Evolver {
    #[default]
    Exact,
    Trotter {
        order: u32,
        r: usize,
        #[serde(default)]
        term_order: TermOrder,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub molecule_id: String,
    pub times: Vec<f64>,
    pub observable: String,
    pub values: Vec<f64>,
    pub evolver: Evolver,
}

/// `start, start + step, ...` up to `stop` inclusive.
pub fn time_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::invalid(format!(
            "invalid time grid {start}..{stop} step {step}"
        )));
    }
    let n = ((stop - start) / step).round();
    if (start + n * step - stop).abs() > 1e-9 * step.max(1.0) {
        return Err(Error::invalid(format!(
            "step {step} does not divide {start}..{stop}"
        )));
    }
    Ok((0..=n as usize).map(|k| start + k as f64 * step).collect())
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("time grid is empty"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "time grid must be finite and strictly increasing",
        ));
    }
    Ok(())
}

/// Real part of the spin-summed 1-RDM at every grid time.
pub fn rdm_trajectory<T: Real>(
    eh: &EmbeddedHamiltonian<T>,
    initial: InitialState,
    times: &[f64],
    evolver: Evolver,
) -> Result<Vec<DMatrix<f64>>> {
    check_grid(times)?;
    let ph = jordan_wigner(eh)?;
    let (_, psi0) = prepare_initial::<T>(initial, ph.n_qubits, eh.n_active_electrons)?;
    let to_real = |rho: DMatrix<num_complex::Complex<T>>| rho.map(|c| c.re.to_f64_lossy());
    match evolver {
        Evolver::Exact => {
            let u = ExactPropagator::new(&ph)?;
            times
                .iter()
                .map(|&t| Ok(to_real(rdm1(&u.evolve(&psi0, T::lit(t))?)?)))
                .collect()
        }
        Evolver::Trotter {
            order,
            r,
            term_order,
        } => times
            .iter()
            .map(|&t| {
                let gs = trotter_sequence_ordered(
                    &ph,
                    T::lit(t),
                    order,
                    r,
                    &term_order.permutation(&ph),
                )?;
                Ok(to_real(rdm1(&run_sequence(&gs, &psi0)?)?))
            })
            .collect(),
    }
}

/// `sum O_rs rho_rs` along a trajectory of real 1-RDMs.
pub fn observable_series(rdms: &[DMatrix<f64>], o: &DMatrix<f64>) -> Vec<f64> {
    rdms.iter().map(|rho| o.component_mul(rho).sum()).collect()
}

pub fn compute_fingerprint<T: Real>(
    molecule_id: &str,
    eh: &EmbeddedHamiltonian<T>,
    initial: InitialState,
    times: &[f64],
    observable: &ObservableSpec,
    evolver: Evolver,
) -> Result<Fingerprint> {
    let n = eh.n_active_orbitals;
    let custom = observable.custom_matrix(n)?;
    if let ObservableSpec::RdmElement { r, s } = observable {
        if *r >= n || *s >= n {
            return Err(Error::Dimension(format!(
                "1-RDM element ({r},{s}) outside {n} orbitals"
            )));
        }
    }
    let rdms = rdm_trajectory(eh, initial, times, evolver)?;
    let h = eh.h_eff.map(|x| x.to_f64_lossy());
    let values = rdms
        .iter()
        .map(|rho| {
            let rc = rho.map(|x| num_complex::Complex::new(x, 0.0));
            match observable {
                ObservableSpec::F => expval_f(&h, &rc),
                ObservableSpec::Custom { .. } => expval_o(custom.as_ref().unwrap(), &rc),
                ObservableSpec::RdmElement { r, s } => Ok(rho[(*r, *s)]),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite fingerprint for '{molecule_id}'"
        )));
    }
    Ok(Fingerprint {
        molecule_id: molecule_id.into(),
        times: times.to_vec(),
        observable: observable.label(),
        values,
        evolver,
    })
}

/// Stacks fingerprints into a table; every grid must be identical.
pub fn feature_table(fps: &[Fingerprint]) -> Result<FeatureTable> {
    let times = fps.first().map(|f| f.times.clone()).unwrap_or_default();
    let mut table = FeatureTable::new(times);
    for f in fps {
        if f.times != table.times {
            return Err(Error::Dataset(format!(
                "fingerprint '{}' uses a different time grid",
                f.molecule_id
            )));
        }
        table.push(f.molecule_id.clone(), f.values.clone())?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(time_grid(0.0, 14.0, 0.5).unwrap().len(), 29);
        assert_eq!(time_grid(0.5, 4.0, 0.5).unwrap().len(), 8);
        assert_eq!(time_grid(0.0, 0.0, 0.5).unwrap(), [0.0]);
        assert!(time_grid(0.0, 1.0, 0.3).is_err());
        assert!(time_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn mismatched_grids_rejected() {
        let mk = |id: &str, t: Vec<f64>| Fingerprint {
            molecule_id: id.into(),
            values: vec![0.0; t.len()],
            times: t,
            observable: "F".into(),
            evolver: Evolver::Exact,
        };
        assert!(feature_table(&[mk("a", vec![0.0, 1.0]), mk("b", vec![0.0, 2.0])]).is_err());
        assert_eq!(
            feature_table(&[mk("a", vec![0.0, 1.0])]).unwrap().n_rows(),
            1
        );
    }
}
