//! Gaussian-process Bayesian optimization with expected improvement.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_INITIAL: usize = 5;
pub const N_CANDIDATES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    /// In unit-cube coordinates.
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpPoint {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpState {
    pub bounds: Vec<(f64, f64)>,
    pub points: Vec<GpPoint>,
    /// Hyperparameters of the last surrogate fit (on standardized values).
    pub hyper: Option<GpHyper>,
    pub best: usize,
    pub seed: u64,
}

impl GpState {
    pub fn best_point(&self) -> &GpPoint {
        &self.points[self.best]
    }
}

fn kernel(a: &[f64], b: &[f64], h: &GpHyper) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    h.signal_variance * (-0.5 * d2 / (h.length_scale * h.length_scale)).exp()
}

struct Surrogate {
    hyper: GpHyper,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

fn fit_surrogate(u: &[Vec<f64>], y: &DVector<f64>, h: GpHyper) -> Option<(Surrogate, f64)> {
    let n = u.len();
    let mut k = DMatrix::from_fn(n, n, |i, j| kernel(&u[i], &u[j], &h));
    for i in 0..n {
        k[(i, i)] += h.noise_variance;
    }
    let chol = k.cholesky()?;
    let alpha = chol.solve(y);
    let logdet: f64 = (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>() * 2.0;
    let lml =
        -0.5 * y.dot(&alpha) - 0.5 * logdet - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    Some((
        Surrogate {
            hyper: h,
            chol,
            alpha,
        },
        lml,
    ))
}

/// Maximum marginal likelihood over a fixed log-spaced grid.
fn fit_hyper(u: &[Vec<f64>], y: &DVector<f64>) -> Result<Surrogate> {
    let mut best: Option<(Surrogate, f64)> = None;
    for li in 0..9 {
        let length_scale = 10f64.powf(-1.5 + 0.25 * li as f64);
        for si in 0..5 {
            let signal_variance = 10f64.powf(-1.0 + 0.5 * si as f64);
            for noise_variance in [1e-8, 1e-6, 1e-4, 1e-2] {
                let h = GpHyper {
                    length_scale,
                    signal_variance,
                    noise_variance,
                };
                if let Some((s, lml)) = fit_surrogate(u, y, h) {
                    if lml.is_finite() && best.as_ref().is_none_or(|b| lml > b.1) {
                        best = Some((s, lml));
                    }
                }
            }
        }
    }
    best.map(|b| b.0).ok_or_else(|| {
        Error::Numerical("no GP hyperparameters gave a positive-definite kernel".into())
    })
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn expected_improvement(s: &Surrogate, u: &[Vec<f64>], cand: &[f64], best: f64) -> f64 {
    let ks = DVector::from_iterator(u.len(), u.iter().map(|p| kernel(p, cand, &s.hyper)));
    let mu = ks.dot(&s.alpha);
    let v = s
        .chol
        .l()
        .solve_lower_triangular(&ks)
        .unwrap_or_else(|| ks.clone());
    let var = (s.hyper.signal_variance - v.dot(&v)).max(0.0);
    let sd = var.sqrt();
    let imp = best - mu;
    if sd < 1e-12 {
        return imp.max(0.0);
    }
    let z = imp / sd;
    imp * normal_cdf(z) + sd * normal_pdf(z)
}

fn latin_hypercube(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]; n];
    for d in 0..dim {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        for (i, p) in pts.iter_mut().enumerate() {
            p[d] = (perm[i] as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    pts
}

/// Minimizes `objective` over the box `bounds` with `budget` evaluations.
pub fn gp_optimize<F>(
    mut objective: F,
    bounds: &[(f64, f64)],
    budget: usize,
    seed: u64,
) -> Result<GpState>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if budget < N_INITIAL {
        return Err(Error::invalid(format!(
            "GP budget must be at least {N_INITIAL}"
        )));
    }
    if bounds.is_empty()
        || bounds
            .iter()
            .any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi))
    {
        return Err(Error::invalid(
            "GP bounds must be finite with lower < upper",
        ));
    }
    let dim = bounds.len();
    let to_x = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(bounds)
            .map(|(v, (lo, hi))| (lo + v * (hi - lo)).clamp(*lo, *hi))
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut us: Vec<Vec<f64>> = Vec::with_capacity(budget);
    let mut state = GpState {
        bounds: bounds.to_vec(),
        points: Vec::with_capacity(budget),
        hyper: None,
        best: 0,
        seed,
    };
    let mut eval = |u: Vec<f64>, state: &mut GpState, us: &mut Vec<Vec<f64>>| -> Result<()> {
        let x = to_x(&u);
        let value = objective(&x).map_err(|e| Error::Objective {
            point: x.clone(),
            msg: e.to_string(),
        })?;
        if !value.is_finite() {
            return Err(Error::Objective {
                point: x,
                msg: "objective returned a non-finite value".into(),
            });
        }
        if value
            < state
                .points
                .get(state.best)
                .map_or(f64::INFINITY, |p| p.value)
        {
            state.best = state.points.len();
        }
        state.points.push(GpPoint { x, value });
        us.push(u);
        Ok(())
    };
    for u in latin_hypercube(&mut rng, N_INITIAL, dim) {
        eval(u, &mut state, &mut us)?;
    }
    while state.points.len() < budget {
        let vals: Vec<f64> = state.points.iter().map(|p| p.value).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
        let sd = if sd > 0.0 { sd } else { 1.0 };
        let y = DVector::from_iterator(vals.len(), vals.iter().map(|v| (v - mean) / sd));
        let surrogate = fit_hyper(&us, &y)?;
        state.hyper = Some(surrogate.hyper);
        let best_y = y.min();
        let mut pick: Option<(Vec<f64>, f64)> = None;
        for _ in 0..N_CANDIDATES {
            let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let ei = expected_improvement(&surrogate, &us, &c, best_y);
            if pick.as_ref().is_none_or(|p| ei > p.1) {
                pick = Some((c, ei));
            }
        }
        eval(
            pick.expect("candidate set is non-empty").0,
            &mut state,
            &mut us,
        )?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_bowl() {
        let s = gp_optimize(|x| Ok((x[0] - 0.3).powi(2)), &[(0.0, 1.0)], 25, 4).unwrap();
        assert!((s.best_point().x[0] - 0.3).abs() < 0.05);
        assert_eq!(s.points.len(), 25);
    }

    #[test]
    fn constant_objective_keeps_first() {
        let s = gp_optimize(|_| Ok(1.0), &[(0.0, 1.0), (-1.0, 1.0)], 8, 0).unwrap();
        assert_eq!(s.best, 0);
    }

    #[test]
    fn objective_error_reports_point() {
        let err = gp_optimize(|_| Err(Error::invalid("boom")), &[(0.0, 1.0)], 5, 0).unwrap_err();
        assert!(matches!(err, Error::Objective { ref point, .. } if point.len() == 1));
        assert!(gp_optimize(|_| Ok(0.0), &[(0.0, 1.0)], 4, 0).is_err());
    }
}
