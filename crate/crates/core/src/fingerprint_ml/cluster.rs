//! PCA projection and k-means clustering of feature rows.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pls::{column_means, varying_columns};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

pub const KMEANS_RESTARTS: usize = 50;
const KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub scores: DMatrix<f64>,
    /// Fraction of total standardized variance per retained component.
    pub explained_variance_ratio: Vec<f64>,
    pub kept_columns: Vec<usize>,
}

/// Projects column-standardized `x` onto its leading `n` principal axes.
pub fn pca_project(x: &DMatrix<f64>, n: usize) -> Result<PcaResult> {
    let rows = x.nrows();
    if rows < 2 {
        return Err(Error::invalid("PCA needs at least two samples"));
    }
    let means = column_means(x);
    let kept = varying_columns(x, &means);
    let z = DMatrix::from_fn(rows, kept.len(), |i, j| {
        let c = kept[j];
        let sd = (x
            .column(c)
            .iter()
            .map(|v| (v - means[c]).powi(2))
            .sum::<f64>()
            / (rows as f64 - 1.0))
            .sqrt();
        (x[(i, c)] - means[c]) / sd
    });
    let cov = z.transpose() * &z / (rows as f64 - 1.0);
    let (w, v) = sym_eigen(&cov);
    let total: f64 = w.iter().map(|l| l.max(0.0)).sum();
    let rank = w.iter().filter(|&&l| l > 1e-10 * total.max(1e-300)).count();
    if n == 0 || n > rank {
        return Err(Error::invalid(format!(
            "{n} components requested, data rank is {rank}"
        )));
    }
    let p = w.len();
    let axes = DMatrix::from_fn(p, n, |i, j| v[(i, p - 1 - j)]);
    Ok(PcaResult {
        scores: &z * axes,
        explained_variance_ratio: (0..n).map(|j| w[p - 1 - j] / total).collect(),
        kept_columns: kept,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia of every restart, in restart order.
    pub restart_inertias: Vec<f64>,
}

fn dist2(x: &DMatrix<f64>, i: usize, c: &[f64]) -> f64 {
    c.iter()
        .enumerate()
        .map(|(j, v)| (x[(i, j)] - v).powi(2))
        .sum()
}

fn row(x: &DMatrix<f64>, i: usize) -> Vec<f64> {
    x.row(i).iter().copied().collect()
}

fn kmeans_once(
    x: &DMatrix<f64>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let n = x.nrows();
    let mut centroids = vec![row(x, rng.random_range(0..n))];
    let mut d: Vec<f64> = (0..n).map(|i| dist2(x, i, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, di) in d.iter().enumerate() {
                acc += di;
                if acc > u {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.push(row(x, next));
        for (i, di) in d.iter_mut().enumerate() {
            *di = di.min(dist2(x, i, centroids.last().unwrap()));
        }
    }
    let mut labels = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (i, l) in labels.iter_mut().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| dist2(x, i, &centroids[a]).total_cmp(&dist2(x, i, &centroids[b])))
                .unwrap();
            if *l != best {
                *l = best;
                changed = true;
            }
        }
        for (c, cent) in centroids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            for (j, v) in cent.iter_mut().enumerate() {
                *v = members.iter().map(|&i| x[(i, j)]).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = (0..n).map(|i| dist2(x, i, &centroids[labels[i]])).sum();
    (labels, centroids, inertia)
}

/// k-means++ seeded Lloyd iterations, best inertia over the restarts.
pub fn kmeans_cluster(x: &DMatrix<f64>, k: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || k > x.nrows() {
        return Err(Error::invalid(format!(
            "k = {k} with {} samples",
            x.nrows()
        )));
    }
    let runs: Vec<(Vec<usize>, Vec<Vec<f64>>, f64)> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            kmeans_once(x, k, &mut rng)
        })
        .collect();
    let restart_inertias: Vec<f64> = runs.iter().map(|r| r.2).collect();
    let best = (0..runs.len()).fold(0, |b, i| if runs[i].2 < runs[b].2 { i } else { b });
    let (labels, centroids, inertia) = runs.into_iter().nth(best).unwrap();
    Ok(KMeansResult {
        labels,
        centroids,
        inertia,
        restart_inertias,
    })
}

/// Best inertia for each `k` in `1..=k_max` (an elbow curve).
pub fn elbow_curve(x: &DMatrix<f64>, k_max: usize, seed: u64) -> Result<Vec<(usize, f64)>> {
    (1..=k_max.min(x.nrows()))
        .map(|k| Ok((k, kmeans_cluster(x, k, seed)?.inertia)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> DMatrix<f64> {
        let centres = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)];
        DMatrix::from_fn(30, 2, |i, j| {
            let c = centres[i / 10];
            let jitter = ((i * 37 + j * 11) % 7) as f64 * 0.1 - 0.3;
            if j == 0 {
                c.0 + jitter
            } else {
                c.1 + jitter
            }
        })
    }

    #[test]
    fn three_blobs_recovered() {
        let r = kmeans_cluster(&blobs(), 3, 1).unwrap();
        for b in 0..3 {
            let l = r.labels[b * 10];
            assert!(r.labels[b * 10..b * 10 + 10].iter().all(|&x| x == l));
        }
        let mut distinct = r.labels.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 3);
        assert!(r.restart_inertias.iter().all(|&v| v >= r.inertia));
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert!(kmeans_cluster(&x, 4, 0).unwrap().inertia < 1e-24);
        assert!(kmeans_cluster(&x, 5, 0).is_err());
    }

    #[test]
    fn dominant_direction() {
        let x = DMatrix::from_fn(20, 3, |i, j| {
            let t = i as f64;
            match j {
                0 => t,
                1 => 2.0 * t + 1e-3 * ((i * 7) % 3) as f64,
                _ => -t + 1e-3 * ((i * 5) % 4) as f64,
            }
        });
        let p = pca_project(&x, 1).unwrap();
        assert!(p.explained_variance_ratio[0] > 0.99);
    }
}
