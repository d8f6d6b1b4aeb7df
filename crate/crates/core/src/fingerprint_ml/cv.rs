//! Seeded k-fold cross-validation and hold-out splits.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::krr::{krr_fit, krr_predict, KrrModel};
use super::pls::{pls_fit, pls_predict, PlsModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Pls { n_components: usize },
    Krr { length_scale: f64, ridge: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Pls(PlsModel),
    Krr(KrrModel),
}

impl FittedModel {
    pub fn fit(spec: &ModelSpec, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        match *spec {
            ModelSpec::Pls { n_components } => Ok(FittedModel::Pls(pls_fit(x, y, n_components)?)),
            ModelSpec::Krr {
                length_scale,
                ridge,
            } => Ok(FittedModel::Krr(krr_fit(x, y, length_scale, ridge)?)),
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        match self {
            FittedModel::Pls(m) => pls_predict(m, x),
            FittedModel::Krr(m) => krr_predict(m, x),
        }
    }
}

/// `1 - SS_res / SS_tot`; defined as 0 (and flagged) when `SS_tot = 0`.
pub fn r2_score(y: &[f64], yhat: &[f64]) -> (f64, bool) {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    if ss_tot == 0.0 {
        (0.0, true)
    } else {
        (1.0 - ss_res / ss_tot, false)
    }
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> f64 {
    (y.iter()
        .zip(yhat)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / y.len() as f64)
        .sqrt()
}

pub fn mse(y: &[f64], yhat: &[f64]) -> f64 {
    y.iter()
        .zip(yhat)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / y.len() as f64
}

/// Sample indices ordered by id, then Fisher-Yates shuffled with `seed`.
fn shuffled_by_id(ids: &[String], seed: u64) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    if let Some(w) = order.windows(2).find(|w| ids[w[0]] == ids[w[1]]) {
        return Err(Error::Dataset(format!(
            "duplicate sample id '{}'",
            ids[w[0]]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    Ok(order)
}

/// Validation index sets for `k` contiguous chunks of the shuffled order.
pub fn fold_assignment(ids: &[String], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "{k}-fold cross-validation needs k >= 2"
        )));
    }
    if ids.len() < k {
        return Err(Error::Dataset(format!(
            "{} samples cannot fill {k} folds",
            ids.len()
        )));
    }
    let order = shuffled_by_id(ids, seed)?;
    let (base, extra) = (ids.len() / k, ids.len() % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Seeded train/validation/test split; validation and test sizes are
/// rounded fractions of the sample count.
pub fn holdout_split(
    ids: &[String],
    validation_fraction: f64,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&validation_fraction)
        || !(0.0..1.0).contains(&test_fraction)
        || validation_fraction + test_fraction >= 1.0
    {
        return Err(Error::invalid(
            "split fractions must be in [0, 1) and sum below 1",
        ));
    }
    let order = shuffled_by_id(ids, seed)?;
    let n = ids.len() as f64;
    let n_val = (validation_fraction * n).round() as usize;
    let n_test = (test_fraction * n).round() as usize;
    let n_train = ids.len().saturating_sub(n_val + n_test);
    if n_train == 0 || (validation_fraction > 0.0 && n_val == 0) {
        return Err(Error::Dataset(format!(
            "{} samples are too few for the split",
            ids.len()
        )));
    }
    let train = order[..n_train].to_vec();
    let val = order[n_train..n_train + n_val].to_vec();
    let test = order[n_train + n_val..].to_vec();
    Ok((train, val, test))
}

pub fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

pub fn select_entries(y: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_iterator(rows.len(), rows.iter().map(|&i| y[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub train_ids: Vec<String>,
    pub validation_ids: Vec<String>,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: ModelSpec,
    pub k: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub folds: Vec<FoldResult>,
    /// Pooled out-of-fold explained variance.
    pub r2: f64,
    pub rmse: f64,
    /// Set when the targets have zero variance and `r2` is the 0 convention.
    pub r2_degenerate: bool,
    /// Out-of-fold prediction per sample, in input order.
    pub ids: Vec<String>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

pub fn kfold_cv(
    ids: &[String],
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    spec: &ModelSpec,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    if x.nrows() != ids.len() || y.len() != ids.len() {
        return Err(Error::Dimension(format!(
            "{} ids, {} feature rows, {} targets",
            ids.len(),
            x.nrows(),
            y.len()
        )));
    }
    let folds = fold_assignment(ids, k, seed)?;
    let n = ids.len();
    let results: Vec<Result<(Vec<usize>, Vec<usize>, Vec<f64>)>> = folds
        .par_iter()
        .map(|val| {
            let mut in_val = vec![false; n];
            for &i in val {
                in_val[i] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&i| !in_val[i]).collect();
            let model =
                FittedModel::fit(spec, &select_rows(x, &train), &select_entries(y, &train))?;
            let pred = model.predict(&select_rows(x, val))?;
            Ok((train, val.clone(), pred.iter().copied().collect()))
        })
        .collect();
    let mut predicted = vec![0.0; n];
    let mut fold_results = Vec::with_capacity(k);
    for r in results {
        let (train, val, pred) = r?;
        for (&i, &p) in val.iter().zip(&pred) {
            predicted[i] = p;
        }
        let mut train_ids: Vec<String> = train.iter().map(|&i| ids[i].clone()).collect();
        train_ids.sort();
        fold_results.push(FoldResult {
            train_ids,
            validation_ids: val.iter().map(|&i| ids[i].clone()).collect(),
            predictions: pred,
        });
    }
    let actual: Vec<f64> = y.iter().copied().collect();
    let (r2, degenerate) = r2_score(&actual, &predicted);
    Ok(CvReport {
        model: *spec,
        k,
        seed,
        n_samples: n,
        folds: fold_results,
        r2,
        rmse: rmse(&actual, &predicted),
        r2_degenerate: degenerate,
        ids: ids.to_vec(),
        actual,
        predicted,
    })
}

/// Cross-validates PLS with `1..=max_components` and returns the sweep and
/// the index of the highest pooled R² (ties keep fewer components).
pub fn pls_component_sweep(
    ids: &[String],
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    max_components: usize,
    k: usize,
    seed: u64,
) -> Result<(usize, Vec<CvReport>)> {
    let n_train_min = ids.len() - ids.len().div_ceil(k);
    let cap = max_components
        .min(x.ncols())
        .min(n_train_min.saturating_sub(1));
    if cap == 0 {
        return Err(Error::Dataset("too few samples or features for PLS".into()));
    }
    let mut reports = Vec::with_capacity(cap);
    for a in 1..=cap {
        reports.push(kfold_cv(
            ids,
            x,
            y,
            &ModelSpec::Pls { n_components: a },
            k,
            seed,
        )?);
    }
    let best = reports
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.r2 > reports[b].r2 { i } else { b });
    Ok((best, reports))
}
