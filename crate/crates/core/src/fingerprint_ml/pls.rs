//! Single-response partial least squares (NIPALS).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::matrix_json::JsonMatrix;
use crate::error::{Error, Result};

/// Columns whose spread is below this are treated as constant.
const CONSTANT_COLUMN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsModel {
    pub n_components: usize,
    pub n_features: usize,
    /// Feature columns used by the fit (constant columns are dropped).
    pub kept_columns: Vec<usize>,
    pub x_mean: Vec<f64>,
    pub y_mean: f64,
    /// `W`, kept-features x components.
    pub weights: JsonMatrix,
    /// `P`, kept-features x components.
    pub loadings: JsonMatrix,
    /// `R = W (PᵀW)⁻¹`, mapping centred features to scores.
    pub projection: JsonMatrix,
    pub y_loadings: Vec<f64>,
    /// Coefficients over all `n_features` (zero on dropped columns).
    pub coefficients: Vec<f64>,
}

pub(crate) fn column_means(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    (0..x.ncols()).map(|j| x.column(j).sum() / n).collect()
}

pub(crate) fn varying_columns(x: &DMatrix<f64>, means: &[f64]) -> Vec<usize> {
    (0..x.ncols())
        .filter(|&j| {
            let spread = x
                .column(j)
                .iter()
                .fold(0.0f64, |a, v| a.max((v - means[j]).abs()));
            let keep = spread > CONSTANT_COLUMN_TOL * (1.0 + means[j].abs());
            if !keep {
                log::warn!("dropping zero-variance feature column {j}");
            }
            keep
        })
        .collect()
}

pub fn pls_fit(x: &DMatrix<f64>, y: &DVector<f64>, n_components: usize) -> Result<PlsModel> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "{n} feature rows, {} targets",
            y.len()
        )));
    }
    if n < 2 {
        return Err(Error::invalid("PLS needs at least two samples"));
    }
    let x_mean = column_means(x);
    let kept = varying_columns(x, &x_mean);
    let limit = (n - 1).min(kept.len());
    if n_components == 0 || n_components > limit {
        return Err(Error::invalid(format!(
            "{n_components} PLS components requested, at most {limit} available"
        )));
    }
    let y_mean = y.mean();
    let mut xr = DMatrix::from_fn(n, kept.len(), |i, j| x[(i, kept[j])] - x_mean[kept[j]]);
    let mut yr = y.map(|v| v - y_mean);
    let pk = kept.len();
    let mut w_cols = Vec::new();
    let mut p_cols = Vec::new();
    let mut q = Vec::new();
    let first = (xr.transpose() * &yr).norm();
    for a in 0..n_components {
        let w = xr.transpose() * &yr;
        let wn = w.norm();
        if wn <= 1e-13 * first.max(f64::MIN_POSITIVE) {
            log::warn!("PLS stopped after {a} components: response fully explained");
            break;
        }
        let w = w / wn;
        let t = &xr * &w;
        let tt = t.dot(&t);
        let pl = xr.transpose() * &t / tt;
        let qa = yr.dot(&t) / tt;
        xr -= &t * pl.transpose();
        yr -= &t * qa;
        w_cols.push(w);
        p_cols.push(pl);
        q.push(qa);
    }
    let a = w_cols.len();
    let stack = |cols: &[DVector<f64>]| {
        if cols.is_empty() {
            DMatrix::zeros(pk, 0)
        } else {
            DMatrix::from_columns(cols)
        }
    };
    let w = stack(&w_cols);
    let pm = stack(&p_cols);
    let inv = (pm.transpose() * &w)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular PᵀW in PLS".into()))?;
    let r = &w * inv;
    let beta = &r * DVector::from_vec(q.clone());
    let mut coefficients = vec![0.0; p];
    for (j, &c) in kept.iter().enumerate() {
        coefficients[c] = beta[j];
    }
    debug_assert_eq!(r.shape(), (pk, a));
    Ok(PlsModel {
        n_components: a,
        n_features: p,
        kept_columns: kept,
        x_mean,
        y_mean,
        weights: JsonMatrix::from(&w),
        loadings: JsonMatrix::from(&pm),
        projection: JsonMatrix::from(&r),
        y_loadings: q,
        coefficients,
    })
}

pub fn pls_predict(model: &PlsModel, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.ncols() != model.n_features {
        return Err(Error::Dimension(format!(
            "model expects {} features, got {}",
            model.n_features,
            x.ncols()
        )));
    }
    Ok(DVector::from_fn(x.nrows(), |i, _| {
        model.y_mean
            + (0..model.n_features)
                .map(|j| (x[(i, j)] - model.x_mean[j]) * model.coefficients[j])
                .sum::<f64>()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_feature_is_least_squares() {
        let x = DMatrix::from_column_slice(5, 1, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_vec(vec![1.1, 2.9, 5.2, 7.1, 8.8]);
        let m = pls_fit(&x, &y, 1).unwrap();
        // ordinary least squares slope
        let xm = 2.0;
        let ym = y.mean();
        let sxy: f64 = (0..5).map(|i| (x[(i, 0)] - xm) * (y[i] - ym)).sum();
        let sxx: f64 = (0..5).map(|i| (x[(i, 0)] - xm).powi(2)).sum();
        assert!((m.coefficients[0] - sxy / sxx).abs() < 1e-12);
    }

    #[test]
    fn exact_linear_response() {
        let x = DMatrix::from_fn(8, 3, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 + (i * j) as f64 * 0.1
        });
        let y = DVector::from_fn(8, |i, _| {
            2.0 * x[(i, 0)] - x[(i, 1)] + 0.5 * x[(i, 2)] + 3.0
        });
        let m = pls_fit(&x, &y, 3).unwrap();
        let yhat = pls_predict(&m, &x).unwrap();
        assert!((yhat - &y).amax() < 1e-8);
    }

    #[test]
    fn constant_columns_dropped_and_limits_checked() {
        let x = DMatrix::from_fn(4, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_vec(vec![0.0, 1.0, 2.0, 3.0]);
        let m = pls_fit(&x, &y, 1).unwrap();
        assert_eq!(m.kept_columns, [1]);
        assert_eq!(m.coefficients[0], 0.0);
        assert!(pls_fit(&x, &y, 2).is_err());
    }
}
