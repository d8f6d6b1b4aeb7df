//! Kernel ridge regression with a Gaussian (RBF) kernel.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::matrix_json::JsonMatrix;
use crate::error::{Error, Result};

/// Smallest ridge accepted; lower requests are raised to it.
pub const RIDGE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrrModel {
    pub length_scale: f64,
    pub ridge: f64,
    pub y_mean: f64,
    pub x_train: JsonMatrix,
    pub alpha: Vec<f64>,
}

/// `exp(-|a - b|² / (2 l²))` between rows of `a` and `b`.
pub fn rbf_kernel(a: &DMatrix<f64>, b: &DMatrix<f64>, length_scale: f64) -> DMatrix<f64> {
    let g = 0.5 / (length_scale * length_scale);
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        let d2: f64 = (0..a.ncols())
            .map(|k| (a[(i, k)] - b[(j, k)]).powi(2))
            .sum();
        (-g * d2).exp()
    })
}

pub fn krr_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    length_scale: f64,
    ridge: f64,
) -> Result<KrrModel> {
    if x.nrows() != y.len() || x.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{} rows, {} targets",
            x.nrows(),
            y.len()
        )));
    }
    if !(length_scale > 0.0) || !(ridge > 0.0) {
        return Err(Error::invalid(
            "kernel length scale and ridge must be positive",
        ));
    }
    let ridge = if ridge < RIDGE_FLOOR {
        log::warn!("ridge {ridge:e} raised to {RIDGE_FLOOR:e}");
        RIDGE_FLOOR
    } else {
        ridge
    };
    let y_mean = y.mean();
    let mut k = rbf_kernel(x, x, length_scale);
    for i in 0..k.nrows() {
        k[(i, i)] += ridge;
    }
    let chol = k
        .cholesky()
        .ok_or_else(|| Error::Numerical("kernel matrix is not positive definite".into()))?;
    let alpha = chol.solve(&y.map(|v| v - y_mean));
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::Numerical("ill-conditioned kernel system".into()));
    }
    Ok(KrrModel {
        length_scale,
        ridge,
        y_mean,
        x_train: JsonMatrix::from(x),
        alpha: alpha.iter().copied().collect(),
    })
}

pub fn krr_predict(model: &KrrModel, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    let train = model.x_train.to_matrix()?;
    if x.ncols() != train.ncols() {
        return Err(Error::Dimension(format!(
            "model expects {} features, got {}",
            train.ncols(),
            x.ncols()
        )));
    }
    let k = rbf_kernel(x, &train, model.length_scale);
    Ok(k * DVector::from_vec(model.alpha.clone()) + DVector::from_element(x.nrows(), model.y_mean))
}
