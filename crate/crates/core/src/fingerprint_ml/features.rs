//! Fixed per-series time-series features.

use nalgebra::DMatrix;

use super::fingerprint::Fingerprint;
use crate::error::{Error, Result};

pub const N_FEATURES: usize = 16;
pub const MIN_SERIES_LEN: usize = 9;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "mean",
    "variance",
    "min",
    "max",
    "final_minus_initial",
    "mean_abs_diff",
    "autocorr_lag1",
    "autocorr_lag2",
    "autocorr_lag4",
    "dft1_re",
    "dft1_im",
    "dft2_re",
    "dft2_im",
    "dft3_re",
    "dft3_im",
    "trend_slope",
];

fn autocorr(x: &[f64], mean: f64, lag: usize) -> f64 {
    let denom: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = (0..x.len() - lag)
        .map(|i| (x[i] - mean) * (x[i + lag] - mean))
        .sum();
    num / denom
}

/// Features of one series sampled at `times`.
pub fn ts_features(x: &[f64], times: &[f64]) -> Result<[f64; N_FEATURES]> {
    let n = x.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::invalid(format!(
            "series of {n} points is shorter than {MIN_SERIES_LEN}"
        )));
    }
    if times.len() != n {
        return Err(Error::Dimension(format!(
            "{n} values on a {}-point grid",
            times.len()
        )));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mad = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (nf - 1.0);
    let mut f = [0.0; N_FEATURES];
    f[0] = mean;
    f[1] = var;
    f[2] = min;
    f[3] = max;
    f[4] = x[n - 1] - x[0];
    f[5] = mad;
    f[6] = autocorr(x, mean, 1);
    f[7] = autocorr(x, mean, 2);
    f[8] = autocorr(x, mean, 4);
    for k in 1..=3 {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * (k * j) as f64 / nf;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        f[7 + 2 * k] = re;
        f[8 + 2 * k] = im;
    }
    let tm = times.iter().sum::<f64>() / nf;
    let stt: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    let sty: f64 = times
        .iter()
        .zip(x)
        .map(|(t, v)| (t - tm) * (v - mean))
        .sum();
    f[15] = if stt > 0.0 { sty / stt } else { 0.0 };
    Ok(f)
}

/// One row of [`FEATURE_NAMES`] features per fingerprint.
pub fn ts_feature_matrix(fps: &[Fingerprint]) -> Result<DMatrix<f64>> {
    let Some(first) = fps.first() else {
        return Ok(DMatrix::zeros(0, N_FEATURES));
    };
    let mut x = DMatrix::zeros(fps.len(), N_FEATURES);
    for (i, fp) in fps.iter().enumerate() {
        if fp.times != first.times {
            return Err(Error::Dataset(format!(
                "fingerprint '{}' uses a different time grid",
                fp.molecule_id
            )));
        }
        let f = ts_features(&fp.values, &fp.times)?;
        for (j, v) in f.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    Ok(x)
}
