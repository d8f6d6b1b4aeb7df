//! Fingerprints over time grids and the models trained on them.
//!
//! This layer works in `f64`: fingerprints are produced from generic
//! simulations and converted on the way in.

mod cluster;
mod cv;
mod features;
mod fingerprint;
mod gp;
mod krr;
mod matrix_json;
mod pipeline;
mod pls;

pub use cluster::{
    elbow_curve, kmeans_cluster, pca_project, KMeansResult, PcaResult, KMEANS_RESTARTS,
};
pub use cv::{
    fold_assignment, holdout_split, kfold_cv, mse, pls_component_sweep, r2_score, rmse,
    select_entries, select_rows, CvReport, FittedModel, FoldResult, ModelSpec,
};
pub use features::{ts_feature_matrix, ts_features, FEATURE_NAMES, MIN_SERIES_LEN, N_FEATURES};
pub use fingerprint::{
    compute_fingerprint, feature_table, observable_series, rdm_trajectory, time_grid, Evolver,
    Fingerprint, ObservableSpec,
};
pub use gp::{gp_optimize, GpHyper, GpPoint, GpState, N_CANDIDATES, N_INITIAL};
pub use krr::{krr_fit, krr_predict, rbf_kernel, KrrModel, RIDGE_FLOOR};
pub use matrix_json::JsonMatrix;
pub use pipeline::{
    build_hamiltonian, load_integrals, two_orbital_observable, EmbeddingMode, EmbeddingSpec,
    MeasurementProblem, MeasurementScore,
};
pub use pls::{pls_fit, pls_predict, PlsModel};
