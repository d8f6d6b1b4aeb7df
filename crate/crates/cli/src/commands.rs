use std::path::PathBuf;

use clap::{Args, ValueEnum};
use nalgebra::{DMatrix, DVector};
use qfp_core::chem_io::{
    hydrogen_chain, load_features, s_orbital_integrals, save_features, write_fcidump, FeatureTable,
    MoleculeSource,
};
use qfp_core::fingerprint_ml::{
    elbow_curve, gp_optimize, kfold_cv, kmeans_cluster, pca_project, pls_component_sweep,
    rdm_trajectory, ts_features, CvReport, Evolver, MeasurementProblem, ModelSpec,
};
use qfp_core::mean_field::{scf_converged, ScfOptions};
use qfp_core::quantum_sim::InitialState;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{check_h2_range, ModelChoice, PipelineConfig};
use crate::error::{CliError, CliResult, Context};
use crate::output::{self, align_targets, load_targets, targets_csv, OutDir, Provenance};
use crate::pipeline::{self, fingerprint_rows, h2_id, h2_manifest, require_targets, Dataset, Row};

#[derive(Debug, Args, Serialize)]
pub struct GenH2Args {
    /// Smallest separation, bohr.
    #[arg(long)]
    pub rmin: f64,
    /// Largest separation, bohr.
    #[arg(long)]
    pub rmax: f64,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// MO-basis FCIDUMPs (RHF orbitals, so the files are orthonormal), a
/// manifest referencing them and the separations as targets.
pub fn gen_h2(args: &GenH2Args) -> CliResult<()> {
    check_h2_range(args.rmin, args.rmax, args.count)?;
    let out = OutDir::create(&args.out)?;
    let manifest = h2_manifest(args.rmin, args.rmax, args.count, |i, _| {
        MoleculeSource::Fcidump {
            path: format!("{}.fcidump", h2_id(i)).into(),
        }
    });
    for e in &manifest.entries {
        let z = e.target.unwrap();
        let ctx = || format!("molecule '{}'", e.id);
        let ao = s_orbital_integrals(&hydrogen_chain(2, &[z])).context(ctx)?;
        let mf = scf_converged(&ao, &ScfOptions::default()).context(ctx)?;
        write_fcidump(
            &ao.transform(&mf.coefficients),
            out.path(&format!("{}.fcidump", e.id)),
        )
        .context(ctx)?;
    }
    let mut text = manifest.to_json();
    text.push('\n');
    out.write(output::MANIFEST, text)?;
    let ids: Vec<String> = manifest.entries.iter().map(|e| e.id.clone()).collect();
    let z: Vec<f64> = manifest.entries.iter().map(|e| e.target.unwrap()).collect();
    out.write(output::TARGETS, targets_csv("z", &ids, &z))?;
    out.write_json(output::PROVENANCE, &Provenance::new("gen-h2", None, args))?;
    println!(
        "wrote {} H2 geometries to {}",
        args.count,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct FingerprintArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also run the exact propagator and report the largest deviation.
    #[arg(long)]
    pub compare_exact: bool,
}

#[derive(Serialize)]
struct Deviation {
    max_abs_diff: f64,
    molecules: Vec<MoleculeDeviation>,
}

#[derive(Serialize)]
struct MoleculeDeviation {
    molecule_id: String,
    max_abs_diff: f64,
}

pub fn fingerprint(args: &FingerprintArgs) -> CliResult<()> {
    let (cfg, dir) = PipelineConfig::load(&args.config)?;
    if args.compare_exact && cfg.evolver == Evolver::Exact {
        return Err(CliError::Config(
            "--compare-exact needs a trotter evolver".into(),
        ));
    }
    let ds = Dataset::load(&cfg.dataset, &dir)?;
    let times = cfg.time_grid.points()?;
    let rows = fingerprint_rows(&ds, &cfg, &times, cfg.evolver, cfg.initial_state)?;
    let out = OutDir::create(&args.out)?;
    write_rows(&out, &ds.label, &times, &rows)?;
    if args.compare_exact {
        let exact_cfg = PipelineConfig {
            noise: None,
            ..cfg.clone()
        };
        let exact = fingerprint_rows(&ds, &exact_cfg, &times, Evolver::Exact, cfg.initial_state)?;
        let molecules: Vec<MoleculeDeviation> = rows
            .iter()
            .zip(&exact)
            .map(|(a, b)| MoleculeDeviation {
                molecule_id: a.id.clone(),
                max_abs_diff: a
                    .values
                    .iter()
                    .zip(&b.values)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            })
            .collect();
        let max_abs_diff = molecules.iter().map(|m| m.max_abs_diff).fold(0.0, f64::max);
        println!("max |trotter - exact| = {max_abs_diff:e}");
        out.write_json(
            output::EXACT_DEVIATION,
            &Deviation {
                max_abs_diff,
                molecules,
            },
        )?;
    }
    out.write_json(
        output::PROVENANCE,
        &Provenance::new("fingerprint", Some(&cfg), args),
    )?;
    println!(
        "wrote {} fingerprints x {} times to {}",
        rows.len(),
        times.len(),
        args.out.display()
    );
    Ok(())
}

/// features.csv, plus targets.csv when every molecule has a target.
fn write_rows(out: &OutDir, label: &str, times: &[f64], rows: &[Row]) -> CliResult<()> {
    let mut table = FeatureTable::new(times.to_vec());
    for r in rows {
        table
            .push(r.id.clone(), r.values.clone())
            .context(|| format!("molecule '{}'", r.id))?;
    }
    save_features(&table, out.path(output::FEATURES)).context(|| "writing features".into())?;
    if !rows.is_empty() && rows.iter().all(|r| r.target.is_some()) {
        let ids: Vec<String> = rows.iter().map(|r| r.id.clone()).collect();
        out.write(
            output::TARGETS,
            targets_csv(label, &ids, &require_targets(rows)?),
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// The time series itself, one column per grid time.
    Raw,
    /// Summary statistics of each series.
    #[value(name = "ts-features", alias = "ts_features")]
    TsFeatures,
}

fn design_matrix(table: &FeatureTable, rep: Representation) -> CliResult<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = match rep {
        Representation::Raw => table.values.clone(),
        Representation::TsFeatures => table
            .ids
            .iter()
            .zip(&table.values)
            .map(|(id, v)| {
                ts_features(v, &table.times)
                    .map(|f| f.to_vec())
                    .context(|| format!("molecule '{id}'"))
            })
            .collect::<CliResult<_>>()?,
    };
    let cols = match rep {
        Representation::Raw => table.times.len(),
        Representation::TsFeatures => qfp_core::fingerprint_ml::N_FEATURES,
    };
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pls,
    Krr,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, value_enum, default_value = "pls")]
    pub model: ModelKind,
    /// Fixed PLS component count; without it the count is chosen by CV.
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long, default_value_t = 14)]
    pub max_components: usize,
    #[arg(long, default_value_t = 1.0)]
    pub length_scale: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "raw")]
    pub representation: Representation,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn train(args: &TrainArgs) -> CliResult<()> {
    let choice = match (args.model, args.components) {
        (ModelKind::Pls, Some(n_components)) => ModelChoice::Pls { n_components },
        (ModelKind::Pls, None) => ModelChoice::PlsSweep {
            max_components: args.max_components,
        },
        (ModelKind::Krr, Some(_)) => {
            return Err(CliError::Config("--components applies to pls only".into()))
        }
        (ModelKind::Krr, None) => ModelChoice::Krr {
            length_scale: args.length_scale,
            ridge: args.ridge,
        },
    };
    choice.validate()?;
    if args.folds < 2 {
        return Err(CliError::Config("--folds must be at least 2".into()));
    }
    let table = load_features(&args.features).context(|| "loading features".into())?;
    let targets = load_targets(&args.targets)?;
    let y = align_targets(&table.ids, &targets)?;
    let x = design_matrix(&table, args.representation)?;
    let out = OutDir::create(&args.out)?;
    let report = cross_validate(&out, &table.ids, &x, &y, &choice, args.folds, args.seed)?;
    out.write_json(output::PROVENANCE, &Provenance::new("train", None, args))?;
    println!(
        "{:?} on '{}': CV R2 {:.4}, RMSE {:.4e} over {} samples",
        report.model, targets.label, report.r2, report.rmse, report.n_samples
    );
    Ok(())
}

/// Runs CV for `choice` and writes cv_report.json, the plot table and,
/// for a component sweep, the sweep table.
fn cross_validate(
    out: &OutDir,
    ids: &[String],
    x: &DMatrix<f64>,
    y: &[f64],
    choice: &ModelChoice,
    k: usize,
    seed: u64,
) -> CliResult<CvReport> {
    let y = DVector::from_column_slice(y);
    let ctx = || "cross-validation".to_string();
    let report = match *choice {
        ModelChoice::Pls { n_components } => {
            kfold_cv(ids, x, &y, &ModelSpec::Pls { n_components }, k, seed).context(ctx)?
        }
        ModelChoice::Krr {
            length_scale,
            ridge,
        } => kfold_cv(
            ids,
            x,
            &y,
            &ModelSpec::Krr {
                length_scale,
                ridge,
            },
            k,
            seed,
        )
        .context(ctx)?,
        ModelChoice::PlsSweep { max_components } => {
            let (best, reports) =
                pls_component_sweep(ids, x, &y, max_components, k, seed).context(ctx)?;
            let mut text = String::from("n_components,r2,rmse\n");
            for (a, r) in reports.iter().enumerate() {
                text.push_str(&format!("{},{},{}\n", a + 1, r.r2, r.rmse));
            }
            out.write(output::COMPONENT_SWEEP, text)?;
            reports.into_iter().nth(best).unwrap()
        }
    };
    out.write_json(output::CV_REPORT, &report)?;
    let mut fold_of = vec![0usize; report.n_samples];
    for (f, fold) in report.folds.iter().enumerate() {
        for id in &fold.validation_ids {
            fold_of[report.ids.iter().position(|i| i == id).unwrap()] = f;
        }
    }
    let mut text = String::from("molecule_id,actual,predicted,fold\n");
    for i in 0..report.n_samples {
        text.push_str(&format!(
            "{},{},{},{}\n",
            report.ids[i], report.actual[i], report.predicted[i], fold_of[i]
        ));
    }
    out.write(output::PREDICTIONS, text)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Last grid time; values are times.
    #[value(name = "time_max", alias = "time-max")]
    TimeMax,
    /// Values are `<electrons>:<orbitals>`.
    #[value(name = "active_space", alias = "active-space")]
    ActiveSpace,
    /// Trotter repetitions; needs a trotter evolver.
    #[value(name = "trotter_r", alias = "trotter-r")]
    TrotterR,
    /// hf_ground, homo_lumo_excited or half_occupied.
    #[value(name = "initial_state", alias = "initial-state")]
    InitialState,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub axis: SweepAxis,
    #[arg(long, num_args = 1.., required = true)]
    pub values: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

/// The config with `axis` set to `value`.
fn sweep_config(cfg: &PipelineConfig, axis: SweepAxis, value: &str) -> CliResult<PipelineConfig> {
    let bad = |what: &str| CliError::Config(format!("'{value}' is not a valid {what}"));
    let mut c = cfg.clone();
    match axis {
        SweepAxis::TimeMax => c.time_grid.stop = value.parse().map_err(|_| bad("time"))?,
        SweepAxis::ActiveSpace => {
            let (e, o) = value.split_once(':').ok_or_else(|| bad("active space"))?;
            c.embedding.active_electrons = e.parse().map_err(|_| bad("active space"))?;
            c.embedding.active_orbitals = o.parse().map_err(|_| bad("active space"))?;
        }
        SweepAxis::TrotterR => {
            let Evolver::Trotter { r, .. } = &mut c.evolver else {
                return Err(CliError::Config(
                    "trotter_r sweep needs a trotter evolver".into(),
                ));
            };
            *r = value.parse().map_err(|_| bad("repetition count"))?;
        }
        SweepAxis::InitialState => {
            c.initial_state = serde_json::from_value(serde_json::Value::String(value.into()))
                .map_err(|_| bad("initial state"))?
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let (cfg, dir) = PipelineConfig::load(&args.config)?;
    if args.axis == SweepAxis::TrotterR && cfg.evolver == Evolver::Exact {
        return Err(CliError::Config(
            "trotter_r sweep needs a trotter evolver".into(),
        ));
    }
    let ds = Dataset::load(&cfg.dataset, &dir)?;
    let out = OutDir::create(&args.out)?;
    let configs: Vec<CliResult<PipelineConfig>> = args
        .values
        .iter()
        .map(|v| sweep_config(&cfg, args.axis, v))
        .collect();

    // Time-max grids share start and step, so each is a prefix of the longest.
    let shared: Option<CliResult<(Vec<f64>, Vec<Row>)>> = (args.axis == SweepAxis::TimeMax)
        .then(|| {
            configs
                .iter()
                .filter_map(|c| c.as_ref().ok())
                .max_by(|a, b| a.time_grid.stop.total_cmp(&b.time_grid.stop))
                .map(|longest| {
                    let times = longest.time_grid.points()?;
                    let rows =
                        fingerprint_rows(&ds, longest, &times, cfg.evolver, cfg.initial_state)?;
                    Ok((times, rows))
                })
        })
        .flatten();

    let mut summary = format!("{},r2,rmse,n_components,status\n", axis_name(args.axis));
    let mut first_err = None;
    let mut n_ok = 0;
    for (value, c) in args.values.iter().zip(configs) {
        let result = c.and_then(|c| {
            let sub = out.sub(&format!("{}={value}", axis_name(args.axis)))?;
            let times = c.time_grid.points()?;
            let rows = match &shared {
                Some(Ok((_, rows))) => rows
                    .iter()
                    .map(|r| Row {
                        values: r.values[..times.len()].to_vec(),
                        ..r.clone()
                    })
                    .collect(),
                Some(Err(e)) => return Err(CliError::Data(format!("shared fingerprints: {e}"))),
                None => fingerprint_rows(&ds, &c, &times, c.evolver, c.initial_state)?,
            };
            write_rows(&sub, &ds.label, &times, &rows)?;
            let ids: Vec<String> = rows.iter().map(|r| r.id.clone()).collect();
            let y = require_targets(&rows)?;
            let x = DMatrix::from_fn(rows.len(), times.len(), |i, j| rows[i].values[j]);
            let report = cross_validate(&sub, &ids, &x, &y, &c.model, c.cv.k, c.cv.seed)?;
            sub.write_json(
                output::PROVENANCE,
                &Provenance::new("sweep", Some(&c), args),
            )?;
            Ok(report)
        });
        match result {
            Ok(r) => {
                n_ok += 1;
                let comps = match r.model {
                    ModelSpec::Pls { n_components } => n_components.to_string(),
                    ModelSpec::Krr { .. } => String::new(),
                };
                summary.push_str(&format!("{value},{},{},{comps},ok\n", r.r2, r.rmse));
                println!("{}={value}: CV R2 {:.4}", axis_name(args.axis), r.r2);
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                summary.push_str(&format!("{value},,,,{msg}\n"));
                eprintln!("{}={value}: {e}", axis_name(args.axis));
                first_err.get_or_insert(e);
            }
        }
    }
    out.write(output::SUMMARY, summary)?;
    out.write_json(
        output::PROVENANCE,
        &Provenance::new("sweep", Some(&cfg), args),
    )?;
    match first_err {
        Some(e) if n_ok == 0 => Err(e),
        _ => Ok(()),
    }
}

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::TimeMax => "time_max",
        SweepAxis::ActiveSpace => "active_space",
        SweepAxis::TrotterR => "trotter_r",
        SweepAxis::InitialState => "initial_state",
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Principal components kept before clustering; 0 skips PCA.
    #[arg(long, default_value_t = 2)]
    pub pca_dims: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest k in the elbow report.
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value = "ts-features")]
    pub representation: Representation,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cluster(args: &ClusterArgs) -> CliResult<()> {
    let table = load_features(&args.features).context(|| "loading features".into())?;
    let x = design_matrix(&table, args.representation)?;
    let out = OutDir::create(&args.out)?;
    let points = if args.pca_dims > 0 {
        let pca = pca_project(&x, args.pca_dims).context(|| "PCA".into())?;
        let mut text = String::from("molecule_id");
        for j in 0..args.pca_dims {
            text.push_str(&format!(",pc{}", j + 1));
        }
        text.push('\n');
        for (i, id) in table.ids.iter().enumerate() {
            text.push_str(id);
            for j in 0..args.pca_dims {
                text.push_str(&format!(",{}", pca.scores[(i, j)]));
            }
            text.push('\n');
        }
        out.write(output::PCA, text)?;
        pca.scores
    } else {
        x
    };
    let km = kmeans_cluster(&points, args.k, args.seed).context(|| "k-means".into())?;
    let elbow = elbow_curve(&points, args.k_max, args.seed).context(|| "elbow curve".into())?;

    let mut labels = String::from("molecule_id,cluster\n");
    for (id, l) in table.ids.iter().zip(&km.labels) {
        labels.push_str(&format!("{id},{l}\n"));
    }
    out.write(output::LABELS, labels)?;

    let mut means = String::from("cluster,size");
    for t in &table.times {
        means.push_str(&format!(",t={t}"));
    }
    means.push('\n');
    for c in 0..args.k {
        let members: Vec<usize> = (0..table.n_rows()).filter(|&i| km.labels[i] == c).collect();
        means.push_str(&format!("{c},{}", members.len()));
        for j in 0..table.times.len() {
            let m = members.iter().map(|&i| table.values[i][j]).sum::<f64>()
                / members.len().max(1) as f64;
            means.push_str(&format!(",{m}"));
        }
        means.push('\n');
    }
    out.write(output::CLUSTER_MEANS, means)?;

    let mut text = String::from("k,inertia\n");
    for (k, inertia) in &elbow {
        text.push_str(&format!("{k},{inertia}\n"));
    }
    out.write(output::ELBOW, text)?;
    out.write_json(output::PROVENANCE, &Provenance::new("cluster", None, args))?;
    let sizes: Vec<usize> = (0..args.k)
        .map(|c| km.labels.iter().filter(|&&l| l == c).count())
        .collect();
    println!(
        "k = {}: cluster sizes {sizes:?}, inertia {:.4e}",
        args.k, km.inertia
    );
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct BestOperator {
    /// Diagonal entries, then the upper triangle row by row.
    parameters: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    sign_pattern: String,
    validation_mse: f64,
    validation_r2: f64,
    evaluations: usize,
}

/// Symmetric `n x n` matrix from its free parameters.
pub fn symmetric_from_params(n: usize, p: &[f64]) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(n, n);
    for i in 0..n {
        o[(i, i)] = p[i];
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            o[(i, j)] = p[k];
            o[(j, i)] = p[k];
            k += 1;
        }
    }
    o
}

pub fn sign_pattern(p: &[f64]) -> String {
    let s: Vec<&str> = p
        .iter()
        .map(|v| {
            if *v > 0.0 {
                "+"
            } else if *v < 0.0 {
                "-"
            } else {
                "0"
            }
        })
        .collect();
    format!("({})", s.join(","))
}

pub fn optimize_measurement(args: &OptimizeArgs) -> CliResult<()> {
    let (cfg, dir) = PipelineConfig::load(&args.config)?;
    let ModelChoice::Krr {
        length_scale,
        ridge,
    } = cfg.model
    else {
        return Err(CliError::Config(
            "measurement optimization scores a krr model".into(),
        ));
    };
    if cfg.noise.is_some() {
        return Err(CliError::Config(
            "measurement optimization does not support noise".into(),
        ));
    }
    let ds = Dataset::load(&cfg.dataset, &dir)?;
    let times = cfg.time_grid.points()?;
    let evolver = cfg.evolver;
    let initial: InitialState = cfg.initial_state;
    let per_molecule: Vec<(Row, Vec<DMatrix<f64>>)> = ds
        .manifest
        .entries
        .par_iter()
        .map(|e| {
            let eh = pipeline::hamiltonian(e, &ds.manifest, &cfg)?;
            let target = pipeline::target(e, &eh, cfg.target)?;
            let rdms = rdm_trajectory(&eh, initial, &times, evolver)
                .context(|| format!("molecule '{}'", e.id))?;
            let row = Row {
                id: e.id.clone(),
                target,
                values: Vec::new(),
            };
            Ok((row, rdms))
        })
        .collect::<CliResult<_>>()?;
    let (rows, rdms): (Vec<Row>, Vec<_>) = per_molecule.into_iter().unzip();
    let targets = require_targets(&rows)?;
    let ids: Vec<String> = rows.into_iter().map(|r| r.id).collect();
    let m = &cfg.measurement;
    let problem = MeasurementProblem::new(
        ids,
        rdms,
        targets,
        m.validation_fraction,
        m.test_fraction,
        cfg.cv.seed,
        length_scale,
        ridge,
    )
    .context(|| "measurement problem".into())?;
    let n = cfg.embedding.active_orbitals;
    let dim = n * (n + 1) / 2;
    let bounds = vec![m.bound; dim];
    let state = gp_optimize(
        |p| {
            problem
                .score(&symmetric_from_params(n, p))
                .map(|s| s.validation_mse)
        },
        &bounds,
        args.budget,
        args.seed,
    )
    .context(|| "GP optimization".into())?;
    let best = state.best_point();
    let o = symmetric_from_params(n, &best.x);
    let score = problem
        .score(&o)
        .context(|| "scoring best operator".into())?;
    let out = OutDir::create(&args.out)?;
    out.write_json(output::GP_HISTORY, &state)?;
    let report = BestOperator {
        parameters: best.x.clone(),
        matrix: (0..n)
            .map(|i| (0..n).map(|j| o[(i, j)]).collect())
            .collect(),
        sign_pattern: sign_pattern(&best.x),
        validation_mse: score.validation_mse,
        validation_r2: score.validation_r2,
        evaluations: state.points.len(),
    };
    out.write_json(output::BEST_OPERATOR, &report)?;
    out.write_json(
        output::PROVENANCE,
        &Provenance::new("optimize-measurement", Some(&cfg), args),
    )?;
    println!(
        "best operator {:?} {} with validation MSE {:.4e}",
        report.parameters, report.sign_pattern, report.validation_mse
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_fill_symmetric_matrix() {
        let o = symmetric_from_params(2, &[0.4, 0.8, -0.8]);
        assert_eq!(o, DMatrix::from_row_slice(2, 2, &[0.4, -0.8, -0.8, 0.8]));
        let o3 = symmetric_from_params(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!((o3[(0, 1)], o3[(0, 2)], o3[(1, 2)]), (4.0, 5.0, 6.0));
        assert_eq!(o3, o3.transpose());
    }

    #[test]
    fn signs() {
        assert_eq!(sign_pattern(&[0.4, 0.8, -0.8]), "(+,+,-)");
        assert_eq!(sign_pattern(&[0.0]), "(0)");
    }
}
