use std::fs;
use std::path::Path;

use nalgebra::DVector;
use tlpca::cv::{cv_select_d, cv_select_p, CvGrid, DEFAULT_ALPHAS, DEFAULT_M_FRACTIONS};
use tlpca::dataset::{center, synth_related_pair, synth_sample, DataMatrix, RelatedPairSpec, SyntheticSpec};
use tlpca::evaluate::{dataset_error, principal_angles, projection_distance};
use tlpca::experiment::{rows_csv, run_sweep, summarize, summary_csv, CvSettings, Method, SweepConfig, SweepData};
use tlpca::io::{self, fmt_fraction, MatrixFormat};
use tlpca::pca::{pca_fit, FitKind, SubspaceModel};
use tlpca::tlpca::{tlpca_d_fit, tlpca_p_fit, TlpcaDConfig, TlpcaPConfig};
use tlpca::{Error, Result};

use crate::{AnglesArgs, CvArgs, EvalArgs, FitArgs, FitMethod, MatrixOpts, SweepArgs, SynthArgs};

fn load(path: &Path, opts: &MatrixOpts) -> Result<DataMatrix> {
    io::load_matrix(path, MatrixFormat::from_path(path), opts.transpose)
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Argument(format!("{flag} is required for this method")))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn basis_model(basis: nalgebra::DMatrix<f64>) -> SubspaceModel {
    let d = basis.nrows();
    let k = basis.ncols();
    SubspaceModel {
        basis,
        mean: DVector::zeros(d),
        data_rank: k,
        fit_kind: FitKind::Pca,
        hyperparams: None,
        eigenvalues: Vec::new(),
    }
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let spec = RelatedPairSpec {
        d: args.d,
        m: args.m,
        shared: args.shared,
        n_target: args.n_target,
        n_source: args.n_source,
        noise_sigma: args.sigma,
        seed: args.seed,
    };
    let pair = synth_related_pair(&spec)?;
    fs::create_dir_all(&args.out)?;
    io::save_matrix(&args.out.join("target.raw"), pair.target.values(), MatrixFormat::RawF64)?;
    io::save_matrix(&args.out.join("source.raw"), pair.source.values(), MatrixFormat::RawF64)?;
    println!("target.raw {}x{}", pair.target.d(), pair.target.n());
    println!("source.raw {}x{}", pair.source.d(), pair.source.n());
    if args.n_test > 0 {
        let test = synth_sample(
            &pair.target_basis,
            &SyntheticSpec {
                d: args.d,
                m: args.m,
                noise_sigma: args.sigma,
                n: args.n_test,
                seed: tlpca::linalg::derive_seed(args.seed, tlpca::dataset::STREAM_TARGET_TEST),
            },
        )?;
        io::save_matrix(&args.out.join("test.raw"), test.values(), MatrixFormat::RawF64)?;
        println!("test.raw {}x{}", test.d(), test.n());
    }
    io::save_model(&args.out.join("target_basis.model"), &basis_model(pair.target_basis))?;
    io::save_model(&args.out.join("source_basis.model"), &basis_model(pair.source_basis))?;
    println!("target_basis.model {}x{}", args.d, args.m);
    println!("source_basis.model {}x{}", args.d, args.m);
    Ok(())
}

/// Loads `--source-model`, or pretrains PCA on `--source-data` with `source_k`.
fn source_model_from(
    model: Option<&Path>,
    data: Option<&Path>,
    source_k: usize,
    seed: u64,
    opts: &MatrixOpts,
) -> Result<SubspaceModel> {
    match (model, data) {
        (Some(path), _) => io::load_model(path),
        (None, Some(path)) => pca_fit(&center(&load(path, opts)?), source_k, seed),
        (None, None) => Err(Error::Argument("--source-model or --source-data is required".into())),
    }
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let raw = load(&args.data, &args.matrix)?;
    let target = center(&raw);
    let model = match args.method {
        FitMethod::Pca => pca_fit(&target, args.k, args.seed)?,
        FitMethod::TlpcaP => {
            let alpha = require(args.alpha, "--alpha")?;
            let source = source_model_from(
                args.source_model.as_deref(),
                args.source_data.as_deref(),
                args.source_k.unwrap_or(args.k),
                args.seed,
                &args.matrix,
            )?;
            let m = args.m.unwrap_or(source.k().min(args.k));
            tlpca_p_fit(&target, &source, &TlpcaPConfig { k: args.k, alpha, m, seed: args.seed })?
        }
        FitMethod::TlpcaD => {
            let alpha = require(args.alpha, "--alpha")?;
            let path = args
                .source_data
                .as_deref()
                .ok_or_else(|| Error::Argument("--source-data is required for tlpca-d".into()))?;
            let source = center(&load(path, &args.matrix)?);
            tlpca_d_fit(&target, &source, &TlpcaDConfig { k: args.k, alpha, seed: args.seed })?
        }
    };
    io::save_model(&args.out, &model)?;
    let train = dataset_error(&model, raw.values(), &model.mean)?;
    println!("d={} k={} data_rank={}", model.d(), model.k(), model.data_rank);
    let top: Vec<String> = model.eigenvalues.iter().take(10).map(|v| format!("{v:.6e}")).collect();
    println!("top_eigenvalues={}", top.join(","));
    println!("train_error={} ({:.2}%)", fmt_fraction(train.normalized_error), train.percent());
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let model = io::load_model(&args.model)?;
    let data = load(&args.data, &args.matrix)?;
    let mean = match (&args.mean_model, &args.mean_data) {
        (Some(path), _) => io::load_model(path)?.mean,
        (None, Some(path)) => load(path, &args.matrix)?.values().column_mean(),
        (None, None) => model.mean.clone(),
    };
    let report = dataset_error(&model, data.values(), &mean)?;
    println!("n,normalized_error,percent,mean_matched");
    println!("{},{},{:.2},{}", report.n, fmt_fraction(report.normalized_error), report.percent(), report.mean_matched);
    Ok(())
}

pub fn angles(args: &AnglesArgs) -> Result<()> {
    let a = io::load_model(&args.first)?;
    let b = io::load_model(&args.second)?;
    // the smaller subspace goes first
    let (small, large) = if a.k() <= b.k() { (&a, &b) } else { (&b, &a) };
    let pa = principal_angles(&small.basis, &large.basis)?;
    println!("index,cosine,angle_rad");
    for (j, (c, t)) in pa.cosines.iter().zip(&pa.angles_rad).enumerate() {
        println!("{},{},{}", j + 1, fmt_fraction(*c), fmt_fraction(*t));
    }
    eprintln!("projection_distance={}", fmt_fraction(projection_distance(&a.basis, &b.basis)?));
    Ok(())
}

pub fn cv(args: &CvArgs) -> Result<()> {
    let target = load(&args.data, &args.matrix)?;
    let alphas = args.grid.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
    let table = match args.method {
        FitMethod::TlpcaD => {
            let path = args
                .source_data
                .as_deref()
                .ok_or_else(|| Error::Argument("--source-data is required for tlpca-d".into()))?;
            let source = load(path, &args.matrix)?;
            let grid = CvGrid { alphas, m_fractions: None, fold_count: args.folds, seed: args.seed };
            cv_select_d(&target, &source, args.k, &grid)?
        }
        FitMethod::TlpcaP => {
            let source = source_model_from(
                args.source_model.as_deref(),
                args.source_data.as_deref(),
                args.source_k.unwrap_or(args.k),
                args.seed,
                &args.matrix,
            )?;
            let fractions = args.m_fractions.clone().unwrap_or_else(|| DEFAULT_M_FRACTIONS.to_vec());
            let grid = CvGrid { alphas, m_fractions: Some(fractions), fold_count: args.folds, seed: args.seed };
            cv_select_p(&target, &source, args.k, &grid)?
        }
        FitMethod::Pca => return Err(Error::Argument("plain PCA has no hyperparameters to cross-validate".into())),
    };
    write_or_print(args.out.as_deref(), &table.to_csv())?;
    match table.selected.m {
        Some(m) => eprintln!("selected alpha={} m={m}", table.selected.alpha),
        None => eprintln!("selected alpha={}", table.selected.alpha),
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let methods = args.methods.iter().map(|s| s.parse::<Method>()).collect::<Result<Vec<_>>>()?;
    let cv = CvSettings {
        alphas: args.grid.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec()),
        m_fractions: args.m_fractions.clone().unwrap_or_else(|| DEFAULT_M_FRACTIONS.to_vec()),
        fold_count: args.folds,
    };
    let config =
        SweepConfig { k_values: args.k_values.clone(), methods, repetitions: args.reps, base_seed: args.seed, cv };
    let data = match (&args.target, &args.source, &args.test) {
        (Some(t), Some(s), Some(x)) => SweepData::Provided {
            target_pool: load(t, &args.matrix)?,
            source_pool: load(s, &args.matrix)?,
            test: load(x, &args.matrix)?,
            n_target: args.n_target,
            n_source: args.n_source,
        },
        _ => SweepData::Synthetic {
            pair: RelatedPairSpec {
                d: args.d,
                m: args.m,
                shared: args.shared,
                n_target: args.n_target.unwrap_or(20),
                n_source: args.n_source.unwrap_or(500),
                noise_sigma: args.sigma,
                seed: args.seed,
            },
            n_test: args.n_test,
        },
    };
    let rows = run_sweep(&config, &data)?;
    let summary = summarize(&rows);
    write_or_print(args.out.as_deref(), &rows_csv(&rows))?;
    if let Some(path) = &args.summary {
        fs::write(path, summary_csv(&summary))?;
    }
    for s in &summary {
        eprintln!(
            "{:<32} k={:<5} test {:>6.2}% ± {:.2}   train {:>6.2}% ± {:.2}",
            s.method.name(),
            s.k,
            100.0 * s.test_mean,
            100.0 * s.test_std,
            100.0 * s.train_mean,
            100.0 * s.train_std
        );
    }
    Ok(())
}
