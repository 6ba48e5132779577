use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use voiforge::config::{load_versioned, to_versioned_string};
use voiforge::error::{Result, VfError};
use voiforge::phantom::{write_cohort, PhantomSpec};
use voiforge::pipeline::{extract_table, perturb_masks, RayonExecutor};
use voiforge::tables::{icc_csv_string, read_feature_csv, write_feature_csv};
use voiforge::{dataset, nrrd, report, stl, svg, ExperimentConfig};
use voiforge_core::features::{extract_all, feature_names, ExtractConfig};
use voiforge_core::grid::resample_mask_isotropic;
use voiforge_core::learn::{
    evaluate_ensemble, fit_ensemble, stratified_kfold, tune_hyperparams, EvalReport, FittedEnsemble, ModelKind, TuneResult,
};
use voiforge_core::mesh::{fit_ellipsoid, marching_cubes, perlin_randomize, smooth_mesh, RandomizeParams, TriMesh};
use voiforge_core::perturb::{apply_modification, Modification, PerturbConfig};
use voiforge_core::robust::{robustness_report, IccModel};
use voiforge_core::select::{select_best_with, SelectionConfig, SelectionResult};
use voiforge_core::FeatureTable;

#[derive(Parser)]
#[command(name = "voiforge", version, about = "VOI perturbation and radiomics robustness toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Dilate,
    Erode,
    Smooth,
    Randomize,
    Ellipsoid,
}

#[derive(Clone, Copy, ValueEnum)]
enum IccArg {
    C31,
    A21,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lr,
    Lda,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one VOI modification to a mask.
    Perturb {
        #[arg(long, value_enum)]
        op: Op,
        /// Radius, sigma or displacement in mm (ignored for ellipsoid).
        #[arg(long, default_value_t = 1.0)]
        mm: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also dump the perturbed surface (randomize, ellipsoid) as ASCII STL.
        #[arg(long)]
        stl: Option<PathBuf>,
    },
    /// Extract the 102 features of one image/mask pair, or of every subject
    /// in a manifest.
    #[command(group(clap::ArgGroup::new("source").required(true).args(["image", "manifest"])))]
    Extract {
        #[arg(long, requires = "mask")]
        image: Option<PathBuf>,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["image", "mask", "subject", "label", "raw"])]
        manifest: Option<PathBuf>,
        #[arg(long, requires = "manifest")]
        subtype: Option<String>,
        /// Perturb every manifest mask first (dilate1, erode2, smooth1, rand2, ellipsoid, ...).
        #[arg(long, requires = "manifest")]
        modify: Option<String>,
        /// Master seed for randomised modifications.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        subject: Option<String>,
        #[arg(long)]
        label: Option<u8>,
        /// Skip isotropic resampling, z-scoring and largest-lesion selection.
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
    },
    /// Per-feature ICC between two feature tables.
    Icc {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        modified: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "c31")]
        model: IccArg,
        /// Write an SVG bar chart here.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
    },
    /// Two-stage feature selection.
    Select {
        #[arg(long)]
        features: PathBuf,
        /// Selection config JSON (schema_version plus selection settings).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["lr", "lda"])]
        classifiers: Vec<ModelArg>,
    },
    /// Tune and fit the fold ensemble on the selected features.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        selection: PathBuf,
        /// Defaults to the classifier chosen during selection.
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 50)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trained ensemble on a feature table.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic cohort (NRRD files and manifest.csv).
    Phantom {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-emit all report files from a record.json.
    Report {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Lr => ModelKind::Lr,
            ModelArg::Lda => ModelKind::Lda,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TrainedModel {
    ensemble: FittedEnsemble,
    tuning: TuneResult,
    cv: EvalReport,
}

fn write_text(path: &Path, text: String) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| VfError::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| VfError::io(path, e))
}

fn perturb(op: Op, mm: f64, seed: u64, input: &Path, out: &Path, stl_path: Option<&Path>) -> Result<()> {
    if !(mm > 0.0) {
        return Err(VfError::Config("--mm must be positive".into()));
    }
    let mask = nrrd::read_mask(input)?;
    let cfg = PerturbConfig {
        morph_radius_mm: [mm; 2],
        smooth_sigma_mm: [mm; 2],
        rand_distance_mm: [mm; 2],
        ..PerturbConfig::default()
    };
    let m = match op {
        Op::Dilate => Modification::Dilate1,
        Op::Erode => Modification::Erode1,
        Op::Smooth => Modification::Smooth1,
        Op::Randomize => Modification::Rand1,
        Op::Ellipsoid => Modification::Ellipsoid,
    };
    nrrd::write_mask(&apply_modification(&mask, m, &cfg, seed)?, out)?;
    if let Some(p) = stl_path {
        let iso = resample_mask_isotropic(&mask, mask.geometry().min_spacing())?;
        let mesh = marching_cubes(&iso)?;
        let surface = match op {
            Op::Randomize => {
                let params = RandomizeParams { max_distance_mm: mm, seed, ..RandomizeParams::new(mm, seed) };
                perlin_randomize(&mesh, &params)?
            }
            Op::Ellipsoid => {
                let s = cfg.mesh_smoothing;
                let e = fit_ellipsoid(&smooth_mesh(&mesh, s.iterations, s.factor), &cfg.ellipsoid)?;
                let mut uv = TriMesh::uv_ellipsoid([0.0; 3], e.semi_lengths, 32, 64);
                for v in &mut uv.vertices {
                    let local = *v;
                    *v = e.center;
                    for k in 0..3 {
                        for a in 0..3 {
                            v[a] += local[k] * e.axes[k][a];
                        }
                    }
                }
                uv
            }
            _ => return Err(VfError::Config("--stl applies to randomize and ellipsoid".into())),
        };
        stl::write_stl(&surface, "voiforge", p)?;
    }
    Ok(())
}

fn extract_one(
    image: &Path,
    mask: &Path,
    bins: usize,
    out: &Path,
    subject: Option<String>,
    label: u8,
    raw: bool,
    spacing: f64,
) -> Result<()> {
    if label > 1 {
        return Err(VfError::Config("--label must be 0 or 1".into()));
    }
    let mut img = nrrd::read_image(image)?;
    let mut m = nrrd::read_mask(mask)?;
    if !raw {
        (img, m) = dataset::preprocess(&img, &m, spacing)?;
    }
    let v = extract_all(&img, &m, &ExtractConfig { bin_count: bins })?;
    let id = subject.unwrap_or_else(|| image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let table = FeatureTable::new(
        vec![id],
        vec![label],
        feature_names().into_iter().map(String::from).collect(),
        vec![v.0],
    )?;
    write_feature_csv(&table, out)
}

fn extract_manifest(
    manifest: &Path,
    subtype: Option<&str>,
    modify: Option<&str>,
    seed: u64,
    bins: usize,
    spacing: f64,
    out: &Path,
) -> Result<()> {
    let m = match modify {
        Some(s) => s.parse::<Modification>().map_err(|e| VfError::Config(e.to_string()))?,
        None => Modification::None,
    };
    let subjects = dataset::load_manifest(manifest, subtype, spacing)?;
    let masks = perturb_masks(&subjects, m, &PerturbConfig::default(), seed)?;
    write_feature_csv(&extract_table(&subjects, &masks, bins)?, out)
}

fn train(
    features: &Path,
    selection: &Path,
    model: Option<ModelArg>,
    seed: u64,
    folds: usize,
    budget: usize,
    out: &Path,
) -> Result<()> {
    let table = read_feature_csv(features)?;
    let sel: SelectionResult = load_versioned(selection)?;
    let kind = model.map(ModelKind::from).unwrap_or(sel.classifier);
    let cols: Vec<usize> = sel
        .f_c
        .iter()
        .map(|f| table.position(f).ok_or_else(|| VfError::Data(format!("feature {f} missing from {}", features.display()))))
        .collect::<Result<_>>()?;
    let train = table.select_columns(&cols);
    let folds = stratified_kfold(&train.labels, folds, seed)?;
    let tuning = tune_hyperparams(&train.rows, &train.labels, kind, &folds, budget, seed)?;
    let ensemble = fit_ensemble(&train, &tuning.spec, &folds, seed)?;
    let cv = ensemble.cv_report(&train)?;
    println!("{}: CV AUC {:.3} +/- {:.3}", tuning.spec.describe(), cv.auc.mean, cv.auc.std);
    write_text(out, to_versioned_string(&TrainedModel { ensemble, tuning, cv })?)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Perturb { op, mm, seed, input, out, stl } => perturb(op, mm, seed, &input, &out, stl.as_deref()),
        Command::Extract { image, mask, manifest, subtype, modify, seed, bins, out, subject, label, raw, spacing } => {
            if bins == 0 || !(spacing > 0.0) {
                return Err(VfError::Config("--bins and --spacing must be positive".into()));
            }
            match (manifest, image, mask) {
                (Some(man), _, _) => {
                    extract_manifest(&man, subtype.as_deref(), modify.as_deref(), seed, bins, spacing, &out)
                }
                (None, Some(img), Some(mask)) => {
                    extract_one(&img, &mask, bins, &out, subject, label.unwrap_or(0), raw, spacing)
                }
                _ => Err(VfError::Config("give --manifest or both --image and --mask".into())),
            }
        }
        Command::Icc { baseline, modified, out, model, plot, threshold } => {
            let b = read_feature_csv(&baseline)?;
            let m = read_feature_csv(&modified)?;
            let model = match model {
                IccArg::C31 => IccModel::ConsistencyC31,
                IccArg::A21 => IccModel::AgreementA21,
            };
            let name = modified.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let r = robustness_report(&b, &m, &name, model)?;
            write_text(&out, icc_csv_string(&r)?)?;
            if let Some(p) = plot {
                write_text(&p, svg::icc_bars(&r, threshold))?;
            }
            Ok(())
        }
        Command::Select { features, config, out, classifiers } => {
            let table = read_feature_csv(&features)?;
            let cfg: SelectionConfig = match config {
                Some(p) => load_versioned(&p)?,
                None => SelectionConfig::default(),
            };
            cfg.validate().map_err(|e| VfError::Config(e.to_string()))?;
            let kinds: Vec<ModelKind> = classifiers.into_iter().map(ModelKind::from).collect();
            let r = select_best_with(&table, &cfg, &kinds, &RayonExecutor)?;
            for (i, c) in r.top(3).iter().enumerate() {
                println!("{}. {} + {}: CV AUC {:.3}, {} features", i + 1, c.method, c.classifier, c.cv_auc, c.features.len());
            }
            write_text(&out, to_versioned_string(&r)?)
        }
        Command::Train { features, selection, model, seed, folds, budget, out } => {
            train(&features, &selection, model, seed, folds, budget, &out)
        }
        Command::Evaluate { model, features, out } => {
            let m: TrainedModel = load_versioned(&model)?;
            let table = read_feature_csv(&features)?;
            let cols: Vec<usize> = m
                .ensemble
                .feature_names
                .iter()
                .map(|f| table.position(f).ok_or_else(|| VfError::Data(format!("feature {f} missing"))))
                .collect::<Result<_>>()?;
            let r = evaluate_ensemble(&m.ensemble, &table.select_columns(&cols))?;
            println!(
                "AUC {:.3} +/- {:.3}  SE {:.3} +/- {:.3}  SP {:.3} +/- {:.3}",
                r.auc.mean, r.auc.std, r.sensitivity.mean, r.sensitivity.std, r.specificity.mean, r.specificity.std
            );
            match out {
                Some(p) => write_text(&p, to_versioned_string(&r)?),
                None => Ok(()),
            }
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let record = voiforge::run_experiment(&cfg)?;
            let best = &record.baseline.top[0];
            println!(
                "baseline {} + {} ({} features): test AUC {:.3}; reports in {}",
                best.method,
                best.classifier,
                best.features.len(),
                best.test.auc.mean,
                cfg.output_dir.display()
            );
            for (m, e) in &record.perturbation_failures {
                eprintln!("warning: {m} skipped: {e}");
            }
            Ok(())
        }
        Command::Phantom { spec, out } => {
            let spec: PhantomSpec = load_versioned(&spec)?;
            spec.validate()?;
            let manifest = write_cohort(&spec, &out)?;
            println!("wrote {} subjects; manifest {}", spec.n_subjects, manifest.display());
            Ok(())
        }
        Command::Report { record, out } => {
            let r = report::read_record(&record)?;
            report::emit_reports(&r, &out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
