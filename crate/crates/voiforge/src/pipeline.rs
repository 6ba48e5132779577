//! Experiment orchestration: perturb, extract, select, train and score both
//! evaluation scenarios.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use voiforge_core::features::{extract_all, feature_names, ExtractConfig};
use voiforge_core::learn::{
    evaluate_ensemble, fit_ensemble, stratified_split, tune_hyperparams, EvalReport, FittedEnsemble, MeanStd, ModelKind,
    ModelSpec,
};
use voiforge_core::perturb::{apply_modification, Modification, PerturbConfig};
use voiforge_core::rng::derive_seed;
use voiforge_core::robust::{common_fraction, delta_auc, proportion_above, robustness_report, Group, IccReport, Proportion};
use voiforge_core::select::{select_best_with, GridExecutor, Method, SelectionConfig, SelectionResult};
use voiforge_core::{FeatureTable, Mask};

use crate::config::{ExperimentConfig, Scenario};
use crate::dataset::Subject;
use crate::error::{Result, VfError};

/// Runs the method x classifier grid on the rayon pool.
pub struct RayonExecutor;

impl GridExecutor for RayonExecutor {
    fn run<T: Send, F: Fn(usize) -> T + Sync>(&self, jobs: usize, f: F) -> Vec<T> {
        (0..jobs).into_par_iter().map(&f).collect()
    }
}

/// Perturbation seed for one subject and modification, stable under
/// reordering of the cohort.
pub fn subject_seed(master: u64, subject_id: &str, modification: Modification) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update([0]);
    h.update(subject_id.as_bytes());
    h.update([0]);
    h.update(modification.id().as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

pub fn perturb_masks(subjects: &[Subject], m: Modification, cfg: &PerturbConfig, master_seed: u64) -> Result<Vec<Mask>> {
    subjects
        .par_iter()
        .map(|s| {
            apply_modification(&s.mask, m, cfg, subject_seed(master_seed, &s.id, m))
                .map_err(|e| VfError::Data(format!("subject {} / {m}: {e}", s.id)))
        })
        .collect()
}

/// One row per subject, 102 columns.
pub fn extract_table(subjects: &[Subject], masks: &[Mask], bin_count: usize) -> Result<FeatureTable> {
    let cfg = ExtractConfig { bin_count };
    let rows = subjects
        .par_iter()
        .zip(masks)
        .map(|(s, m)| {
            extract_all(&s.image, m, &cfg).map(|v| v.0).map_err(|e| VfError::Data(format!("subject {}: {e}", s.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable::new(
        subjects.iter().map(|s| s.id.clone()).collect(),
        subjects.iter().map(|s| s.label).collect(),
        feature_names().into_iter().map(String::from).collect(),
        rows,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auc: MeanStd,
    pub se: MeanStd,
    pub sp: MeanStd,
}

impl From<&EvalReport> for Metrics {
    fn from(r: &EvalReport) -> Self {
        Metrics { auc: r.auc, se: r.sensitivity, sp: r.specificity }
    }
}

/// A trained candidate: tuned hyperparameters and its ensemble scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub method: Method,
    pub classifier: ModelKind,
    pub features: Vec<String>,
    pub selection_cv_auc: f64,
    pub fallback: bool,
    pub spec: ModelSpec,
    pub tuned_cv_auc: f64,
    pub train: Metrics,
    pub test: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub selection: SelectionResult,
    /// Up to three best pairs; the first is the deployed model.
    pub top: Vec<ModelSummary>,
    pub ensemble: FittedEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub modification: Modification,
    pub icc: IccReport,
    /// Share of ICC above the threshold per group; `None` if the group has no defined ICC.
    pub proportions: Vec<(Group, Option<Proportion>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedRow {
    pub modification: Modification,
    pub method: Method,
    pub classifier: ModelKind,
    pub n_features: usize,
    pub train: Metrics,
    pub test: Metrics,
    pub train_delta: f64,
    pub test_delta: f64,
    #[serde(with = "voiforge_core::nan_serde")]
    pub avg_icc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedModelReport {
    pub rows: Vec<FixedRow>,
    /// Feature selections run while this scenario executed; always 0.
    pub selection_invocations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReselectRow {
    pub modification: Modification,
    pub method: Method,
    pub classifier: ModelKind,
    pub f_b_size: usize,
    pub features: Vec<String>,
    pub common: usize,
    pub f_c: f64,
    pub train: Metrics,
    pub test: Metrics,
    pub train_delta: f64,
    pub test_delta: f64,
    #[serde(with = "voiforge_core::nan_serde")]
    pub avg_icc: f64,
    pub nested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReselectReport {
    pub rows: Vec<ReselectRow>,
    pub failures: Vec<(Modification, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub train_subjects: Vec<String>,
    pub test_subjects: Vec<String>,
    /// Baseline (`none`) first, then each modification that succeeded.
    pub tables: Vec<(Modification, FeatureTable)>,
    pub baseline: Baseline,
    pub robustness: Vec<RobustnessRow>,
    pub fixed_model: Option<FixedModelReport>,
    pub reselect: Option<ReselectReport>,
    /// Modifications that could not be applied or extracted.
    pub perturbation_failures: Vec<(Modification, String)>,
}

/// Counts feature-selection calls so scenarios can prove they did not select.
#[derive(Default)]
pub struct Pipeline {
    selections: AtomicUsize,
}

struct Split<'a> {
    train: &'a FeatureTable,
    test: &'a FeatureTable,
}

impl Pipeline {
    pub fn selection_count(&self) -> usize {
        self.selections.load(Ordering::SeqCst)
    }

    pub fn select(&self, train: &FeatureTable, cfg: &SelectionConfig, classifiers: &[ModelKind]) -> Result<SelectionResult> {
        self.selections.fetch_add(1, Ordering::SeqCst);
        let r = select_best_with(train, cfg, classifiers, &RayonExecutor)?;
        assert!(r.is_nested(), "f_C must lie within f_B within f_A");
        Ok(r)
    }

    /// Tunes `kind` on `features`, fits the fold ensemble and scores it.
    fn train_model(
        &self,
        split: &Split,
        features: &[String],
        kind: ModelKind,
        folds: &[Vec<usize>],
        cfg: &ExperimentConfig,
    ) -> Result<(ModelSpec, f64, FittedEnsemble, Metrics, Metrics)> {
        let cols: Vec<usize> = features
            .iter()
            .map(|f| split.train.position(f).ok_or_else(|| VfError::Data(format!("unknown feature {f}"))))
            .collect::<Result<_>>()?;
        let train = split.train.select_columns(&cols);
        let test = split.test.select_columns(&cols);
        let tuned = tune_hyperparams(&train.rows, &train.labels, kind, folds, cfg.tuning_budget, derive_seed(cfg.seed, 2))?;
        let ens = fit_ensemble(&train, &tuned.spec, folds, cfg.seed)?;
        let tr = Metrics::from(&ens.cv_report(&train)?);
        let te = Metrics::from(&evaluate_ensemble(&ens, &test)?);
        Ok((tuned.spec, tuned.cv_auc, ens, tr, te))
    }

    fn baseline(&self, split: &Split, cfg: &ExperimentConfig) -> Result<Baseline> {
        let selection = self.select(split.train, &cfg.selection_config(), &cfg.classifiers)?;
        let mut top = Vec::new();
        let mut ensemble = None;
        for c in selection.top(3) {
            let (spec, tuned_cv_auc, ens, train, test) =
                self.train_model(split, &c.features, c.classifier, &selection.folds, cfg)?;
            top.push(ModelSummary {
                method: c.method,
                classifier: c.classifier,
                features: c.features.clone(),
                selection_cv_auc: c.cv_auc,
                fallback: c.fallback,
                spec,
                tuned_cv_auc,
                train,
                test,
            });
            ensemble.get_or_insert(ens);
        }
        Ok(Baseline { selection, top, ensemble: ensemble.expect("selection returns at least one candidate") })
    }

    fn fixed_model(
        &self,
        base: &Baseline,
        split_of: &dyn Fn(usize) -> (FeatureTable, FeatureTable),
        mods: &[(Modification, usize, IccReport)],
    ) -> Result<FixedModelReport> {
        let before = self.selection_count();
        let ens = &base.ensemble;
        let cols = &ens.feature_names;
        let best = &base.top[0];
        let mut rows = Vec::new();
        for (m, t, icc) in mods {
            let (train, test) = split_of(*t);
            let pick = |tab: &FeatureTable| -> Result<FeatureTable> {
                let idx: Vec<usize> = cols.iter().map(|f| tab.position(f).expect("schema shared")).collect();
                Ok(tab.select_columns(&idx))
            };
            let tr = Metrics::from(&ens.cv_report(&pick(&train)?)?);
            let te = Metrics::from(&evaluate_ensemble(ens, &pick(&test)?)?);
            rows.push(FixedRow {
                modification: *m,
                method: best.method,
                classifier: best.classifier,
                n_features: cols.len(),
                train: tr,
                test: te,
                train_delta: delta_auc(best.train.auc.mean, tr.auc.mean)?,
                test_delta: delta_auc(best.test.auc.mean, te.auc.mean)?,
                avg_icc: icc.average(cols),
            });
        }
        Ok(FixedModelReport { rows, selection_invocations: self.selection_count() - before })
    }

    fn reselect_one(
        &self,
        base: &Baseline,
        split: &Split,
        m: Modification,
        icc: &IccReport,
        cfg: &ExperimentConfig,
    ) -> Result<ReselectRow> {
        let sel = self.select(split.train, &cfg.selection_config(), &cfg.classifiers)?;
        let (_, _, _, train, test) = self.train_model(split, &sel.f_c, sel.classifier, &sel.folds, cfg)?;
        let best = &base.top[0];
        let common = sel.f_c.iter().filter(|f| best.features.contains(f)).count();
        Ok(ReselectRow {
            modification: m,
            method: sel.method,
            classifier: sel.classifier,
            f_b_size: sel.f_b.len(),
            features: sel.f_c.clone(),
            common,
            f_c: common_fraction(&best.features, &sel.f_c)?,
            train,
            test,
            train_delta: delta_auc(best.train.auc.mean, train.auc.mean)?,
            test_delta: delta_auc(best.test.auc.mean, test.auc.mean)?,
            avg_icc: icc.average(&sel.f_c),
            nested: sel.is_nested(),
        })
    }

    pub fn run(&self, cfg: &ExperimentConfig, subjects: &[Subject]) -> Result<ExperimentRecord> {
        cfg.validate()?;
        let masks: Vec<Mask> = subjects.iter().map(|s| s.mask.clone()).collect();
        let mut tables = vec![(Modification::None, extract_table(subjects, &masks, cfg.bin_count)?)];
        let mut perturbation_failures = Vec::new();
        let mut mods: Vec<Modification> = Vec::new();
        for m in &cfg.modifications {
            if !mods.contains(m) {
                mods.push(*m);
            }
        }
        for &m in &mods {
            let result = perturb_masks(subjects, m, &cfg.perturb, cfg.seed)
                .and_then(|mk| extract_table(subjects, &mk, cfg.bin_count));
            match result {
                Ok(t) => tables.push((m, t)),
                Err(e) => perturbation_failures.push((m, e.to_string())),
            }
        }
        self.run_tables(cfg, tables, perturbation_failures)
    }

    /// Everything after extraction. `tables[0]` must be the unmodified table;
    /// all tables share subjects (in order) and feature names.
    pub fn run_tables(
        &self,
        cfg: &ExperimentConfig,
        tables: Vec<(Modification, FeatureTable)>,
        perturbation_failures: Vec<(Modification, String)>,
    ) -> Result<ExperimentRecord> {
        cfg.validate_settings()?;
        let base_full = match tables.first() {
            Some((Modification::None, t)) => t,
            _ => return Err(VfError::Data("the first table must be the unmodified one".into())),
        };
        for (m, t) in &tables[1..] {
            if t.subjects != base_full.subjects || t.labels != base_full.labels || t.names != base_full.names {
                return Err(VfError::Data(format!("table for {m} does not match the baseline subjects or features")));
            }
        }
        let (train_idx, test_idx) = stratified_split(&base_full.labels, cfg.train_ratio, derive_seed(cfg.seed, 0))?;
        let split_of = |t: usize| (tables[t].1.select_rows(&train_idx), tables[t].1.select_rows(&test_idx));
        let (base_train, base_test) = split_of(0);
        let base_split = Split { train: &base_train, test: &base_test };
        let baseline = self.baseline(&base_split, cfg)?;

        let identity = robustness_report(base_full, base_full, Modification::None.id(), cfg.icc_model)?;
        let mut icc_reports = vec![(Modification::None, 0usize, identity)];
        let mut robustness = Vec::new();
        for (t, (m, table)) in tables.iter().enumerate().skip(1) {
            let icc = robustness_report(base_full, table, m.id(), cfg.icc_model)?;
            let proportions =
                Group::ALL.iter().map(|&g| (g, proportion_above(&icc, cfg.icc_threshold, g).ok())).collect();
            robustness.push(RobustnessRow { modification: *m, icc: icc.clone(), proportions });
            icc_reports.push((*m, t, icc));
        }

        let fixed_model = if cfg.scenarios.contains(&Scenario::FixedModel) {
            Some(self.fixed_model(&baseline, &split_of, &icc_reports)?)
        } else {
            None
        };

        let reselect = if cfg.scenarios.contains(&Scenario::Reselect) {
            let best = &baseline.top[0];
            let mut rows = vec![ReselectRow {
                modification: Modification::None,
                method: best.method,
                classifier: best.classifier,
                f_b_size: baseline.selection.f_b.len(),
                features: best.features.clone(),
                common: best.features.len(),
                f_c: 100.0,
                train: best.train,
                test: best.test,
                train_delta: 0.0,
                test_delta: 0.0,
                avg_icc: icc_reports[0].2.average(&best.features),
                nested: baseline.selection.is_nested(),
            }];
            let outcomes: Vec<(Modification, Result<ReselectRow>)> = icc_reports[1..]
                .par_iter()
                .map(|(m, t, icc)| {
                    let (train, test) = split_of(*t);
                    (*m, self.reselect_one(&baseline, &Split { train: &train, test: &test }, *m, icc, cfg))
                })
                .collect();
            let mut failures = Vec::new();
            for (m, r) in outcomes {
                match r {
                    Ok(row) => rows.push(row),
                    Err(e) => failures.push((m, e.to_string())),
                }
            }
            Some(ReselectReport { rows, failures })
        } else {
            None
        };

        Ok(ExperimentRecord {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: cfg.clone(),
            train_subjects: train_idx.iter().map(|&i| base_full.subjects[i].clone()).collect(),
            test_subjects: test_idx.iter().map(|&i| base_full.subjects[i].clone()).collect(),
            tables,
            baseline,
            robustness,
            fixed_model,
            reselect,
            perturbation_failures,
        })
    }
}
