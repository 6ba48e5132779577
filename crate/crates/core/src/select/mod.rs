//! Two-stage feature selection: a correlation filter with univariate rescue
//! inside CV folds, then nine selectors scored by CV AUC.

mod filters;
mod stage1;
mod stage2;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

pub use filters::{fscore, gini_importance, mutual_information, relieff};
pub use stage1::{average_ranks, spearman_matrix, stage1_subset, stage1_ufs, univariate_score, FoldDetail, SpearmanMatrix};
pub use stage2::{stage2_select, Stage2Outcome};

use crate::learn::{stratified_kfold, ModelKind, ModelSpec};
use crate::table::FeatureTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    FScore,
    Relief,
    #[serde(rename = "MI")]
    Mi,
    Gini,
    #[serde(rename = "LASSO")]
    Lasso,
    #[serde(rename = "GA")]
    Ga,
    #[serde(rename = "SBS")]
    Sbs,
    #[serde(rename = "SFS")]
    Sfs,
    #[serde(rename = "RFE")]
    Rfe,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::FScore,
        Method::Relief,
        Method::Mi,
        Method::Gini,
        Method::Lasso,
        Method::Ga,
        Method::Sbs,
        Method::Sfs,
        Method::Rfe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::FScore => "FScore",
            Method::Relief => "Relief",
            Method::Mi => "MI",
            Method::Gini => "Gini",
            Method::Lasso => "LASSO",
            Method::Ga => "GA",
            Method::Sbs => "SBS",
            Method::Sfs => "SFS",
            Method::Rfe => "RFE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown selection method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub r_c: f64,
    pub k_folds: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Upper bound on filter prefix length and SFS set size.
    pub max_features: usize,
    pub relief_neighbours: usize,
    pub mi_bins: usize,
    pub gini_trees: usize,
    pub ga_population: usize,
    pub ga_generations: usize,
    pub ga_mutation: f64,
    pub rfe_step: usize,
    pub lasso_c_grid: Vec<f64>,
    pub wrapper_tolerance: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            r_c: 0.9,
            k_folds: 5,
            methods: Method::ALL.to_vec(),
            seed: 0,
            max_features: 15,
            relief_neighbours: 10,
            mi_bins: 10,
            gini_trees: 200,
            ga_population: 30,
            ga_generations: 25,
            ga_mutation: 0.05,
            rfe_step: 1,
            lasso_c_grid: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
            wrapper_tolerance: 1e-4,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_c > 0.0 && self.r_c <= 1.0) {
            return Err(Error::InvalidParameter(format!("r_c = {} outside (0, 1]", self.r_c)));
        }
        if self.k_folds < 2 {
            return Err(Error::InvalidParameter(format!("k_folds = {}", self.k_folds)));
        }
        if self.max_features == 0 || self.mi_bins == 0 || self.gini_trees == 0 || self.ga_population < 2 {
            return Err(Error::InvalidParameter("selector sizes must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.ga_mutation) {
            return Err(Error::InvalidParameter(format!("ga_mutation = {}", self.ga_mutation)));
        }
        Ok(())
    }
}

/// One scored (method, classifier) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub method: Method,
    pub classifier: ModelKind,
    pub features: Vec<String>,
    pub cv_auc: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub f_a: Vec<String>,
    pub f_b: Vec<String>,
    pub f_c: Vec<String>,
    pub method: Method,
    pub classifier: ModelKind,
    pub cv_auc: f64,
    /// Every successful pair, best first.
    pub candidates: Vec<Candidate>,
    /// Pairs that failed, with the reason.
    pub failures: Vec<(Method, ModelKind, String)>,
    pub folds: Vec<Vec<usize>>,
    pub fold_detail: Vec<FoldDetail>,
    pub r_c: f64,
    pub seed: u64,
}

impl SelectionResult {
    pub fn top(&self, k: usize) -> &[Candidate] {
        &self.candidates[..k.min(self.candidates.len())]
    }

    /// `f_C` within `f_B` within `f_A`.
    pub fn is_nested(&self) -> bool {
        self.f_c.iter().all(|f| self.f_b.contains(f)) && self.f_b.iter().all(|f| self.f_a.contains(f))
    }
}

/// Runs independent jobs; results must come back in job order.
pub trait GridExecutor {
    fn run<T: Send, F: Fn(usize) -> T + Sync>(&self, jobs: usize, f: F) -> Vec<T>;
}

pub struct Sequential;

impl GridExecutor for Sequential {
    fn run<T: Send, F: Fn(usize) -> T + Sync>(&self, jobs: usize, f: F) -> Vec<T> {
        (0..jobs).map(f).collect()
    }
}

/// Best first: higher AUC, fewer features, method name, classifier name.
pub fn rank_candidates(c: &mut [Candidate]) {
    c.sort_by(|a, b| {
        b.cv_auc
            .total_cmp(&a.cv_auc)
            .then(a.features.len().cmp(&b.features.len()))
            .then(a.method.name().cmp(b.method.name()))
            .then(a.classifier.name().cmp(b.classifier.name()))
    });
}

pub fn select_best(table: &FeatureTable, cfg: &SelectionConfig, classifiers: &[ModelKind]) -> Result<SelectionResult> {
    select_best_with(table, cfg, classifiers, &Sequential)
}

/// Stage I, then every method x classifier pair through Stage II.
pub fn select_best_with<E: GridExecutor>(
    table: &FeatureTable,
    cfg: &SelectionConfig,
    classifiers: &[ModelKind],
    exec: &E,
) -> Result<SelectionResult> {
    cfg.validate()?;
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    if methods.len() < 2 {
        return Err(Error::InvalidParameter("at least two selection methods are required".into()));
    }
    if classifiers.is_empty() {
        return Err(Error::InvalidParameter("no classifier given".into()));
    }
    if table.n_features() == 0 {
        return Err(Error::Empty("feature table"));
    }
    let columns: Vec<Vec<f64>> = (0..table.n_features()).map(|j| table.column(j)).collect();
    let folds = stratified_kfold(&table.labels, cfg.k_folds, cfg.seed)?;
    let (fb, fold_detail) = stage1_ufs(&columns, &table.labels, cfg.r_c, &folds)?;
    let fb_cols: Vec<Vec<f64>> = fb.iter().map(|&j| columns[j].clone()).collect();

    let jobs: Vec<(Method, ModelKind)> =
        methods.iter().flat_map(|&m| classifiers.iter().map(move |&c| (m, c))).collect();
    let outcomes = exec.run(jobs.len(), |k| {
        let (m, c) = jobs[k];
        let spec: ModelSpec = c.default_spec();
        stage2_select(m, &fb_cols, &table.labels, &folds, &spec, cfg)
    });
    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for ((m, c), out) in jobs.into_iter().zip(outcomes) {
        match out {
            Ok(o) => candidates.push(Candidate {
                method: m,
                classifier: c,
                features: o.features.iter().map(|&j| table.names[fb[j]].clone()).collect(),
                cv_auc: o.cv_auc,
                fallback: o.fallback,
            }),
            Err(e) => failures.push((m, c, format!("{e}"))),
        }
    }
    if candidates.is_empty() {
        return Err(Error::SelectionFailed("every method/classifier pair failed".into()));
    }
    rank_candidates(&mut candidates);
    let best = candidates[0].clone();
    let result = SelectionResult {
        f_a: table.names.clone(),
        f_b: fb.iter().map(|&j| table.names[j].clone()).collect(),
        f_c: best.features.clone(),
        method: best.method,
        classifier: best.classifier,
        cv_auc: best.cv_auc,
        candidates,
        failures,
        folds,
        fold_detail,
        r_c: cfg.r_c,
        seed: cfg.seed,
    };
    assert!(result.is_nested(), "selection must satisfy f_C within f_B within f_A");
    Ok(result)
}
