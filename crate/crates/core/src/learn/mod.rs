//! Linear classifiers, stratified resampling, random-search tuning and
//! k-model ensembles.

mod ensemble;
mod linear;
mod metrics;
mod split;
mod tune;

pub use ensemble::{evaluate_ensemble, fit_ensemble, EnsembleMember, EvalReport, EvalSplit, FittedEnsemble};
pub use linear::{
    balanced_weights, fit_lda_shrinkage, fit_logreg_elasticnet, fit_logreg_traced, logreg_objective, logreg_smooth_gradient,
    sigmoid, LinearModel, LogRegFit, LogRegOptions, ModelKind, ModelSpec, Standardizer,
};
pub use metrics::{roc_auc, sensitivity_specificity, MeanStd};
pub use split::{stratified_kfold, stratified_split, train_indices};
pub use tune::{cv_auc, cv_scores, sample_spec, tune_hyperparams, TuneResult};
