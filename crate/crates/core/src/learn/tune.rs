use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::linear::{ModelKind, ModelSpec, Standardizer};
use super::metrics::roc_auc;
use super::split::train_indices;
use crate::{Error, Result};

fn take(rows: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| rows[i].clone()).collect()
}

/// Held-out decision scores for every fold, each fold standardized with
/// statistics from its own training part only.
pub fn cv_scores(x: &[Vec<f64>], y: &[u8], folds: &[Vec<usize>], spec: &ModelSpec) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(folds.len());
    for fold in folds {
        let train = train_indices(x.len(), fold);
        let xt = take(x, &train);
        let yt: Vec<u8> = train.iter().map(|&i| y[i]).collect();
        let st = Standardizer::fit(&xt)?;
        let model = spec.fit(&st.transform(&xt), &yt)?;
        out.push(fold.iter().map(|&i| model.decision(&st.transform_row(&x[i]))).collect());
    }
    Ok(out)
}

/// Mean held-out AUC across folds.
pub fn cv_auc(x: &[Vec<f64>], y: &[u8], folds: &[Vec<usize>], spec: &ModelSpec) -> Result<f64> {
    let scores = cv_scores(x, y, folds, spec)?;
    let mut total = 0.0;
    for (fold, s) in folds.iter().zip(&scores) {
        let yf: Vec<u8> = fold.iter().map(|&i| y[i]).collect();
        total += roc_auc(s, &yf)?;
    }
    Ok(total / folds.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub spec: ModelSpec,
    pub cv_auc: f64,
    pub evaluated: usize,
}

/// One random-search candidate for `kind`.
pub fn sample_spec(kind: ModelKind, rng: &mut crate::rng::Rng) -> ModelSpec {
    match kind {
        ModelKind::Lr => {
            let c = 10f64.powf(rng.random_range(-3.0..=3.0));
            ModelSpec::LogReg { c, l1_ratio: rng.random_range(0.0..=1.0) }
        }
        ModelKind::Lda => ModelSpec::Lda { shrinkage: rng.random_range(0.0..=1.0) },
    }
}

/// Seeded random search; the first candidate reaching the best mean CV AUC wins.
pub fn tune_hyperparams(
    x: &[Vec<f64>],
    y: &[u8],
    kind: ModelKind,
    folds: &[Vec<usize>],
    budget: usize,
    seed: u64,
) -> Result<TuneResult> {
    if budget == 0 {
        return Err(Error::InvalidParameter("budget must be at least 1".into()));
    }
    let mut rng = crate::rng::seeded(seed);
    let mut best: Option<TuneResult> = None;
    let mut evaluated = 0;
    let mut last_err = None;
    for _ in 0..budget {
        let spec = sample_spec(kind, &mut rng);
        match cv_auc(x, y, folds, &spec) {
            Ok(auc) => {
                evaluated += 1;
                if best.as_ref().is_none_or(|b| auc > b.cv_auc) {
                    best = Some(TuneResult { spec, cv_auc: auc, evaluated: 0 });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(mut b) => {
            b.evaluated = evaluated;
            Ok(b)
        }
        None => Err(last_err.unwrap_or(Error::Empty("candidates"))),
    }
}
