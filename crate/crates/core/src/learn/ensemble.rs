use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::linear::{LinearModel, ModelSpec, Standardizer};
use super::metrics::{roc_auc, sensitivity_specificity, MeanStd};
use super::split::train_indices;
use crate::table::FeatureTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    /// Statistics of this member's training fold only.
    pub standardizer: Standardizer,
    pub model: LinearModel,
}

impl EnsembleMember {
    pub fn probability(&self, row: &[f64]) -> f64 {
        self.model.probability(&self.standardizer.transform_row(row))
    }
}

/// One model per CV fold, each trained on the other folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedEnsemble {
    pub feature_names: Vec<String>,
    pub spec: ModelSpec,
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
    pub members: Vec<EnsembleMember>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    TrainCv,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split: EvalSplit,
    pub auc: MeanStd,
    pub sensitivity: MeanStd,
    pub specificity: MeanStd,
    /// `[auc, se, sp]` for each member.
    pub per_model: Vec<[f64; 3]>,
}

impl EvalReport {
    fn from_parts(split: EvalSplit, per_model: Vec<[f64; 3]>) -> EvalReport {
        let col = |k: usize| MeanStd::of(&per_model.iter().map(|m| m[k]).collect::<Vec<_>>());
        EvalReport { split, auc: col(0), sensitivity: col(1), specificity: col(2), per_model }
    }
}

fn metrics(member: &EnsembleMember, rows: &[&Vec<f64>], labels: &[u8]) -> Result<[f64; 3]> {
    let probs: Vec<f64> = rows.iter().map(|r| member.probability(r)).collect();
    let auc = roc_auc(&probs, labels)?;
    let pred: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();
    let (se, sp) = sensitivity_specificity(&pred, labels);
    Ok([auc, se, sp])
}

/// Fits one member per fold of `train`.
pub fn fit_ensemble(train: &FeatureTable, spec: &ModelSpec, folds: &[Vec<usize>], seed: u64) -> Result<FittedEnsemble> {
    spec.validate()?;
    let n = train.n_subjects();
    let mut members = Vec::with_capacity(folds.len());
    for fold in folds {
        if fold.iter().any(|&i| i >= n) {
            return Err(Error::SubjectMismatch(format!("fold index out of range for {n} subjects")));
        }
        let idx = train_indices(n, fold);
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| train.rows[i].clone()).collect();
        let labels: Vec<u8> = idx.iter().map(|&i| train.labels[i]).collect();
        let standardizer = Standardizer::fit(&rows)?;
        let model = spec.fit(&standardizer.transform(&rows), &labels)?;
        members.push(EnsembleMember { standardizer, model });
    }
    Ok(FittedEnsemble { feature_names: train.names.clone(), spec: *spec, folds: folds.to_vec(), seed, members })
}

impl FittedEnsemble {
    fn check_names(&self, table: &FeatureTable) -> Result<()> {
        if table.names != self.feature_names {
            return Err(Error::FeatureMismatch(format!(
                "ensemble expects {:?}, table has {:?}",
                self.feature_names, table.names
            )));
        }
        Ok(())
    }

    /// Mean posterior over members.
    pub fn probability(&self, row: &[f64]) -> f64 {
        self.members.iter().map(|m| m.probability(row)).sum::<f64>() / self.members.len() as f64
    }

    /// Each member scored on its own held-out fold of the training table.
    pub fn cv_report(&self, train: &FeatureTable) -> Result<EvalReport> {
        self.check_names(train)?;
        let mut per = Vec::new();
        for (m, fold) in self.members.iter().zip(&self.folds) {
            let rows: Vec<&Vec<f64>> = fold.iter().map(|&i| &train.rows[i]).collect();
            let labels: Vec<u8> = fold.iter().map(|&i| train.labels[i]).collect();
            per.push(metrics(m, &rows, &labels)?);
        }
        Ok(EvalReport::from_parts(EvalSplit::TrainCv, per))
    }
}

/// Every member scores the whole test table with its saved statistics.
pub fn evaluate_ensemble(ensemble: &FittedEnsemble, test: &FeatureTable) -> Result<EvalReport> {
    ensemble.check_names(test)?;
    let rows: Vec<&Vec<f64>> = test.rows.iter().collect();
    let per = ensemble.members.iter().map(|m| metrics(m, &rows, &test.labels)).collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_parts(EvalSplit::Test, per))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{stratified_kfold, ModelKind};
    use alloc::string::ToString;
    use alloc::vec;

    fn table(n: usize, offset: f64, gap: f64) -> FeatureTable {
        let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let rows = (0..n)
            .map(|i| {
                let t = ((i as f64) * 0.618 + offset).fract();
                vec![f64::from(labels[i]) * gap + t, 100.0 + 10.0 * t * t]
            })
            .collect();
        let subjects = (0..n).map(|i| format!("s{i}")).collect();
        FeatureTable::new(subjects, labels, vec!["a".to_string(), "b".to_string()], rows).unwrap()
    }

    #[test]
    fn separable_test_set() {
        let train = table(40, 0.0, 2.0);
        let test = table(12, 0.3, 2.0);
        let folds = stratified_kfold(&train.labels, 5, 0).unwrap();
        for kind in ModelKind::ALL {
            let e = fit_ensemble(&train, &kind.default_spec(), &folds, 0).unwrap();
            assert_eq!(e.members.len(), 5);
            let r = evaluate_ensemble(&e, &test).unwrap();
            assert_eq!(r.auc.mean, 1.0);
            assert_eq!(r.split, EvalSplit::Test);
            let cv = e.cv_report(&train).unwrap();
            assert_eq!(cv.auc.mean, 1.0);
        }
    }

    #[test]
    fn identical_members_have_zero_spread() {
        let train = table(40, 0.0, 0.5);
        let test = table(20, 0.5, 0.5);
        let folds = stratified_kfold(&train.labels, 5, 0).unwrap();
        let mut e = fit_ensemble(&train, &ModelKind::Lr.default_spec(), &folds, 0).unwrap();
        let first = e.members[0].clone();
        for m in &mut e.members {
            *m = first.clone();
        }
        let r = evaluate_ensemble(&e, &test).unwrap();
        assert_eq!((r.auc.std, r.sensitivity.std, r.specificity.std), (0.0, 0.0, 0.0));
    }

    #[test]
    fn members_use_training_fold_statistics_only() {
        let train = table(40, 0.0, 1.0);
        let folds = stratified_kfold(&train.labels, 5, 2).unwrap();
        let e = fit_ensemble(&train, &ModelKind::Lda.default_spec(), &folds, 2).unwrap();
        for (m, fold) in e.members.iter().zip(&folds) {
            let idx = train_indices(40, fold);
            let rows: Vec<Vec<f64>> = idx.iter().map(|&i| train.rows[i].clone()).collect();
            assert_eq!(m.standardizer, Standardizer::fit(&rows).unwrap());
        }
    }

    #[test]
    fn feature_mismatch() {
        let train = table(40, 0.0, 1.0);
        let folds = stratified_kfold(&train.labels, 5, 2).unwrap();
        let e = fit_ensemble(&train, &ModelKind::Lr.default_spec(), &folds, 2).unwrap();
        let other = train.select_columns(&[1, 0]);
        assert!(matches!(evaluate_ensemble(&e, &other), Err(Error::FeatureMismatch(_))));
    }
}
