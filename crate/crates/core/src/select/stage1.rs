use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::learn::{roc_auc, train_indices};
use crate::{Error, Result};

/// Average ranks (1-based), ties share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Absolute Spearman correlations between columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpearmanMatrix {
    pub n: usize,
    /// Row-major `n x n`.
    pub values: Vec<f64>,
    /// Constant columns; their correlation with anything else is reported as 0.
    pub constant: Vec<usize>,
}

impl SpearmanMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

pub fn spearman_matrix(columns: &[Vec<f64>]) -> Result<SpearmanMatrix> {
    let n = columns.len();
    let m = columns.first().map(|c| c.len()).unwrap_or(0);
    if n == 0 {
        return Err(Error::Empty("feature table"));
    }
    if m < 3 {
        return Err(Error::InvalidParameter(alloc::format!("{m} subjects, need at least 3")));
    }
    let mut centred = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut constant = Vec::new();
    for (j, c) in columns.iter().enumerate() {
        let r = average_ranks(c);
        let mean = (m as f64 + 1.0) / 2.0;
        let d: Vec<f64> = r.iter().map(|v| v - mean).collect();
        let nrm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm == 0.0 {
            constant.push(j);
        }
        centred.push(d);
        norms.push(nrm);
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let v = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let num: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
                (num / (norms[i] * norms[j])).abs().min(1.0)
            };
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(SpearmanMatrix { n, values, constant })
}

/// Single-feature AUC, orientation corrected.
pub fn univariate_score(column: &[f64], labels: &[u8]) -> Result<f64> {
    let a = roc_auc(column, labels)?;
    Ok(a.max(1.0 - a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldDetail {
    /// Features correlated above the cutoff with at least one other feature.
    pub correlated: Vec<usize>,
    /// Survivors of this fold.
    pub kept: Vec<usize>,
    pub constant: Vec<usize>,
}

/// Stage I on one set of subjects. A correlated feature survives when no
/// feature it is correlated with scores higher; on an exact tie only the
/// lowest column index survives.
pub fn stage1_subset(columns: &[Vec<f64>], labels: &[u8], r_c: f64) -> Result<FoldDetail> {
    let corr = spearman_matrix(columns)?;
    let scores = columns.iter().map(|c| univariate_score(c, labels)).collect::<Result<Vec<_>>>()?;
    let n = columns.len();
    let mut correlated = Vec::new();
    let mut kept = Vec::new();
    for i in 0..n {
        let partners: Vec<usize> = (0..n).filter(|&j| j != i && corr.get(i, j) > r_c).collect();
        if partners.is_empty() {
            kept.push(i);
            continue;
        }
        correlated.push(i);
        let wins = partners.iter().all(|&j| scores[i] > scores[j] || (scores[i] == scores[j] && i < j));
        if wins {
            kept.push(i);
        }
    }
    Ok(FoldDetail { correlated, kept, constant: corr.constant })
}

/// Stage I over CV folds: each fold's training part is filtered and the
/// survivors of all folds are united. Returns sorted column indices.
pub fn stage1_ufs(
    columns: &[Vec<f64>],
    labels: &[u8],
    r_c: f64,
    folds: &[Vec<usize>],
) -> Result<(Vec<usize>, Vec<FoldDetail>)> {
    if !(r_c > 0.0 && r_c <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("r_c = {r_c}")));
    }
    if columns.is_empty() {
        return Err(Error::Empty("feature table"));
    }
    let n = labels.len();
    let mut union = vec![false; columns.len()];
    let mut details = Vec::new();
    for fold in folds {
        let idx = train_indices(n, fold);
        let sub: Vec<Vec<f64>> = columns.iter().map(|c| idx.iter().map(|&i| c[i]).collect()).collect();
        let yl: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
        let d = stage1_subset(&sub, &yl, r_c)?;
        for &k in &d.kept {
            union[k] = true;
        }
        details.push(d);
    }
    Ok(((0..columns.len()).filter(|&k| union[k]).collect(), details))
}
