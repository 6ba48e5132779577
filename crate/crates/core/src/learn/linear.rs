use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, symmetric_eigen};
use crate::{Error, Result};

/// Per-feature centring and scaling learned on a training fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant features keep scale 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Standardizer> {
        let p = rows.first().map(|r| r.len()).ok_or(Error::Empty("rows"))?;
        check_finite(rows)?;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; p];
        for r in rows {
            for j in 0..p {
                scale[j] += (r[j] - mean[j]).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = s.sqrt();
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// `score = w . x + b`; posterior of class 1 is `sigmoid(score)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.intercept
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        u8::from(self.probability(row) >= 0.5)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Lda,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Lr, ModelKind::Lda];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lr => "LR",
            ModelKind::Lda => "LDA",
        }
    }

    /// Hyperparameters used while features are still being selected.
    pub fn default_spec(self) -> ModelSpec {
        match self {
            ModelKind::Lr => ModelSpec::LogReg { c: 1.0, l1_ratio: 0.5 },
            ModelKind::Lda => ModelSpec::Lda { shrinkage: 0.2 },
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "logreg" => Ok(ModelKind::Lr),
            "lda" => Ok(ModelKind::Lda),
            _ => Err(Error::InvalidParameter(format!("unknown model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    #[serde(rename = "lr")]
    LogReg { c: f64, l1_ratio: f64 },
    Lda { shrinkage: f64 },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::LogReg { .. } => ModelKind::Lr,
            ModelSpec::Lda { .. } => ModelKind::Lda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::LogReg { c, l1_ratio } => {
                if !(c > 0.0 && c.is_finite()) || !(0.0..=1.0).contains(&l1_ratio) {
                    return Err(Error::InvalidParameter(format!("C = {c}, l1_ratio = {l1_ratio}")));
                }
            }
            ModelSpec::Lda { shrinkage } => {
                if !(0.0..=1.0).contains(&shrinkage) {
                    return Err(Error::InvalidParameter(format!("shrinkage = {shrinkage}")));
                }
            }
        }
        Ok(())
    }

    /// Fit on already standardized rows.
    pub fn fit(&self, x: &[Vec<f64>], y: &[u8]) -> Result<LinearModel> {
        self.validate()?;
        match *self {
            ModelSpec::LogReg { c, l1_ratio } => fit_logreg_elasticnet(x, y, c, l1_ratio),
            ModelSpec::Lda { shrinkage } => fit_lda_shrinkage(x, y, shrinkage),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModelSpec::LogReg { c, l1_ratio } => format!("LR(C={c:.4e}, l1_ratio={l1_ratio:.3})"),
            ModelSpec::Lda { shrinkage } => format!("LDA(shrinkage={shrinkage:.3})"),
        }
    }
}

fn check_finite(x: &[Vec<f64>]) -> Result<()> {
    if x.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_xy(x: &[Vec<f64>], y: &[u8]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::SubjectMismatch(format!("{} rows, {} labels", x.len(), y.len())));
    }
    let p = x.first().map(|r| r.len()).ok_or(Error::Empty("training rows"))?;
    if p == 0 {
        return Err(Error::Empty("features"));
    }
    if x.iter().any(|r| r.len() != p) {
        return Err(Error::FeatureMismatch("ragged rows".into()));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::OneClass);
    }
    check_finite(x)?;
    Ok(p)
}

/// Balanced class weights `n / (2 n_class)`.
pub fn balanced_weights(y: &[u8]) -> [f64; 2] {
    let n = y.len() as f64;
    let n1 = y.iter().filter(|&&l| l == 1).count() as f64;
    let n0 = n - n1;
    [n / (2.0 * n0), n / (2.0 * n1)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegOptions {
    pub tol: f64,
    pub max_epochs: usize,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        LogRegOptions { tol: 1e-6, max_epochs: 10_000 }
    }
}

#[derive(Debug, Clone)]
pub struct LogRegFit {
    pub model: LinearModel,
    /// Objective after each epoch, starting with the all-zero model.
    pub objective: Vec<f64>,
    pub converged: bool,
}

/// Weighted logistic loss plus `(1/C)[a |w|_1 + (1-a)/2 |w|^2]`.
pub fn logreg_objective(x: &[Vec<f64>], y: &[u8], model: &LinearModel, c: f64, l1_ratio: f64) -> f64 {
    let cw = balanced_weights(y);
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(r, &l)| {
            let z = model.decision(r);
            cw[l as usize] * (softplus(z) - f64::from(l) * z)
        })
        .sum();
    let l1: f64 = model.weights.iter().map(|w| w.abs()).sum();
    let l2: f64 = model.weights.iter().map(|w| w * w).sum();
    loss + (l1_ratio * l1 + 0.5 * (1.0 - l1_ratio) * l2) / c
}

/// Gradient of the differentiable part (loss and ridge term) with respect
/// to the weights, followed by the intercept derivative.
pub fn logreg_smooth_gradient(x: &[Vec<f64>], y: &[u8], model: &LinearModel, c: f64, l1_ratio: f64) -> (Vec<f64>, f64) {
    let cw = balanced_weights(y);
    let lam2 = (1.0 - l1_ratio) / c;
    let mut g: Vec<f64> = model.weights.iter().map(|w| lam2 * w).collect();
    let mut g0 = 0.0;
    for (r, &l) in x.iter().zip(y) {
        let e = cw[l as usize] * (sigmoid(model.decision(r)) - f64::from(l));
        g0 += e;
        for (gj, v) in g.iter_mut().zip(r) {
            *gj += e * v;
        }
    }
    (g, g0)
}

pub fn fit_logreg_elasticnet(x: &[Vec<f64>], y: &[u8], c: f64, l1_ratio: f64) -> Result<LinearModel> {
    Ok(fit_logreg_traced(x, y, c, l1_ratio, LogRegOptions::default())?.model)
}

/// Cyclic coordinate descent with a Newton step and Armijo backtracking per
/// coordinate, so the objective never increases.
pub fn fit_logreg_traced(x: &[Vec<f64>], y: &[u8], c: f64, l1_ratio: f64, opts: LogRegOptions) -> Result<LogRegFit> {
    ModelSpec::LogReg { c, l1_ratio }.validate()?;
    let p = check_xy(x, y)?;
    let n = x.len();
    let cw = balanced_weights(y);
    let sw: Vec<f64> = y.iter().map(|&l| cw[l as usize]).collect();
    let yf: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
    // column-major copy, intercept column last
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    cols.push(vec![1.0; n]);
    let lam1 = l1_ratio / c;
    let lam2 = (1.0 - l1_ratio) / c;
    let mut w = vec![0.0; p + 1];
    let mut z = vec![0.0; n];

    let loss_at = |z: &[f64]| -> f64 { (0..n).map(|i| sw[i] * (softplus(z[i]) - yf[i] * z[i])).sum() };
    let penalty = |w: &[f64]| -> f64 { w[..p].iter().map(|v| lam1 * v.abs() + 0.5 * lam2 * v * v).sum() };
    let mut loss = loss_at(&z);
    let mut trace = vec![loss + penalty(&w)];
    let mut converged = false;
    let mut trial = vec![0.0; n];

    for _epoch in 0..opts.max_epochs {
        let mut max_delta: f64 = 0.0;
        for j in 0..=p {
            let col = &cols[j];
            let (l1j, l2j) = if j == p { (0.0, 0.0) } else { (lam1, lam2) };
            let mut g = l2j * w[j];
            let mut h = l2j;
            for i in 0..n {
                let pr = sigmoid(z[i]);
                g += sw[i] * (pr - yf[i]) * col[i];
                h += sw[i] * pr * (1.0 - pr) * col[i] * col[i];
            }
            if !(h > 0.0) {
                h = 1e-12;
            }
            let wj = w[j];
            let d = if g + l1j <= h * wj {
                -(g + l1j) / h
            } else if g - l1j >= h * wj {
                -(g - l1j) / h
            } else {
                -wj
            };
            if d == 0.0 {
                continue;
            }
            let pen = |v: f64| l1j * v.abs() + 0.5 * l2j * v * v;
            let decrease = g * d + l1j * ((wj + d).abs() - wj.abs());
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                for i in 0..n {
                    trial[i] = z[i] + alpha * d * col[i];
                }
                let new_loss = loss_at(&trial);
                let change = new_loss - loss + pen(wj + alpha * d) - pen(wj);
                if change <= 0.01 * alpha * decrease.min(0.0) && change <= 0.0 {
                    loss = new_loss;
                    core::mem::swap(&mut z, &mut trial);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if accepted {
                w[j] = wj + alpha * d;
                max_delta = max_delta.max((alpha * d).abs());
            }
        }
        trace.push(loss + penalty(&w));
        if max_delta < opts.tol {
            converged = true;
            break;
        }
    }
    let intercept = w[p];
    w.truncate(p);
    Ok(LogRegFit { model: LinearModel { weights: w, intercept }, objective: trace, converged })
}

/// Two-class LDA with covariance shrinkage towards `tr(S)/p * I`, solved
/// through the eigen-decomposition of the shrunk pooled covariance.
pub fn fit_lda_shrinkage(x: &[Vec<f64>], y: &[u8], shrinkage: f64) -> Result<LinearModel> {
    ModelSpec::Lda { shrinkage }.validate()?;
    let p = check_xy(x, y)?;
    let n = x.len() as f64;
    let mut means = [vec![0.0; p], vec![0.0; p]];
    let mut counts = [0.0f64; 2];
    for (r, &l) in x.iter().zip(y) {
        counts[l as usize] += 1.0;
        for (m, v) in means[l as usize].iter_mut().zip(r) {
            *m += v;
        }
    }
    for k in 0..2 {
        for m in &mut means[k] {
            *m /= counts[k];
        }
    }
    let priors = [counts[0] / n, counts[1] / n];
    // pooled covariance = sum_k prior_k * biased class covariance
    let mut cov = vec![0.0; p * p];
    for (r, &l) in x.iter().zip(y) {
        let k = l as usize;
        let f = priors[k] / counts[k];
        for a in 0..p {
            let da = r[a] - means[k][a];
            for b in a..p {
                cov[a * p + b] += f * da * (r[b] - means[k][b]);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            cov[a * p + b] = cov[b * p + a];
        }
    }
    let mu = (0..p).map(|a| cov[a * p + a]).sum::<f64>() / p as f64;
    for a in 0..p {
        for b in 0..p {
            cov[a * p + b] *= 1.0 - shrinkage;
        }
        cov[a * p + a] += shrinkage * mu;
    }
    let eig = symmetric_eigen(&cov, p);
    let top = eig.values.iter().cloned().fold(0.0, f64::max);
    let low = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(top > 0.0) || low <= 1e-10 * top {
        return Err(Error::SingularCovariance);
    }
    let diff: Vec<f64> = (0..p).map(|a| means[1][a] - means[0][a]).collect();
    let mut w = vec![0.0; p];
    for k in 0..p {
        let v = eig.vector(k);
        let coef = dot(&v, &diff) / eig.values[k];
        for (wa, va) in w.iter_mut().zip(&v) {
            *wa += coef * va;
        }
    }
    let mid: Vec<f64> = (0..p).map(|a| 0.5 * (means[0][a] + means[1][a])).collect();
    let intercept = -dot(&mid, &w) + (priors[1] / priors[0]).ln();
    Ok(LinearModel { weights: w, intercept })
}
