use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::filters::{fscore, gini_importance, mutual_information, relieff};
use super::stage1::univariate_score;
use super::{Method, SelectionConfig};
use crate::learn::{cv_auc, fit_logreg_elasticnet, ModelSpec, Standardizer};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Outcome {
    /// Sorted column indices into the Stage II input.
    pub features: Vec<usize>,
    pub cv_auc: f64,
    /// The method selected nothing and the best univariate feature was used.
    pub fallback: bool,
}

/// Memoised CV AUC of column subsets.
struct Evaluator<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [u8],
    folds: &'a [Vec<usize>],
    spec: ModelSpec,
    cache: BTreeMap<Vec<usize>, Option<f64>>,
}

impl Evaluator<'_> {
    fn auc(&mut self, subset: &[usize]) -> Option<f64> {
        if subset.is_empty() {
            return None;
        }
        let mut key = subset.to_vec();
        key.sort_unstable();
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let x: Vec<Vec<f64>> = self.rows.iter().map(|r| key.iter().map(|&j| r[j]).collect()).collect();
        let v = cv_auc(&x, self.labels, self.folds, &self.spec).ok();
        self.cache.insert(key, v);
        v
    }

    fn score(&mut self, subset: &[usize]) -> f64 {
        self.auc(subset).unwrap_or(f64::NEG_INFINITY)
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Ranks by descending score (ties to the lower index) and keeps the prefix
/// length with the best CV AUC, shortest on ties.
fn top_m(ev: &mut Evaluator, scores: &[f64], max_features: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut best = (f64::NEG_INFINITY, 0);
    for m in 1..=max_features.min(order.len()) {
        let s = ev.score(&order[..m]);
        if s > best.0 {
            best = (s, m);
        }
    }
    sorted(order[..best.1].to_vec())
}

fn lasso(ev: &mut Evaluator, rows: &[Vec<f64>], labels: &[u8], grid: &[f64]) -> Result<Vec<usize>> {
    let st = Standardizer::fit(rows)?;
    let x = st.transform(rows);
    let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, Vec::new());
    for &c in grid {
        let m = fit_logreg_elasticnet(&x, labels, c, 1.0)?;
        let support: Vec<usize> = (0..m.weights.len()).filter(|&j| m.weights[j] != 0.0).collect();
        if support.is_empty() {
            continue;
        }
        let s = ev.score(&support);
        if s > best.0 || (s == best.0 && support.len() < best.1.len()) {
            best = (s, support);
        }
    }
    Ok(best.1)
}

fn coefficients(spec: &ModelSpec, rows: &[Vec<f64>], labels: &[u8], subset: &[usize]) -> Result<Vec<f64>> {
    let x: Vec<Vec<f64>> = rows.iter().map(|r| subset.iter().map(|&j| r[j]).collect()).collect();
    let st = Standardizer::fit(&x)?;
    Ok(spec.fit(&st.transform(&x), labels)?.weights)
}

fn rfe(ev: &mut Evaluator, rows: &[Vec<f64>], labels: &[u8], step: usize) -> Result<Vec<usize>> {
    let p = rows[0].len();
    let mut current: Vec<usize> = (0..p).collect();
    let mut best = (ev.score(&current), current.clone());
    while current.len() > 1 {
        let w = coefficients(&ev.spec, rows, labels, &current)?;
        let mut order: Vec<usize> = (0..current.len()).collect();
        order.sort_by(|&a, &b| w[a].abs().total_cmp(&w[b].abs()).then(a.cmp(&b)));
        let drop = step.max(1).min(current.len() - 1);
        let mut remove: Vec<usize> = order[..drop].to_vec();
        remove.sort_unstable_by(|a, b| b.cmp(a));
        for k in remove {
            current.remove(k);
        }
        let s = ev.score(&current);
        if s >= best.0 {
            best = (s, current.clone());
        }
    }
    Ok(best.1)
}

fn sfs(ev: &mut Evaluator, p: usize, max_features: usize, tol: f64) -> Vec<usize> {
    let mut current: Vec<usize> = Vec::new();
    let mut score = f64::NEG_INFINITY;
    while current.len() < max_features.min(p) {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for j in (0..p).filter(|j| !current.contains(j)) {
            let mut trial = current.clone();
            trial.push(j);
            let s = ev.score(&trial);
            if s > best.0 {
                best = (s, j);
            }
        }
        if best.1 == usize::MAX || !(best.0 > score + tol) {
            break;
        }
        current.push(best.1);
        score = best.0;
    }
    sorted(current)
}

fn sbs(ev: &mut Evaluator, p: usize, tol: f64) -> Vec<usize> {
    let mut current: Vec<usize> = (0..p).collect();
    let mut score = ev.score(&current);
    while current.len() > 1 {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for k in 0..current.len() {
            let mut trial = current.clone();
            trial.remove(k);
            let s = ev.score(&trial);
            if s > best.0 {
                best = (s, k);
            }
        }
        if best.1 == usize::MAX || !(best.0 > score + tol) {
            break;
        }
        current.remove(best.1);
        score = best.0;
    }
    current
}

fn ga(ev: &mut Evaluator, p: usize, cfg: &SelectionConfig, seed: u64) -> Vec<usize> {
    let mut rng = crate::rng::seeded(seed);
    let on = |g: &Vec<bool>| -> Vec<usize> { (0..p).filter(|&j| g[j]).collect() };
    let density = (cfg.max_features as f64 / p as f64).min(0.5);
    let ensure = |g: &mut Vec<bool>, rng: &mut crate::rng::Rng| {
        if !g.iter().any(|&b| b) {
            g[rng.random_range(0..p)] = true;
        }
    };
    let mut pop: Vec<Vec<bool>> = (0..cfg.ga_population.max(2))
        .map(|_| {
            let mut g: Vec<bool> = (0..p).map(|_| rng.random::<f64>() < density).collect();
            ensure(&mut g, &mut rng);
            g
        })
        .collect();
    // better = higher AUC, then fewer features
    let better = |a: (f64, usize), b: (f64, usize)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut best: (f64, usize, Vec<bool>) = (f64::NEG_INFINITY, usize::MAX, pop[0].clone());
    for generation in 0..=cfg.ga_generations {
        let fit: Vec<(f64, usize)> = pop.iter().map(|g| (ev.score(&on(g)), on(g).len())).collect();
        let mut elite = 0;
        for (i, f) in fit.iter().enumerate() {
            if better(*f, (best.0, best.1)) {
                best = (f.0, f.1, pop[i].clone());
            }
            if better(*f, fit[elite]) {
                elite = i;
            }
        }
        if generation == cfg.ga_generations {
            break;
        }
        let tournament = |rng: &mut crate::rng::Rng| {
            let mut w = rng.random_range(0..pop.len());
            for _ in 1..3 {
                let c = rng.random_range(0..pop.len());
                if better(fit[c], fit[w]) {
                    w = c;
                }
            }
            w
        };
        let mut next = vec![pop[elite].clone()];
        while next.len() < pop.len() {
            let a = tournament(&mut rng);
            let b = tournament(&mut rng);
            let mut child: Vec<bool> = if rng.random::<f64>() < 0.9 {
                (0..p).map(|j| if rng.random::<bool>() { pop[a][j] } else { pop[b][j] }).collect()
            } else {
                pop[a].clone()
            };
            for bit in child.iter_mut() {
                if rng.random::<f64>() < cfg.ga_mutation {
                    *bit = !*bit;
                }
            }
            ensure(&mut child, &mut rng);
            next.push(child);
        }
        pop = next;
    }
    on(&best.2)
}

/// Runs one Stage II method with `spec` as the scoring classifier.
pub fn stage2_select(
    method: Method,
    columns: &[Vec<f64>],
    labels: &[u8],
    folds: &[Vec<usize>],
    spec: &ModelSpec,
    cfg: &SelectionConfig,
) -> Result<Stage2Outcome> {
    let p = columns.len();
    if p == 0 {
        return Err(Error::Empty("Stage II input"));
    }
    let n = labels.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let mut ev = Evaluator { rows: &rows, labels, folds, spec: *spec, cache: BTreeMap::new() };
    let seed = crate::rng::derive_seed(cfg.seed, method as u64 + 1);
    let chosen = match method {
        Method::FScore => top_m(&mut ev, &fscore(columns, labels), cfg.max_features),
        Method::Relief => top_m(&mut ev, &relieff(columns, labels, cfg.relief_neighbours), cfg.max_features),
        Method::Mi => top_m(&mut ev, &mutual_information(columns, labels, cfg.mi_bins), cfg.max_features),
        Method::Gini => top_m(&mut ev, &gini_importance(columns, labels, cfg.gini_trees, seed), cfg.max_features),
        Method::Lasso => lasso(&mut ev, &rows, labels, &cfg.lasso_c_grid)?,
        Method::Ga => ga(&mut ev, p, cfg, seed),
        Method::Sbs => sbs(&mut ev, p, cfg.wrapper_tolerance),
        Method::Sfs => sfs(&mut ev, p, cfg.max_features, cfg.wrapper_tolerance),
        Method::Rfe => rfe(&mut ev, &rows, labels, cfg.rfe_step)?,
    };
    if let Some(auc) = ev.auc(&chosen) {
        return Ok(Stage2Outcome { features: chosen, cv_auc: auc, fallback: false });
    }
    let scores = columns.iter().map(|c| univariate_score(c, labels)).collect::<Result<Vec<_>>>()?;
    let best = (0..p).fold(0, |b, j| if scores[j] > scores[b] { j } else { b });
    let auc = ev
        .auc(&[best])
        .ok_or_else(|| Error::SelectionFailed(alloc::format!("{} found no usable feature", method.name())))?;
    Ok(Stage2Outcome { features: vec![best], cv_auc: auc, fallback: true })
}
