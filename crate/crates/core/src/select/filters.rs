use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use super::stage1::average_ranks;

/// Two-group ANOVA F statistic per column.
pub fn fscore(columns: &[Vec<f64>], labels: &[u8]) -> Vec<f64> {
    columns
        .iter()
        .map(|c| {
            let mut sum = [0.0; 2];
            let mut cnt = [0.0f64; 2];
            for (v, &l) in c.iter().zip(labels) {
                sum[l as usize] += v;
                cnt[l as usize] += 1.0;
            }
            let n = cnt[0] + cnt[1];
            let mean = (sum[0] + sum[1]) / n;
            let mk = [sum[0] / cnt[0], sum[1] / cnt[1]];
            let between: f64 = (0..2).map(|k| cnt[k] * (mk[k] - mean).powi(2)).sum();
            let within: f64 = c.iter().zip(labels).map(|(v, &l)| (v - mk[l as usize]).powi(2)).sum();
            let scale = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            if between <= 1e-14 * scale || scale == 0.0 {
                0.0
            } else if within <= 1e-14 * scale {
                f64::INFINITY
            } else {
                between / (within / (n - 2.0))
            }
        })
        .collect()
}

/// ReliefF weights with `k` nearest hits and misses per instance, features
/// scaled to their range, Manhattan distance, ties broken by index.
pub fn relieff(columns: &[Vec<f64>], labels: &[u8], k: usize) -> Vec<f64> {
    let p = columns.len();
    let n = labels.len();
    let scaled: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let r = hi - lo;
            c.iter().map(|v| if r > 0.0 { (v - lo) / r } else { 0.0 }).collect()
        })
        .collect();
    let mut w = vec![0.0; p];
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((0..p).map(|f| (scaled[f][i] - scaled[f][j]).abs()).sum(), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let hits: Vec<usize> = others.iter().filter(|o| labels[o.1] == labels[i]).take(k).map(|o| o.1).collect();
        let misses: Vec<usize> = others.iter().filter(|o| labels[o.1] != labels[i]).take(k).map(|o| o.1).collect();
        for f in 0..p {
            let diff = |j: usize| (scaled[f][i] - scaled[f][j]).abs();
            if !hits.is_empty() {
                w[f] -= hits.iter().map(|&j| diff(j)).sum::<f64>() / (hits.len() * n) as f64;
            }
            if !misses.is_empty() {
                w[f] += misses.iter().map(|&j| diff(j)).sum::<f64>() / (misses.len() * n) as f64;
            }
        }
    }
    w
}

/// Mutual information (nats) between labels and each column binned into
/// `bins` equal-frequency bins by average rank.
pub fn mutual_information(columns: &[Vec<f64>], labels: &[u8], bins: usize) -> Vec<f64> {
    let n = labels.len() as f64;
    columns
        .iter()
        .map(|c| {
            let ranks = average_ranks(c);
            let mut joint = vec![[0.0f64; 2]; bins];
            for (r, &l) in ranks.iter().zip(labels) {
                let b = (((r - 1.0) * bins as f64 / n).floor() as usize).min(bins - 1);
                joint[b][l as usize] += 1.0 / n;
            }
            let py = [
                joint.iter().map(|j| j[0]).sum::<f64>(),
                joint.iter().map(|j| j[1]).sum::<f64>(),
            ];
            let mut mi = 0.0;
            for j in &joint {
                let pb = j[0] + j[1];
                for k in 0..2 {
                    if j[k] > 0.0 {
                        mi += j[k] * (j[k] / (pb * py[k])).ln();
                    }
                }
            }
            mi.max(0.0)
        })
        .collect()
}

struct Tree<'a> {
    columns: &'a [Vec<f64>],
    labels: &'a [u8],
    max_features: usize,
    importance: Vec<f64>,
}

fn gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n == 0.0 {
        0.0
    } else {
        1.0 - (c0 / n).powi(2) - (c1 / n).powi(2)
    }
}

impl Tree<'_> {
    fn grow(&mut self, samples: &mut [usize], rng: &mut crate::rng::Rng) {
        let n = samples.len() as f64;
        let c1 = samples.iter().filter(|&&i| self.labels[i] == 1).count() as f64;
        let node = gini(n - c1, c1);
        if samples.len() < 2 || node == 0.0 {
            return;
        }
        let p = self.columns.len();
        let candidates = rand::seq::index::sample(rng, p, self.max_features.min(p));
        // (decrease, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        for f in candidates.iter() {
            let col = &self.columns[f];
            samples.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            let mut left = [0.0f64; 2];
            for s in 0..samples.len() - 1 {
                left[self.labels[samples[s]] as usize] += 1.0;
                let (va, vb) = (col[samples[s]], col[samples[s + 1]]);
                if va == vb {
                    continue;
                }
                let nl = (s + 1) as f64;
                let right = [n - c1 - left[0], c1 - left[1]];
                let dec = n * node - nl * gini(left[0], left[1]) - (n - nl) * gini(right[0], right[1]);
                if best.is_none_or(|b| dec > b.0 + 1e-12) {
                    best = Some((dec, f, 0.5 * (va + vb)));
                }
            }
        }
        let Some((dec, f, thr)) = best else { return };
        if dec <= 0.0 {
            return;
        }
        self.importance[f] += dec;
        let col = &self.columns[f];
        samples.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        let split = samples.iter().position(|&i| col[i] > thr).unwrap_or(samples.len());
        let (l, r) = samples.split_at_mut(split);
        self.grow(l, rng);
        self.grow(r, rng);
    }
}

/// Mean impurity decrease over a seeded forest of bootstrap CART trees,
/// each tree's importances normalised to sum 1.
pub fn gini_importance(columns: &[Vec<f64>], labels: &[u8], trees: usize, seed: u64) -> Vec<f64> {
    let p = columns.len();
    let n = labels.len();
    let max_features = ((p as f64).sqrt().ceil() as usize).max(1);
    let mut total = vec![0.0; p];
    for t in 0..trees {
        let mut rng = crate::rng::seeded(crate::rng::derive_seed(seed, t as u64));
        let mut samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut tree = Tree { columns, labels, max_features, importance: vec![0.0; p] };
        tree.grow(&mut samples, &mut rng);
        let s: f64 = tree.importance.iter().sum();
        if s > 0.0 {
            for (a, b) in total.iter_mut().zip(&tree.importance) {
                *a += b / s;
            }
        }
    }
    for v in &mut total {
        *v /= trees.max(1) as f64;
    }
    total
}
