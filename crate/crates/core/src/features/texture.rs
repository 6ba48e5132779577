use alloc::collections::BTreeMap;
#[allow(unused_imports)]
use num_traits::Float;

use super::firstorder::entropy;

/// The 13 unique 3-D neighbour offsets (one of each ± pair), as (dx, dy, dz).
pub const DIRECTIONS: [[isize; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
];

/// Sparse count matrix keyed by (gray level, run length / zone size / dependence).
pub type SparseCounts = BTreeMap<(usize, usize), u64>;

/// Shared statistics of run/zone/dependence matrices, with `i` the gray
/// level and `j` the length-like column index.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Emphasis {
    pub n: f64,
    pub short: f64,
    pub long: f64,
    pub gln: f64,
    pub glnn: f64,
    pub jn: f64,
    pub jnn: f64,
    pub glv: f64,
    pub jv: f64,
    pub entropy: f64,
    pub low_gl: f64,
    pub high_gl: f64,
    pub short_low: f64,
    pub short_high: f64,
    pub long_low: f64,
    pub long_high: f64,
}

impl Emphasis {
    pub fn from_counts(m: &SparseCounts) -> Emphasis {
        let n: f64 = m.values().map(|&c| c as f64).sum();
        let mut e = Emphasis { n, ..Default::default() };
        if n == 0.0 {
            return e;
        }
        let mut by_i: BTreeMap<usize, f64> = BTreeMap::new();
        let mut by_j: BTreeMap<usize, f64> = BTreeMap::new();
        let (mut mu_i, mut mu_j) = (0.0, 0.0);
        for (&(i, j), &c) in m {
            let c = c as f64;
            let (fi, fj) = (i as f64, j as f64);
            let (i2, j2) = (fi * fi, fj * fj);
            e.short += c / j2;
            e.long += c * j2;
            e.low_gl += c / i2;
            e.high_gl += c * i2;
            e.short_low += c / (i2 * j2);
            e.short_high += c * i2 / j2;
            e.long_low += c * j2 / i2;
            e.long_high += c * i2 * j2;
            *by_i.entry(i).or_default() += c;
            *by_j.entry(j).or_default() += c;
            mu_i += c / n * fi;
            mu_j += c / n * fj;
        }
        for (&(i, j), &c) in m {
            let p = c as f64 / n;
            e.glv += p * (i as f64 - mu_i).powi(2);
            e.jv += p * (j as f64 - mu_j).powi(2);
        }
        e.entropy = entropy(m.values().map(|&c| c as f64 / n));
        e.gln = by_i.values().map(|s| s * s).sum::<f64>() / n;
        e.jn = by_j.values().map(|s| s * s).sum::<f64>() / n;
        e.glnn = e.gln / n;
        e.jnn = e.jn / n;
        for v in [
            &mut e.short,
            &mut e.long,
            &mut e.low_gl,
            &mut e.high_gl,
            &mut e.short_low,
            &mut e.short_high,
            &mut e.long_low,
            &mut e.long_high,
        ] {
            *v /= n;
        }
        e
    }
}

pub(crate) fn mean_of<const N: usize>(rows: &[[f64; N]]) -> [f64; N] {
    let mut out = [0.0; N];
    for r in rows {
        for k in 0..N {
            out[k] += r[k];
        }
    }
    for v in &mut out {
        *v /= rows.len() as f64;
    }
    out
}
