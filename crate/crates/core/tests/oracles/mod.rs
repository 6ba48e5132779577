//! Brute-force reference implementations used as test oracles. They work on
//! plain coordinate lists and share no code with the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

/// In-mask voxel list: ((x, y, z), level >= 1).
pub type Voxels = Vec<([i64; 3], usize)>;

pub fn voxels(dims: [usize; 3], levels: &[u16]) -> Voxels {
    let mut out = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let l = levels[x + dims[0] * (y + dims[1] * z)];
                if l > 0 {
                    out.push(([x as i64, y as i64, z as i64], l as usize));
                }
            }
        }
    }
    out
}

fn diff(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
}

/// Ordered pairs (u, v) with v - u = ±d, counted at (level u, level v).
pub fn glcm(v: &Voxels, d: [i64; 3], ng: usize) -> Vec<u64> {
    let mut m = vec![0u64; ng * ng];
    let neg = [-d[0], -d[1], -d[2]];
    for (pu, lu) in v {
        for (pv, lv) in v {
            let e = diff(*pu, *pv);
            if e == d || e == neg {
                m[(lu - 1) * ng + (lv - 1)] += 1;
            }
        }
    }
    m
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[a] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn components(v: &Voxels, linked: impl Fn(usize, usize) -> bool) -> BTreeMap<(usize, usize), u64> {
    let mut dsu = Dsu::new(v.len());
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i].1 == v[j].1 && linked(i, j) {
                dsu.union(i, j);
            }
        }
    }
    let mut sizes: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for i in 0..v.len() {
        let r = dsu.find(i);
        let e = sizes.entry(r).or_insert((v[i].1, 0));
        e.1 += 1;
    }
    let mut out = BTreeMap::new();
    for (_, (l, s)) in sizes {
        *out.entry((l, s)).or_insert(0) += 1;
    }
    out
}

/// Runs along `d`: voxels joined when they differ by exactly ±d and share a level.
pub fn glrlm(v: &Voxels, d: [i64; 3]) -> BTreeMap<(usize, usize), u64> {
    let neg = [-d[0], -d[1], -d[2]];
    components(v, |i, j| {
        let e = diff(v[i].0, v[j].0);
        e == d || e == neg
    })
}

/// Zones: equal-level voxels joined at Chebyshev distance 1.
pub fn glszm(v: &Voxels) -> BTreeMap<(usize, usize), u64> {
    components(v, |i, j| diff(v[i].0, v[j].0).iter().all(|c| c.abs() <= 1))
}

/// Dependence: 1 + number of other equal-level voxels at Chebyshev distance 1.
pub fn gldm(v: &Voxels) -> BTreeMap<(usize, usize), u64> {
    let mut out = BTreeMap::new();
    for (p, l) in v {
        let mut dep = 1;
        for (q, m) in v {
            let e = diff(*p, *q);
            if m == l && e != [0, 0, 0] && e.iter().all(|c| c.abs() <= 1) {
                dep += 1;
            }
        }
        *out.entry((*l, dep)).or_insert(0) += 1;
    }
    out
}

/// Set-definition dilation: z is set iff some kernel offset o has z - o in A.
pub fn dilate(dims: [usize; 3], a: &[bool], offsets: &[[i32; 3]]) -> Vec<bool> {
    morph(dims, a, offsets, true)
}

/// Set-definition erosion: z is set iff z + o is in A for every offset o.
pub fn erode(dims: [usize; 3], a: &[bool], offsets: &[[i32; 3]]) -> Vec<bool> {
    morph(dims, a, offsets, false)
}

fn morph(dims: [usize; 3], a: &[bool], offsets: &[[i32; 3]], dil: bool) -> Vec<bool> {
    let at = |p: [i64; 3]| {
        if (0..3).all(|k| p[k] >= 0 && (p[k] as usize) < dims[k]) {
            a[p[0] as usize + dims[0] * (p[1] as usize + dims[1] * p[2] as usize)]
        } else {
            false
        }
    };
    let mut out = Vec::with_capacity(a.len());
    for z in 0..dims[2] as i64 {
        for y in 0..dims[1] as i64 {
            for x in 0..dims[0] as i64 {
                let hit = |o: &[i32; 3], s: i64| at([x + s * o[0] as i64, y + s * o[1] as i64, z + s * o[2] as i64]);
                out.push(if dil { offsets.iter().any(|o| hit(o, -1)) } else { offsets.iter().all(|o| hit(o, 1)) });
            }
        }
    }
    out
}

/// Direct two-way ANOVA ICC(3,1) for an n x k table (rows = subjects).
pub fn icc31(x: &[Vec<f64>]) -> f64 {
    let n = x.len() as f64;
    let k = x[0].len() as f64;
    let grand: f64 = x.iter().flatten().sum::<f64>() / (n * k);
    let row_means: Vec<f64> = x.iter().map(|r| r.iter().sum::<f64>() / k).collect();
    let col_means: Vec<f64> =
        (0..x[0].len()).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let ss_total: f64 = x.iter().flatten().map(|v| (v - grand).powi(2)).sum();
    let ss_rows: f64 = k * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols: f64 = n * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_err = ss_total - ss_rows - ss_cols;
    let msr = ss_rows / (n - 1.0);
    let mse = ss_err / ((n - 1.0) * (k - 1.0));
    (msr - mse) / (msr + (k - 1.0) * mse)
}
