use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::firstorder::entropy;
use super::texture::{mean_of, DIRECTIONS};
use super::DiscretizedRoi;
use crate::linalg::symmetric_eigenvalues;
use crate::{Error, Result};

pub const GLCM_NAMES: [&str; 24] = [
    "glcm_Autocorrelation",
    "glcm_ClusterProminence",
    "glcm_ClusterShade",
    "glcm_ClusterTendency",
    "glcm_Contrast",
    "glcm_Correlation",
    "glcm_DifferenceAverage",
    "glcm_DifferenceEntropy",
    "glcm_DifferenceVariance",
    "glcm_Id",
    "glcm_Idm",
    "glcm_Idmn",
    "glcm_Idn",
    "glcm_Imc1",
    "glcm_Imc2",
    "glcm_InverseVariance",
    "glcm_JointAverage",
    "glcm_JointEnergy",
    "glcm_JointEntropy",
    "glcm_MCC",
    "glcm_MaximumProbability",
    "glcm_SumAverage",
    "glcm_SumEntropy",
    "glcm_SumSquares",
];

/// Symmetric co-occurrence counts for each of the 13 directions, as dense
/// `ng x ng` row-major matrices indexed by level - 1 (`ng` = highest level).
pub fn glcm_matrices(roi: &DiscretizedRoi) -> Vec<Vec<u64>> {
    let ng = roi.max_level();
    let [nx, ny, nz] = roi.dims;
    DIRECTIONS
        .iter()
        .map(|d| {
            let mut m = vec![0u64; ng * ng];
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        let a = roi.levels[roi.index(x, y, z)];
                        if a == 0 {
                            continue;
                        }
                        let b = roi.level_at(x as isize + d[0], y as isize + d[1], z as isize + d[2]);
                        if b == 0 {
                            continue;
                        }
                        let (a, b) = (a as usize - 1, b as usize - 1);
                        m[a * ng + b] += 1;
                        m[b * ng + a] += 1;
                    }
                }
            }
            m
        })
        .collect()
}

fn features_for(counts: &[u64], ng: usize, present: &[usize]) -> Option<[f64; 24]> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let m = present.len();
    let t = total as f64;
    let lv: Vec<f64> = present.iter().map(|&l| l as f64).collect();
    let mut p = vec![0.0; m * m];
    for (a, &la) in present.iter().enumerate() {
        for (b, &lb) in present.iter().enumerate() {
            p[a * m + b] = counts[(la - 1) * ng + (lb - 1)] as f64 / t;
        }
    }
    let px: Vec<f64> = (0..m).map(|a| (0..m).map(|b| p[a * m + b]).sum()).collect();
    let py: Vec<f64> = (0..m).map(|b| (0..m).map(|a| p[a * m + b]).sum()).collect();
    let mux: f64 = (0..m).map(|a| px[a] * lv[a]).sum();
    let muy: f64 = (0..m).map(|b| py[b] * lv[b]).sum();
    let sx = (0..m).map(|a| px[a] * (lv[a] - mux).powi(2)).sum::<f64>().sqrt();
    let sy = (0..m).map(|b| py[b] * (lv[b] - muy).powi(2)).sum::<f64>().sqrt();
    let mut psum = vec![0.0; 2 * ng + 1];
    let mut pdiff = vec![0.0; ng];
    let ngf = ng as f64;
    let (mut auto, mut prom, mut shade, mut tend, mut contrast) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut id, mut idm, mut idmn, mut idn, mut energy, mut maxp, mut ss) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0f64, 0.0);
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for a in 0..m {
        for b in 0..m {
            let v = p[a * m + b];
            let (i, j) = (lv[a], lv[b]);
            let pxy = px[a] * py[b];
            if pxy > 0.0 {
                hxy2 -= pxy * pxy.log2();
                if v > 0.0 {
                    hxy1 -= v * pxy.log2();
                }
            }
            if v == 0.0 {
                continue;
            }
            let d = (i - j).abs();
            auto += v * i * j;
            let s = i + j - mux - muy;
            prom += v * s.powi(4);
            shade += v * s.powi(3);
            tend += v * s * s;
            contrast += v * d * d;
            id += v / (1.0 + d);
            idm += v / (1.0 + d * d);
            idmn += v / (1.0 + d * d / (ngf * ngf));
            idn += v / (1.0 + d / ngf);
            energy += v * v;
            maxp = maxp.max(v);
            ss += v * (i - mux).powi(2);
            psum[present[a] + present[b]] += v;
            pdiff[present[a].abs_diff(present[b])] += v;
        }
    }
    let corr = if sx * sy == 0.0 { 1.0 } else { (auto - mux * muy) / (sx * sy) };
    let da: f64 = pdiff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let dv: f64 = pdiff.iter().enumerate().map(|(k, v)| (k as f64 - da).powi(2) * v).sum();
    let inv_var: f64 = pdiff.iter().enumerate().skip(1).map(|(k, v)| v / (k * k) as f64).sum();
    let sa: f64 = psum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let hxy = entropy(p.iter().copied());
    let hx = entropy(px.iter().copied());
    let hy = entropy(py.iter().copied());
    let div = hx.max(hy);
    let imc1 = if div == 0.0 { 0.0 } else { (hxy - hxy1) / div };
    let imc2 = (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt();
    let mcc = if m < 2 {
        1.0
    } else {
        let mut mm = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                let den = (px[a] * py[b]).sqrt();
                if den > 0.0 {
                    mm[a * m + b] = p[a * m + b] / den;
                }
            }
        }
        let mut q = vec![0.0; m * m];
        for a in 0..m {
            for c in 0..m {
                q[a * m + c] = (0..m).map(|b| mm[a * m + b] * mm[c * m + b]).sum();
            }
        }
        symmetric_eigenvalues(&q, m)[m - 2].max(0.0).sqrt()
    };
    Some([
        auto,
        prom,
        shade,
        tend,
        contrast,
        corr,
        da,
        entropy(pdiff.iter().copied()),
        dv,
        id,
        idm,
        idmn,
        idn,
        imc1,
        imc2,
        inv_var,
        mux,
        energy,
        hxy,
        mcc,
        maxp,
        sa,
        entropy(psum.iter().copied()),
        ss,
    ])
}

/// The 24 GLCM features averaged over directions that have at least one pair.
pub fn extract_glcm(roi: &DiscretizedRoi) -> Result<[f64; 24]> {
    let ng = roi.max_level();
    let present = roi.present_levels();
    let rows: Vec<[f64; 24]> =
        glcm_matrices(roi).iter().filter_map(|c| features_for(c, ng, &present)).collect();
    if rows.is_empty() {
        return Err(Error::NoCooccurrences);
    }
    Ok(mean_of(&rows))
}
