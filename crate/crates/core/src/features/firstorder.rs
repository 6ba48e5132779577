use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::DiscretizedRoi;

pub const FIRSTORDER_NAMES: [&str; 18] = [
    "firstorder_10Percentile",
    "firstorder_90Percentile",
    "firstorder_Energy",
    "firstorder_Entropy",
    "firstorder_InterquartileRange",
    "firstorder_Kurtosis",
    "firstorder_Maximum",
    "firstorder_Mean",
    "firstorder_MeanAbsoluteDeviation",
    "firstorder_Median",
    "firstorder_Minimum",
    "firstorder_Range",
    "firstorder_RobustMeanAbsoluteDeviation",
    "firstorder_RootMeanSquared",
    "firstorder_Skewness",
    "firstorder_TotalEnergy",
    "firstorder_Uniformity",
    "firstorder_Variance",
];

/// Percentile of sorted data with linear interpolation between order statistics.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q / 100.0 * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Shannon entropy (bits) of a probability vector, skipping empty cells.
pub(crate) fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = p.into_iter().filter(|&v| v > 0.0).map(|v| v * v.log2()).sum();
    0.0 - h
}

/// The 18 first-order features in `FIRSTORDER_NAMES` order.
pub fn extract_firstorder(roi: &DiscretizedRoi) -> [f64; 18] {
    let x = &roi.values;
    let n = x.len() as f64;
    let mut sorted = x.clone();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let mean = x.iter().sum::<f64>() / n;
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let (skew, kurt) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2)) } else { (0.0, 0.0) };
    let mad = x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let p10 = percentile(&sorted, 10.0);
    let p90 = percentile(&sorted, 90.0);
    let robust: Vec<f64> = x.iter().copied().filter(|&v| v >= p10 && v <= p90).collect();
    let rmad = if robust.is_empty() {
        0.0
    } else {
        let rm = robust.iter().sum::<f64>() / robust.len() as f64;
        robust.iter().map(|v| (v - rm).abs()).sum::<f64>() / robust.len() as f64
    };
    let mut hist = vec![0usize; roi.max_level() + 1];
    for &l in &roi.levels {
        if l > 0 {
            hist[l as usize] += 1;
        }
    }
    let probs: Vec<f64> = hist[1..].iter().map(|&c| c as f64 / n).collect();
    let voxel_volume = roi.spacing[0] * roi.spacing[1] * roi.spacing[2];
    [
        p10,
        p90,
        energy,
        entropy(probs.iter().copied()),
        percentile(&sorted, 75.0) - percentile(&sorted, 25.0),
        kurt,
        max,
        mean,
        mad,
        percentile(&sorted, 50.0),
        min,
        max - min,
        rmad,
        (energy / n).sqrt(),
        skew,
        energy * voxel_volume,
        probs.iter().map(|p| p * p).sum(),
        m2,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Geometry, ImageVolume, Mask};
    use crate::features::discretize;

    fn roi(values: &[f64]) -> DiscretizedRoi {
        let g = Geometry::new([values.len(), 1, 1], [1.0, 1.0, 2.0], [0.0; 3]).unwrap();
        discretize(
            &ImageVolume::new(g, values.to_vec()).unwrap(),
            &Mask::new(g, vec![true; values.len()]).unwrap(),
            100,
        )
        .unwrap()
    }

    fn get(f: &[f64; 18], name: &str) -> f64 {
        f[FIRSTORDER_NAMES.iter().position(|n| *n == name).unwrap()]
    }

    #[test]
    fn constant_roi() {
        let f = extract_firstorder(&roi(&[4.0; 9]));
        assert_eq!(get(&f, "firstorder_Variance"), 0.0);
        assert_eq!(get(&f, "firstorder_Entropy"), 0.0);
        assert_eq!(get(&f, "firstorder_Uniformity"), 1.0);
        assert_eq!(get(&f, "firstorder_Skewness"), 0.0);
        assert_eq!(get(&f, "firstorder_Kurtosis"), 0.0);
    }

    #[test]
    fn small_hand_case() {
        let f = extract_firstorder(&roi(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(get(&f, "firstorder_Mean"), 2.5);
        assert_eq!(get(&f, "firstorder_Variance"), 1.25);
        assert_eq!(get(&f, "firstorder_Energy"), 30.0);
        assert_eq!(get(&f, "firstorder_TotalEnergy"), 60.0);
        assert_eq!(get(&f, "firstorder_Median"), 2.5);
        assert_eq!(get(&f, "firstorder_MeanAbsoluteDeviation"), 1.0);
        assert_eq!(get(&f, "firstorder_Range"), 3.0);
        assert!((get(&f, "firstorder_Entropy") - 2.0).abs() < 1e-12);
        assert!((get(&f, "firstorder_Uniformity") - 0.25).abs() < 1e-12);
        assert_eq!(get(&f, "firstorder_Skewness"), 0.0);
        let m4 = (2.0 * 1.5f64.powi(4) + 2.0 * 0.5f64.powi(4)) / 4.0;
        assert!((get(&f, "firstorder_Kurtosis") - m4 / 1.5625).abs() < 1e-12);
    }

    #[test]
    fn percentile_rule() {
        let v: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        assert!((percentile(&v, 10.0) - 10.9).abs() < 1e-12);
        assert!((percentile(&v, 90.0) - 90.1).abs() < 1e-12);
        assert_eq!(percentile(&v, 50.0), 50.5);
        let f = extract_firstorder(&roi(&v));
        assert!((get(&f, "firstorder_10Percentile") - 10.9).abs() < 1e-12);
        assert!((get(&f, "firstorder_InterquartileRange") - 49.5).abs() < 1e-12);
    }

    #[test]
    fn shift_moves_mean_only() {
        let a: Vec<f64> = (0..30).map(|k| ((k * 7) % 11) as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 8.0).collect();
        let (fa, fb) = (extract_firstorder(&roi(&a)), extract_firstorder(&roi(&b)));
        assert!((get(&fb, "firstorder_Mean") - get(&fa, "firstorder_Mean") - 8.0).abs() < 1e-12);
        assert_eq!(get(&fb, "firstorder_Entropy"), get(&fa, "firstorder_Entropy"));
        assert!((get(&fb, "firstorder_Variance") - get(&fa, "firstorder_Variance")).abs() < 1e-9);
    }
}
