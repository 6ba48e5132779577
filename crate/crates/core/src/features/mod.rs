//! The 102 radiomics features: 14 shape, 18 first-order, 24 GLCM, 16 GLRLM,
//! 16 GLSZM and 14 GLDM, computed on the original (unfiltered) image.

mod discretize;
mod firstorder;
mod glcm;
mod gldm;
mod glrlm;
mod glszm;
mod shape;
mod texture;

pub use discretize::{discretize, DiscretizedRoi};
pub use firstorder::{extract_firstorder, percentile, FIRSTORDER_NAMES};
pub use glcm::{extract_glcm, glcm_matrices, GLCM_NAMES};
pub use gldm::{extract_gldm, gldm_matrix, GLDM_NAMES};
pub use glrlm::{extract_glrlm, glrlm_matrices, GLRLM_NAMES};
pub use glszm::{extract_glszm, glszm_matrix, GLSZM_NAMES};
pub use shape::{extract_shape, SHAPE_NAMES};
pub use texture::{SparseCounts, DIRECTIONS};

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::grid::{ImageVolume, Mask};
use crate::{Error, Result};

pub const FEATURE_COUNT: usize = 102;

/// Feature classes in canonical output order with their member counts.
pub const CLASSES: [(&str, usize); 6] =
    [("shape", 14), ("firstorder", 18), ("glcm", 24), ("glrlm", 16), ("glszm", 16), ("gldm", 14)];

/// All 102 names in canonical order.
pub fn feature_names() -> Vec<&'static str> {
    let mut v = Vec::with_capacity(FEATURE_COUNT);
    v.extend_from_slice(&SHAPE_NAMES);
    v.extend_from_slice(&FIRSTORDER_NAMES);
    v.extend_from_slice(&GLCM_NAMES);
    v.extend_from_slice(&GLRLM_NAMES);
    v.extend_from_slice(&GLSZM_NAMES);
    v.extend_from_slice(&GLDM_NAMES);
    v
}

/// Class prefix of a feature name (`glcm_MCC` -> `glcm`).
pub fn feature_class(name: &str) -> &str {
    name.split('_').next().unwrap_or(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    pub bin_count: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { bin_count: 100 }
    }
}

/// 102 values in `feature_names()` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_names().iter().position(|n| *n == name).map(|i| self.0[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        feature_names().into_iter().zip(self.0.iter().copied())
    }
}

/// Extracts all 102 features from one image/mask pair.
pub fn extract_all(image: &ImageVolume, mask: &Mask, config: &ExtractConfig) -> Result<FeatureVector> {
    let roi = discretize(image, mask, config.bin_count)?;
    let mut v = Vec::with_capacity(FEATURE_COUNT);
    v.extend_from_slice(&extract_shape(mask)?);
    v.extend_from_slice(&extract_firstorder(&roi));
    v.extend_from_slice(&extract_glcm(&roi)?);
    v.extend_from_slice(&extract_glrlm(&roi));
    v.extend_from_slice(&extract_glszm(&roi));
    v.extend_from_slice(&extract_gldm(&roi));
    for x in v.iter_mut() {
        // fold -0.0 into 0.0 so written tables are canonical
        *x += 0.0;
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::Degenerate(alloc::format!("feature {} is not finite", feature_names()[i])));
    }
    Ok(FeatureVector(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Geometry;
    use alloc::vec;

    fn roi(dims: [usize; 3], levels: &[u16]) -> DiscretizedRoi {
        DiscretizedRoi::from_levels(dims, levels.to_vec()).unwrap()
    }

    #[test]
    fn census() {
        let names = feature_names();
        assert_eq!(names.len(), FEATURE_COUNT);
        for (class, n) in CLASSES {
            assert_eq!(names.iter().filter(|f| feature_class(f) == class).count(), n);
        }
        assert!(!names.iter().any(|n| n.starts_with("ngtdm")));
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), FEATURE_COUNT);
    }

    #[test]
    fn glcm_line_hand_case() {
        let r = roi([1, 1, 4], &[1, 1, 2, 2]);
        let m = &glcm_matrices(&r)[2];
        assert_eq!(m, &vec![2, 1, 1, 2]);
        let t: u64 = m.iter().sum();
        assert_eq!([m[0] as f64 / t as f64, m[1] as f64 / t as f64], [1.0 / 3.0, 1.0 / 6.0]);
        // only the z direction has pairs
        assert!(glcm_matrices(&r).iter().enumerate().all(|(k, m)| (k == 2) == m.iter().any(|&c| c > 0)));
        let f = extract_glcm(&r).unwrap();
        let get = |n: &str| f[GLCM_NAMES.iter().position(|x| *x == n).unwrap()];
        assert!((get("glcm_Contrast") - 1.0 / 3.0).abs() < 1e-12);
        assert!((get("glcm_JointAverage") - 1.5).abs() < 1e-12);
        assert!((get("glcm_JointEnergy") - (2.0 / 9.0 + 2.0 / 36.0)).abs() < 1e-12);
        assert!((get("glcm_MaximumProbability") - 1.0 / 3.0).abs() < 1e-12);
        // sigma^2 = 1/4, autocorr = (1 + 2*2/6 + 4/3) ... -> corr = (autocorr - 2.25) / 0.25
        let auto = 1.0 / 3.0 + 2.0 * 2.0 / 6.0 + 4.0 / 3.0;
        assert!((get("glcm_Correlation") - (auto - 2.25) / 0.25).abs() < 1e-12);
    }

    #[test]
    fn glrlm_line_hand_case() {
        let r = roi([1, 1, 4], &[1, 1, 2, 2]);
        let m = &glrlm_matrices(&r)[2];
        assert_eq!(m.iter().map(|(k, v)| (*k, *v)).collect::<Vec<_>>(), vec![((1, 2), 1), ((2, 2), 1)]);
        let f = extract_glrlm(&r);
        let get = |n: &str| f[GLRLM_NAMES.iter().position(|x| *x == n).unwrap()];
        // z: SRE 0.25; the other 12 directions: 4 runs of length 1, SRE 1
        assert!((get("glrlm_ShortRunEmphasis") - (0.25 + 12.0) / 13.0).abs() < 1e-12);
        assert!((get("glrlm_RunPercentage") - (0.5 + 12.0) / 13.0).abs() < 1e-12);
    }

    #[test]
    fn constant_cube_single_zone() {
        let r = roi([3, 3, 3], &[1; 27]);
        let z = glszm_matrix(&r);
        assert_eq!(z.into_iter().collect::<Vec<_>>(), vec![((1, 27), 1)]);
        let d = gldm_matrix(&r);
        // centre has 26 neighbours, corners 7
        assert_eq!(d.get(&(1, 27)), Some(&1));
        assert_eq!(d.get(&(1, 8)), Some(&8));
    }

    #[test]
    fn constant_roi_texture_conventions() {
        let r = roi([3, 3, 3], &[1; 27]);
        let f = extract_glcm(&r).unwrap();
        let get = |n: &str| f[GLCM_NAMES.iter().position(|x| *x == n).unwrap()];
        assert_eq!(get("glcm_Contrast"), 0.0);
        assert_eq!(get("glcm_Correlation"), 1.0);
        assert_eq!(get("glcm_MCC"), 1.0);
        assert_eq!(get("glcm_ClusterShade"), 0.0);
    }

    #[test]
    fn single_voxel_has_no_cooccurrence() {
        let r = roi([1, 1, 1], &[1]);
        assert!(matches!(extract_glcm(&r), Err(Error::NoCooccurrences)));
    }

    fn shells() -> (ImageVolume, Mask) {
        let g = Geometry::new([18; 3], [1.0; 3], [0.0; 3]).unwrap();
        let mut img = Vec::new();
        let mut m = Vec::new();
        for i in 0..g.len() {
            let p = g.position(g.coords(i));
            let r = ((p[0] - 8.5).powi(2) + (p[1] - 8.5).powi(2) + (p[2] - 8.5).powi(2)).sqrt();
            img.push(if r < 4.0 { 100.0 } else { 40.0 } + ((i * 37) % 11) as f64);
            m.push(r <= 7.0);
        }
        (ImageVolume::new(g, img).unwrap(), Mask::new(g, m).unwrap())
    }

    #[test]
    fn shell_phantom_all_finite_and_deterministic() {
        let (img, m) = shells();
        let a = extract_all(&img, &m, &ExtractConfig::default()).unwrap();
        assert_eq!(a.0.len(), FEATURE_COUNT);
        assert!(a.0.iter().all(|v| v.is_finite()));
        let b = extract_all(&img, &m, &ExtractConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.get("glcm_MCC").unwrap() > 0.0 && a.get("glcm_MCC").unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn shape_ignores_intensities() {
        let (img, m) = shells();
        let flipped = ImageVolume::new(*img.geometry(), img.data().iter().map(|v| -3.0 * v).collect()).unwrap();
        let a = extract_all(&img, &m, &ExtractConfig::default()).unwrap();
        let b = extract_all(&flipped, &m, &ExtractConfig::default()).unwrap();
        assert_eq!(a.0[..14], b.0[..14]);
    }

    #[test]
    fn integer_shift_keeps_texture() {
        let (img, m) = shells();
        let shifted = ImageVolume::new(*img.geometry(), img.data().iter().map(|v| v + 250.0).collect()).unwrap();
        let a = extract_all(&img, &m, &ExtractConfig::default()).unwrap();
        let b = extract_all(&shifted, &m, &ExtractConfig::default()).unwrap();
        assert_eq!(a.0[14 + 18..], b.0[14 + 18..]);
        assert!((b.get("firstorder_Mean").unwrap() - a.get("firstorder_Mean").unwrap() - 250.0).abs() < 1e-9);
    }

    #[test]
    fn whole_voxel_translation_invariant() {
        let (img, m) = shells();
        let g = *img.geometry();
        let shift = |x: usize, y: usize, z: usize| {
            let mut iv = vec![0.0; g.len()];
            let mut mv = vec![false; g.len()];
            for zz in 0..g.dims[2] {
                for yy in 0..g.dims[1] {
                    for xx in 0..g.dims[0] {
                        let src = g.index((xx + g.dims[0] - x) % g.dims[0], (yy + g.dims[1] - y) % g.dims[1], (zz + g.dims[2] - z) % g.dims[2]);
                        iv[g.index(xx, yy, zz)] = img.data()[src];
                        mv[g.index(xx, yy, zz)] = m.data()[src];
                    }
                }
            }
            (ImageVolume::new(g, iv).unwrap(), Mask::new(g, mv).unwrap())
        };
        let a = extract_all(&img, &m, &ExtractConfig::default()).unwrap();
        let (i2, m2) = shift(1, 0, 1);
        let b = extract_all(&i2, &m2, &ExtractConfig::default()).unwrap();
        for (k, (x, y)) in a.0.iter().zip(&b.0).enumerate() {
            // shape features are measured in physical space, so allow round-off
            if k < 14 {
                assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{}", feature_names()[k]);
            } else {
                assert_eq!(x, y, "{}", feature_names()[k]);
            }
        }
    }
}
