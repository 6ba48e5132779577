use alloc::vec;
use alloc::vec::Vec;

use super::texture::{Emphasis, SparseCounts};
use super::DiscretizedRoi;

pub const GLSZM_NAMES: [&str; 16] = [
    "glszm_GrayLevelNonUniformity",
    "glszm_GrayLevelNonUniformityNormalized",
    "glszm_GrayLevelVariance",
    "glszm_HighGrayLevelZoneEmphasis",
    "glszm_LargeAreaEmphasis",
    "glszm_LargeAreaHighGrayLevelEmphasis",
    "glszm_LargeAreaLowGrayLevelEmphasis",
    "glszm_LowGrayLevelZoneEmphasis",
    "glszm_SizeZoneNonUniformity",
    "glszm_SizeZoneNonUniformityNormalized",
    "glszm_SmallAreaEmphasis",
    "glszm_SmallAreaHighGrayLevelEmphasis",
    "glszm_SmallAreaLowGrayLevelEmphasis",
    "glszm_ZoneEntropy",
    "glszm_ZonePercentage",
    "glszm_ZoneVariance",
];

/// Zone counts (level, zone size) over 26-connected equal-level zones.
pub fn glszm_matrix(roi: &DiscretizedRoi) -> SparseCounts {
    let [nx, ny, _] = roi.dims;
    let mut seen = vec![false; roi.levels.len()];
    let mut m = SparseCounts::new();
    let mut stack = Vec::new();
    for start in 0..roi.levels.len() {
        let l = roi.levels[start];
        if l == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            let (x, y, z) = ((v % nx) as isize, ((v / nx) % ny) as isize, (v / (nx * ny)) as isize);
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if roi.level_at(x + dx, y + dy, z + dz) != l {
                            continue;
                        }
                        let w = roi.index((x + dx) as usize, (y + dy) as usize, (z + dz) as usize);
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
        }
        *m.entry((l as usize, size)).or_default() += 1;
    }
    m
}

pub fn extract_glszm(roi: &DiscretizedRoi) -> [f64; 16] {
    let e = Emphasis::from_counts(&glszm_matrix(roi));
    [
        e.gln,
        e.glnn,
        e.glv,
        e.high_gl,
        e.long,
        e.long_high,
        e.long_low,
        e.low_gl,
        e.jn,
        e.jnn,
        e.short,
        e.short_high,
        e.short_low,
        e.entropy,
        e.n / roi.voxel_count() as f64,
        e.jv,
    ]
}
