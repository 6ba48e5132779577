use super::texture::{Emphasis, SparseCounts};
use super::DiscretizedRoi;

pub const GLDM_NAMES: [&str; 14] = [
    "gldm_DependenceEntropy",
    "gldm_DependenceNonUniformity",
    "gldm_DependenceNonUniformityNormalized",
    "gldm_DependenceVariance",
    "gldm_GrayLevelNonUniformity",
    "gldm_GrayLevelVariance",
    "gldm_HighGrayLevelEmphasis",
    "gldm_LargeDependenceEmphasis",
    "gldm_LargeDependenceHighGrayLevelEmphasis",
    "gldm_LargeDependenceLowGrayLevelEmphasis",
    "gldm_LowGrayLevelEmphasis",
    "gldm_SmallDependenceEmphasis",
    "gldm_SmallDependenceHighGrayLevelEmphasis",
    "gldm_SmallDependenceLowGrayLevelEmphasis",
];

/// Dependence counts (level, 1 + equal-level in-mask 26-neighbours).
pub fn gldm_matrix(roi: &DiscretizedRoi) -> SparseCounts {
    let [nx, ny, nz] = roi.dims;
    let mut m = SparseCounts::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let l = roi.levels[roi.index(x, y, z)];
                if l == 0 {
                    continue;
                }
                let mut dep = 1;
                for dz in -1..=1isize {
                    for dy in -1..=1isize {
                        for dx in -1..=1isize {
                            if (dx, dy, dz) != (0, 0, 0)
                                && roi.level_at(x as isize + dx, y as isize + dy, z as isize + dz) == l
                            {
                                dep += 1;
                            }
                        }
                    }
                }
                *m.entry((l as usize, dep)).or_default() += 1;
            }
        }
    }
    m
}

pub fn extract_gldm(roi: &DiscretizedRoi) -> [f64; 14] {
    let e = Emphasis::from_counts(&gldm_matrix(roi));
    [
        e.entropy,
        e.jn,
        e.jnn,
        e.jv,
        e.gln,
        e.glv,
        e.high_gl,
        e.long,
        e.long_high,
        e.long_low,
        e.low_gl,
        e.short,
        e.short_high,
        e.short_low,
    ]
}
