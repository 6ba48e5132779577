use alloc::vec::Vec;

use super::texture::{mean_of, Emphasis, SparseCounts, DIRECTIONS};
use super::DiscretizedRoi;

pub const GLRLM_NAMES: [&str; 16] = [
    "glrlm_GrayLevelNonUniformity",
    "glrlm_GrayLevelNonUniformityNormalized",
    "glrlm_GrayLevelVariance",
    "glrlm_HighGrayLevelRunEmphasis",
    "glrlm_LongRunEmphasis",
    "glrlm_LongRunHighGrayLevelEmphasis",
    "glrlm_LongRunLowGrayLevelEmphasis",
    "glrlm_LowGrayLevelRunEmphasis",
    "glrlm_RunEntropy",
    "glrlm_RunLengthNonUniformity",
    "glrlm_RunLengthNonUniformityNormalized",
    "glrlm_RunPercentage",
    "glrlm_RunVariance",
    "glrlm_ShortRunEmphasis",
    "glrlm_ShortRunHighGrayLevelEmphasis",
    "glrlm_ShortRunLowGrayLevelEmphasis",
];

/// Run-length counts (level, run length) for each of the 13 directions.
pub fn glrlm_matrices(roi: &DiscretizedRoi) -> Vec<SparseCounts> {
    let [nx, ny, nz] = roi.dims;
    DIRECTIONS
        .iter()
        .map(|d| {
            let mut m = SparseCounts::new();
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        let l = roi.levels[roi.index(x, y, z)];
                        if l == 0 {
                            continue;
                        }
                        let (x, y, z) = (x as isize, y as isize, z as isize);
                        if roi.level_at(x - d[0], y - d[1], z - d[2]) == l {
                            continue;
                        }
                        let mut len = 1;
                        while roi.level_at(x + d[0] * len as isize, y + d[1] * len as isize, z + d[2] * len as isize)
                            == l
                        {
                            len += 1;
                        }
                        *m.entry((l as usize, len)).or_default() += 1;
                    }
                }
            }
            m
        })
        .collect()
}

pub fn extract_glrlm(roi: &DiscretizedRoi) -> [f64; 16] {
    let np = roi.voxel_count() as f64;
    let rows: Vec<[f64; 16]> = glrlm_matrices(roi)
        .iter()
        .filter(|m| !m.is_empty())
        .map(|m| {
            let e = Emphasis::from_counts(m);
            [
                e.gln,
                e.glnn,
                e.glv,
                e.high_gl,
                e.long,
                e.long_high,
                e.long_low,
                e.low_gl,
                e.entropy,
                e.jn,
                e.jnn,
                e.n / np,
                e.jv,
                e.short,
                e.short_high,
                e.short_low,
            ]
        })
        .collect();
    mean_of(&rows)
}
