use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::{ImageVolume, Mask};
use crate::{Error, Result};

/// In-mask voxels of one image, cropped to the mask bounding box and binned.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedRoi {
    /// Bounding-box dimensions (x fastest).
    pub dims: [usize; 3],
    /// Bin per bounding-box voxel, 1-based; 0 marks voxels outside the mask.
    pub levels: Vec<u16>,
    /// Raw intensities of the in-mask voxels in linear order.
    pub values: Vec<f64>,
    pub bin_count: usize,
    /// `bin_count + 1` strictly increasing edges; the last one is bumped by 1.
    pub bin_edges: Vec<f64>,
    pub spacing: [f64; 3],
}

impl DiscretizedRoi {
    /// Highest bin present.
    pub fn max_level(&self) -> usize {
        self.levels.iter().copied().max().unwrap_or(0) as usize
    }

    /// Sorted distinct bins present.
    pub fn present_levels(&self) -> Vec<usize> {
        let mut seen = vec![false; self.max_level() + 1];
        for &l in &self.levels {
            seen[l as usize] = true;
        }
        (1..seen.len()).filter(|&l| seen[l]).collect()
    }

    pub fn voxel_count(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    /// Level at a signed bounding-box coordinate, 0 when outside.
    #[inline]
    pub fn level_at(&self, x: isize, y: isize, z: isize) -> u16 {
        if x < 0 || y < 0 || z < 0 {
            return 0;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return 0;
        }
        self.levels[self.index(x, y, z)]
    }

    /// Builds an ROI straight from a level grid (0 = outside); used by tests
    /// and by callers that bin by other means.
    pub fn from_levels(dims: [usize; 3], levels: Vec<u16>) -> Result<Self> {
        if levels.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::Geometry("level grid size mismatch".into()));
        }
        let values: Vec<f64> = levels.iter().filter(|&&l| l > 0).map(|&l| l as f64).collect();
        if values.is_empty() {
            return Err(Error::EmptyMask);
        }
        let ng = levels.iter().copied().max().unwrap_or(0) as usize;
        Ok(DiscretizedRoi {
            dims,
            levels,
            values,
            bin_count: ng,
            bin_edges: (0..=ng).map(|k| k as f64 + 0.5).collect(),
            spacing: [1.0; 3],
        })
    }
}

/// Bin for `v` given the ROI minimum and bin width; equivalent to counting
/// edges `min + k * width` at or below `v`, with the maximum in the last bin.
fn bin_of(v: f64, min: f64, width: f64, bins: usize) -> u16 {
    let d = v - min;
    let mut b = ((d / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
    while b + 1 < bins && (b + 1) as f64 * width <= d {
        b += 1;
    }
    while b > 0 && b as f64 * width > d {
        b -= 1;
    }
    (b + 1) as u16
}

/// Fixed bin-count discretisation over the in-mask intensity range.
pub fn discretize(image: &ImageVolume, mask: &Mask, bin_count: usize) -> Result<DiscretizedRoi> {
    if bin_count == 0 || bin_count > u16::MAX as usize {
        return Err(Error::InvalidParameter(alloc::format!("bin count {bin_count}")));
    }
    mask.check_geometry(image.geometry())?;
    let g = image.geometry();
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut any = false;
    for (i, &m) in mask.data().iter().enumerate() {
        if m {
            any = true;
            let c = g.coords(i);
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
    }
    if !any {
        return Err(Error::EmptyMask);
    }
    let dims = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
    let mut values = Vec::new();
    let mut inside = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let i = g.index(x + lo[0], y + lo[1], z + lo[2]);
                let m = mask.data()[i];
                inside.push(m);
                if m {
                    values.push(image.data()[i]);
                }
            }
        }
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bin_count as f64;
    let mut bin_edges: Vec<f64> = (0..=bin_count).map(|k| min + k as f64 * width).collect();
    if width > 0.0 {
        bin_edges[bin_count] = max + 1.0;
    } else {
        // constant ROI: one unit-wide bin per level starting at the value
        for (k, e) in bin_edges.iter_mut().enumerate() {
            *e = min + k as f64;
        }
    }
    let mut levels = vec![0u16; inside.len()];
    let mut vi = 0;
    for (l, &m) in levels.iter_mut().zip(&inside) {
        if m {
            *l = if width > 0.0 { bin_of(values[vi], min, width, bin_count) } else { 1 };
            vi += 1;
        }
    }
    Ok(DiscretizedRoi { dims, levels, values, bin_count, bin_edges, spacing: g.spacing })
}
