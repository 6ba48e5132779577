//! Voxel-domain VOI perturbations: spherical dilation/erosion and Gaussian
//! boundary smoothing. All operators expect an isotropic mask.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::grid::Mask;
use crate::{Error, Result};

/// Spherical structuring element as integer voxel offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuringKernel {
    pub radius_mm: f64,
    pub offsets: Vec<[i32; 3]>,
}

impl StructuringKernel {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// All offsets whose physical centre distance is `<= radius_mm`.
pub fn make_spherical_kernel(radius_mm: f64, spacing: [f64; 3]) -> Result<StructuringKernel> {
    if !(radius_mm >= 0.0 && radius_mm.is_finite()) {
        return Err(Error::InvalidParameter(format!("kernel radius must be >= 0, got {radius_mm}")));
    }
    let s0 = spacing[0];
    if !(s0 > 0.0) || spacing.iter().any(|s| ((s - s0) / s0).abs() > 1e-6) {
        return Err(Error::Anisotropic(spacing[0], spacing[1], spacing[2]));
    }
    let reach = (radius_mm / s0).floor() as i32;
    let limit = radius_mm * radius_mm * (1.0 + 1e-9);
    let mut offsets = Vec::new();
    for dz in -reach..=reach {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let d2 = ((dx * dx + dy * dy + dz * dz) as f64) * s0 * s0;
                if d2 <= limit {
                    offsets.push([dx, dy, dz]);
                }
            }
        }
    }
    Ok(StructuringKernel { radius_mm, offsets })
}

fn check_iso(mask: &Mask) -> Result<()> {
    mask.geometry().isotropic_spacing().map(|_| ())
}

/// Binary dilation: a voxel is set when the kernel centred on it touches any
/// foreground voxel. Outside the grid counts as background.
pub fn dilate(mask: &Mask, kernel: &StructuringKernel) -> Result<Mask> {
    check_iso(mask)?;
    let g = *mask.geometry();
    let src = mask.data();
    let mut out = vec![false; g.len()];
    // scatter from foreground voxels: cheaper than gathering for sparse VOIs
    for (idx, _) in src.iter().enumerate().filter(|(_, &b)| b) {
        let [x, y, z] = g.coords(idx);
        for o in &kernel.offsets {
            if let Some(n) = g.checked_index(
                x as isize + o[0] as isize,
                y as isize + o[1] as isize,
                z as isize + o[2] as isize,
            ) {
                out[n] = true;
            }
        }
    }
    Mask::new(g, out)
}

/// Binary erosion: a voxel survives when every kernel offset from it lands on
/// foreground. Outside the grid counts as background.
pub fn erode(mask: &Mask, kernel: &StructuringKernel) -> Result<Mask> {
    check_iso(mask)?;
    let g = *mask.geometry();
    let src = mask.data();
    let mut out = vec![false; g.len()];
    for (idx, _) in src.iter().enumerate().filter(|(_, &b)| b) {
        let [x, y, z] = g.coords(idx);
        out[idx] = kernel.offsets.iter().all(|o| {
            g.checked_index(
                x as isize + o[0] as isize,
                y as isize + o[1] as isize,
                z as isize + o[2] as isize,
            )
            .map(|n| src[n])
            .unwrap_or(false)
        });
    }
    Mask::new(g, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothParams {
    pub sigma_mm: f64,
    pub threshold: f64,
    /// Kernel support in units of sigma.
    pub truncate: f64,
}

impl SmoothParams {
    pub fn new(sigma_mm: f64) -> Self {
        SmoothParams { sigma_mm, threshold: 0.5, truncate: 3.0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma_mm > 0.0 && self.sigma_mm.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma_mm)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Discrete 1-D Gaussian normalised to unit sum, truncated at `truncate * sigma`.
pub fn gaussian_kernel_1d(sigma_mm: f64, spacing: f64, truncate: f64) -> Vec<f64> {
    let radius = (truncate * sigma_mm / spacing).ceil() as i64;
    let mut w: Vec<f64> = (-radius..=radius)
        .map(|d| {
            let x = d as f64 * spacing;
            (-(x * x) / (2.0 * sigma_mm * sigma_mm)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Gaussian smoothing of the binary field followed by a strict `> threshold`
/// cut. The separable kernel sums to one; edges are replicated so a constant
/// mask maps to itself.
pub fn gaussian_smooth_mask(mask: &Mask, params: &SmoothParams) -> Result<Mask> {
    params.validate()?;
    let s = mask.geometry().isotropic_spacing()?;
    let g = *mask.geometry();
    let k = gaussian_kernel_1d(params.sigma_mm, s, params.truncate);
    let r = (k.len() / 2) as isize;
    let mut field: Vec<f64> = mask.data().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut tmp = vec![0.0; field.len()];
    for axis in 0..3 {
        let n = g.dims[axis] as isize;
        for idx in 0..g.len() {
            let c = g.coords(idx);
            let mut acc = 0.0;
            for (ki, w) in k.iter().enumerate() {
                let p = (c[axis] as isize + ki as isize - r).clamp(0, n - 1) as usize;
                let mut cc = c;
                cc[axis] = p;
                acc += w * field[g.index(cc[0], cc[1], cc[2])];
            }
            tmp[idx] = acc;
        }
        core::mem::swap(&mut field, &mut tmp);
    }
    Mask::new(g, field.iter().map(|&v| v > params.threshold).collect())
}
