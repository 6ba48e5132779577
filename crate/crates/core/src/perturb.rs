//! The nine VOI modifications behind one entry point. Masks are moved to an
//! isotropic grid at their finest spacing, modified there and brought back to
//! the original grid.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use crate::grid::{resample_mask_isotropic, resample_to_grid, Mask};
use crate::mesh::{
    fit_ellipsoid, marching_cubes, perlin_randomize, smooth_mesh, voxelize_ellipsoid, voxelize_mesh,
    EllipsoidFitParams, MeshSmoothing, RandomizeParams,
};
use crate::morph::{dilate, erode, gaussian_smooth_mask, make_spherical_kernel, SmoothParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modification {
    /// No-op; used for the baseline and for determinism checks.
    None,
    Dilate1,
    Dilate2,
    Erode1,
    Erode2,
    Smooth1,
    Smooth2,
    Rand1,
    Rand2,
    Ellipsoid,
}

impl Modification {
    pub const ALL: [Modification; 9] = [
        Modification::Dilate1,
        Modification::Dilate2,
        Modification::Erode1,
        Modification::Erode2,
        Modification::Ellipsoid,
        Modification::Rand1,
        Modification::Rand2,
        Modification::Smooth1,
        Modification::Smooth2,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Modification::None => "none",
            Modification::Dilate1 => "dilate1",
            Modification::Dilate2 => "dilate2",
            Modification::Erode1 => "erode1",
            Modification::Erode2 => "erode2",
            Modification::Smooth1 => "smooth1",
            Modification::Smooth2 => "smooth2",
            Modification::Rand1 => "rand1",
            Modification::Rand2 => "rand2",
            Modification::Ellipsoid => "ellipsoid",
        }
    }

    /// Short table label (d1, e2, l, ...).
    pub fn short(self) -> &'static str {
        match self {
            Modification::None => "none",
            Modification::Dilate1 => "d1",
            Modification::Dilate2 => "d2",
            Modification::Erode1 => "e1",
            Modification::Erode2 => "e2",
            Modification::Smooth1 => "s1",
            Modification::Smooth2 => "s2",
            Modification::Rand1 => "r1",
            Modification::Rand2 => "r2",
            Modification::Ellipsoid => "l",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Modification::Rand1 | Modification::Rand2)
    }

    /// Stable numeric id used when deriving per-subject seeds.
    pub fn ordinal(self) -> u64 {
        match self {
            Modification::None => 0,
            Modification::Dilate1 => 1,
            Modification::Dilate2 => 2,
            Modification::Erode1 => 3,
            Modification::Erode2 => 4,
            Modification::Smooth1 => 5,
            Modification::Smooth2 => 6,
            Modification::Rand1 => 7,
            Modification::Rand2 => 8,
            Modification::Ellipsoid => 9,
        }
    }
}

impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Modification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [Modification::None].into_iter().chain(Modification::ALL);
        for m in all {
            if m.id() == s || m.short() == s {
                return Ok(m);
            }
        }
        Err(Error::InvalidParameter(format!("unknown modification {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbConfig {
    /// Radii (mm) for magnitude 1 and 2 of dilation/erosion.
    pub morph_radius_mm: [f64; 2],
    /// Gaussian sigma (mm) for smoothing 1 and 2.
    pub smooth_sigma_mm: [f64; 2],
    /// Maximum boundary displacement (mm) for randomisation 1 and 2.
    pub rand_distance_mm: [f64; 2],
    pub noise_frequency: f64,
    pub mesh_smoothing: MeshSmoothing,
    pub ellipsoid: EllipsoidFitParams,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            morph_radius_mm: [1.0, 2.0],
            smooth_sigma_mm: [1.0, 2.0],
            rand_distance_mm: [1.0, 2.0],
            noise_frequency: 4.0,
            mesh_smoothing: MeshSmoothing::default(),
            ellipsoid: EllipsoidFitParams::default(),
        }
    }
}

/// Applies `modification` to `mask`; `seed` only matters for randomisation.
pub fn apply_modification(mask: &Mask, modification: Modification, config: &PerturbConfig, seed: u64) -> Result<Mask> {
    if modification == Modification::None {
        return Ok(mask.clone());
    }
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let g = *mask.geometry();
    let t = g.min_spacing();
    let iso = resample_mask_isotropic(mask, t)?;
    let spacing = iso.geometry().spacing;
    let out = match modification {
        Modification::None => unreachable!(),
        Modification::Dilate1 | Modification::Dilate2 | Modification::Erode1 | Modification::Erode2 => {
            let r = match modification {
                Modification::Dilate1 | Modification::Erode1 => config.morph_radius_mm[0],
                _ => config.morph_radius_mm[1],
            };
            let k = make_spherical_kernel(r, spacing)?;
            let m = if matches!(modification, Modification::Dilate1 | Modification::Dilate2) {
                dilate(&iso, &k)?
            } else {
                erode(&iso, &k)?
            };
            resample_to_grid(&m, &g)
        }
        Modification::Smooth1 | Modification::Smooth2 => {
            let s = if modification == Modification::Smooth1 {
                config.smooth_sigma_mm[0]
            } else {
                config.smooth_sigma_mm[1]
            };
            resample_to_grid(&gaussian_smooth_mask(&iso, &SmoothParams::new(s))?, &g)
        }
        Modification::Rand1 | Modification::Rand2 => {
            let d = if modification == Modification::Rand1 {
                config.rand_distance_mm[0]
            } else {
                config.rand_distance_mm[1]
            };
            let mesh = marching_cubes(&iso)?;
            let params = RandomizeParams {
                max_distance_mm: d,
                seed,
                noise_frequency: config.noise_frequency,
                smoothing: config.mesh_smoothing,
            };
            voxelize_mesh(&perlin_randomize(&mesh, &params)?, &g)?
        }
        Modification::Ellipsoid => {
            let mesh = marching_cubes(&iso)?;
            let s = config.mesh_smoothing;
            let e = fit_ellipsoid(&smooth_mesh(&mesh, s.iterations, s.factor), &config.ellipsoid)?;
            voxelize_ellipsoid(&e, &g)
        }
    };
    Ok(out)
}

/// Human-readable label, e.g. for plots.
pub fn describe(modification: Modification, config: &PerturbConfig) -> String {
    match modification {
        Modification::None => "original".into(),
        Modification::Dilate1 => format!("dilation r={} mm", config.morph_radius_mm[0]),
        Modification::Dilate2 => format!("dilation r={} mm", config.morph_radius_mm[1]),
        Modification::Erode1 => format!("erosion r={} mm", config.morph_radius_mm[0]),
        Modification::Erode2 => format!("erosion r={} mm", config.morph_radius_mm[1]),
        Modification::Smooth1 => format!("smoothing sigma={} mm", config.smooth_sigma_mm[0]),
        Modification::Smooth2 => format!("smoothing sigma={} mm", config.smooth_sigma_mm[1]),
        Modification::Rand1 => format!("randomisation {} mm", config.rand_distance_mm[0]),
        Modification::Rand2 => format!("randomisation {} mm", config.rand_distance_mm[1]),
        Modification::Ellipsoid => "ellipsoid fit".into(),
    }
}
