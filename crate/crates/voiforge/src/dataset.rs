//! Subjects ready for the pipeline: isotropic, z-scored, largest lesion only.

use std::path::Path;

use rayon::prelude::*;
use voiforge_core::grid::{largest_component, resample_image_isotropic, resample_mask_isotropic, zscore_normalize, Interpolation};
use voiforge_core::{ImageVolume, Mask};

use crate::config::ExperimentConfig;
use crate::error::{Result, VfError};
use crate::nrrd;
use crate::phantom::generate_cohort;
use crate::tables::read_manifest;

#[derive(Debug, Clone)]
pub struct Subject {
    pub id: String,
    pub label: u8,
    pub image: ImageVolume,
    pub mask: Mask,
}

/// Image: linear resampling then z-score over the whole volume.
/// Mask: nearest resampling, largest 26-connected component.
pub fn preprocess(image: &ImageVolume, mask: &Mask, target_spacing: f64) -> Result<(ImageVolume, Mask)> {
    if image.geometry() != mask.geometry() {
        return Err(VfError::Data("image and mask grids differ".into()));
    }
    let img = resample_image_isotropic(image, target_spacing, Interpolation::Linear)?;
    let img = zscore_normalize(&img)?;
    let m = resample_mask_isotropic(mask, target_spacing)?;
    if m.geometry() != img.geometry() {
        return Err(VfError::Data("resampled image and mask grids differ".into()));
    }
    let m = largest_component(&m)?;
    Ok((img, m))
}

/// Loads and preprocesses the experiment's cohort, in manifest order.
pub fn load_subjects(cfg: &ExperimentConfig) -> Result<Vec<Subject>> {
    if let Some(spec) = &cfg.phantom {
        let raw = generate_cohort(spec)?.into_iter().map(|s| (s.id, s.label, s.image, s.mask)).collect();
        return prepare(raw, cfg.target_spacing_mm);
    }
    let path = cfg.manifest.as_ref().ok_or_else(|| VfError::Config("no manifest".into()))?;
    load_manifest(path, cfg.subtype.as_deref(), cfg.target_spacing_mm)
}

/// Reads and preprocesses the manifest's subjects, optionally one subtype only.
pub fn load_manifest(path: &Path, subtype: Option<&str>, target_spacing: f64) -> Result<Vec<Subject>> {
    let records: Vec<_> =
        read_manifest(path)?.into_iter().filter(|r| subtype.is_none_or(|s| r.subtype == s)).collect();
    let raw = records
        .par_iter()
        .map(|r| Ok((r.subject_id.clone(), r.pcr, nrrd::read_image(&r.image_path)?, nrrd::read_mask(&r.mask_path)?)))
        .collect::<Result<Vec<_>>>()?;
    prepare(raw, target_spacing)
}

fn prepare(raw: Vec<(String, u8, ImageVolume, Mask)>, target_spacing: f64) -> Result<Vec<Subject>> {
    if raw.is_empty() {
        return Err(VfError::Data("no subjects after filtering".into()));
    }
    raw.into_par_iter()
        .map(|(id, label, image, mask)| {
            let (image, mask) =
                preprocess(&image, &mask, target_spacing).map_err(|e| VfError::Data(format!("subject {id}: {e}")))?;
            Ok(Subject { id, label, image, mask })
        })
        .collect()
}
