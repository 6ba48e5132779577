//! Synthetic lesion cohorts with planted class differences.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voiforge_core::mesh::PerlinNoise;
use voiforge_core::rng::{derive_seed, seeded, standard_normal, Rng};
use voiforge_core::{Geometry, ImageVolume, Mask};

use crate::error::{Result, VfError};
use crate::nrrd;
use crate::tables::{write_manifest, SubjectRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LesionShape {
    Ball,
    /// Star-shaped lesion with a noise-modulated radius.
    Blob,
}

/// Class-1 shifts, in units of the between-subject SD of each quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedSignal {
    pub intensity: f64,
    pub radius: f64,
    pub lobulation: f64,
    pub texture: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomSpec {
    pub n_subjects: usize,
    /// Fraction of subjects with label 1.
    pub class_balance: f64,
    pub geometry: LesionShape,
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub radius_mm: f64,
    pub radius_sd_mm: f64,
    /// Relative radius modulation of blobs.
    pub lobulation: f64,
    pub lobulation_sd: f64,
    pub lobulation_frequency: f64,
    pub lesion_mean: f64,
    pub lesion_mean_sd: f64,
    pub background_mean: f64,
    /// SD of the correlated noise field.
    pub noise_sd: f64,
    /// Gaussian correlation length of the noise field.
    pub texture_sigma_mm: f64,
    /// Between-subject log-SD of the correlation length.
    pub texture_sigma_log_sd: f64,
    /// Between-subject log-SD of the lesion noise amplitude.
    pub contrast_log_sd: f64,
    /// Partial-volume blur of the lesion border.
    pub edge_blur_mm: f64,
    /// Extra intensity at the lesion centre, fading linearly to the border.
    pub gradient: f64,
    pub signal: PlantedSignal,
    pub seed: u64,
    pub subtype: String,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            n_subjects: 40,
            class_balance: 0.5,
            geometry: LesionShape::Blob,
            dims: [36, 36, 36],
            spacing_mm: [1.0, 1.0, 1.0],
            radius_mm: 8.0,
            radius_sd_mm: 1.0,
            lobulation: 0.25,
            lobulation_sd: 0.1,
            lobulation_frequency: 2.0,
            lesion_mean: 100.0,
            lesion_mean_sd: 10.0,
            background_mean: 40.0,
            noise_sd: 10.0,
            texture_sigma_mm: 1.0,
            texture_sigma_log_sd: 0.4,
            contrast_log_sd: 0.6,
            edge_blur_mm: 1.0,
            gradient: 20.0,
            signal: PlantedSignal::default(),
            seed: 0,
            subtype: "phantom".into(),
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(VfError::Config(format!("phantom: {m}")));
        if self.n_subjects < 20 {
            return err("n_subjects must be at least 20");
        }
        if !(self.class_balance > 0.0 && self.class_balance < 1.0) {
            return err("class_balance must lie in (0, 1)");
        }
        if self.dims.iter().any(|&d| d < 8) || self.spacing_mm.iter().any(|&s| !(s > 0.0)) {
            return err("dims must be at least 8 and spacings positive");
        }
        if !(self.radius_mm > 0.0) || self.radius_sd_mm < 0.0 || self.noise_sd < 0.0 || self.texture_sigma_mm < 0.0 {
            return err("radius must be positive, spreads non-negative");
        }
        if self.texture_sigma_log_sd < 0.0 || self.contrast_log_sd < 0.0 || self.edge_blur_mm < 0.0 {
            return err("log spreads must be non-negative");
        }
        if !(0.0..0.9).contains(&self.lobulation) {
            return err("lobulation must lie in [0, 0.9)");
        }
        Ok(())
    }

    /// Label of subject `i`: positives spread evenly through the index range.
    pub fn label(&self, i: usize) -> u8 {
        let b = self.class_balance;
        u8::from(((i + 1) as f64 * b).floor() > (i as f64 * b).floor())
    }
}

#[derive(Debug, Clone)]
pub struct PhantomSubject {
    pub id: String,
    pub label: u8,
    pub image: ImageVolume,
    pub mask: Mask,
}

fn blur_axis(field: &mut [f64], dims: [usize; 3], axis: usize, kernel: &[f64]) {
    let r = (kernel.len() / 2) as isize;
    let stride = [1, dims[0], dims[0] * dims[1]][axis];
    let n = dims[axis] as isize;
    let src = field.to_vec();
    for (idx, out) in field.iter_mut().enumerate() {
        let c = ((idx / stride) % dims[axis]) as isize;
        let base = idx as isize - c * stride as isize;
        *out = kernel
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let p = (c + k as isize - r).clamp(0, n - 1);
                w * src[(base + p * stride as isize) as usize]
            })
            .sum();
    }
}

/// Unit-variance Gaussian noise correlated over `sigma_mm`.
fn gaussian_kernel(s: f64) -> Vec<f64> {
    let r = (3.0 * s).ceil() as isize;
    let k: Vec<f64> = (-r..=r).map(|x| (-(x * x) as f64 / (2.0 * s * s)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

fn correlated_noise(g: &Geometry, sigma_mm: f64, rng: &mut Rng) -> Vec<f64> {
    let mut f: Vec<f64> = (0..g.len()).map(|_| standard_normal(rng)).collect();
    for axis in 0..3 {
        let s = sigma_mm / g.spacing[axis];
        if s < 1e-3 {
            continue;
        }
        blur_axis(&mut f, g.dims, axis, &gaussian_kernel(s));
    }
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let sd = (f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    f.iter().map(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 }).collect()
}

pub fn generate_subject(spec: &PhantomSpec, i: usize) -> Result<PhantomSubject> {
    let label = spec.label(i);
    let y = f64::from(label);
    let mut rng = seeded(derive_seed(spec.seed, i as u64));
    let sig = spec.signal;
    let radius = (spec.radius_mm + spec.radius_sd_mm * (standard_normal(&mut rng) + y * sig.radius)).max(2.0);
    let lob = match spec.geometry {
        LesionShape::Ball => 0.0,
        LesionShape::Blob => {
            (spec.lobulation + spec.lobulation_sd * (standard_normal(&mut rng) + y * sig.lobulation)).clamp(0.0, 0.85)
        }
    };
    let mean = spec.lesion_mean + spec.lesion_mean_sd * (standard_normal(&mut rng) + y * sig.intensity);
    let contrast = spec.noise_sd * (spec.contrast_log_sd * (standard_normal(&mut rng) + y * sig.texture)).exp();
    let texture_sigma = spec.texture_sigma_mm * (spec.texture_sigma_log_sd * standard_normal(&mut rng)).exp();
    let noise_seed = rand::Rng::random::<u64>(&mut rng);
    let jitter: Vec<f64> = (0..3).map(|_| rand::Rng::random_range(&mut rng, -0.5..0.5)).collect();

    let g = Geometry::new(spec.dims, spec.spacing_mm, [0.0; 3])?;
    let centre: Vec<f64> = (0..3).map(|a| ((g.dims[a] - 1) as f64 / 2.0 + jitter[a]) * g.spacing[a]).collect();
    let perlin = PerlinNoise::new(noise_seed);
    let texture = correlated_noise(&g, texture_sigma, &mut rng);
    let mut inside = vec![false; g.len()];
    let mut lesion = vec![0.0; g.len()];
    for (idx, v) in lesion.iter_mut().enumerate() {
        let p = g.position(g.coords(idx));
        let d: Vec<f64> = (0..3).map(|a| p[a] - centre[a]).collect();
        let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let bound = if lob > 0.0 && dist > 0.0 {
            let f = spec.lobulation_frequency / dist;
            radius * (1.0 + lob * perlin.noise(d[0] * f + 0.5, d[1] * f + 0.5, d[2] * f + 0.5))
        } else {
            radius
        };
        inside[idx] = dist <= bound;
        *v = mean + spec.gradient * (1.0 - dist / bound).max(0.0) + contrast * texture[idx];
    }
    let mut weight: Vec<f64> = inside.iter().map(|&b| f64::from(u8::from(b))).collect();
    for axis in 0..3 {
        let s = spec.edge_blur_mm / g.spacing[axis];
        if s >= 1e-3 {
            blur_axis(&mut weight, g.dims, axis, &gaussian_kernel(s));
        }
    }
    let data: Vec<f64> = (0..g.len())
        .map(|idx| {
            let background = spec.background_mean + spec.noise_sd * texture[idx];
            background + weight[idx] * (lesion[idx] - background)
        })
        .collect();
    let mask = Mask::new(g, inside)?;
    if mask.count() == 0 {
        return Err(VfError::Data(format!("phantom subject {i} has an empty lesion")));
    }
    Ok(PhantomSubject { id: format!("P{i:03}"), label, image: ImageVolume::new(g, data)?, mask })
}

pub fn generate_cohort(spec: &PhantomSpec) -> Result<Vec<PhantomSubject>> {
    use rayon::prelude::*;
    spec.validate()?;
    (0..spec.n_subjects).into_par_iter().map(|i| generate_subject(spec, i)).collect()
}

/// Writes `images/<id>.nrrd`, `masks/<id>.nrrd` and `manifest.csv` under `dir`.
pub fn write_cohort(spec: &PhantomSpec, dir: &Path) -> Result<PathBuf> {
    let cohort = generate_cohort(spec)?;
    let mut records = Vec::new();
    for s in &cohort {
        let image_path = PathBuf::from("images").join(format!("{}.nrrd", s.id));
        let mask_path = PathBuf::from("masks").join(format!("{}.nrrd", s.id));
        nrrd::write_image(&s.image, &dir.join(&image_path))?;
        nrrd::write_mask(&s.mask, &dir.join(&mask_path))?;
        records.push(SubjectRecord {
            subject_id: s.id.clone(),
            image_path,
            mask_path,
            pcr: s.label,
            subtype: spec.subtype.clone(),
        });
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&records, &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use voiforge_core::grid::label_components;

    #[test]
    fn labels_follow_balance() {
        let spec = PhantomSpec { n_subjects: 40, class_balance: 0.25, ..PhantomSpec::default() };
        assert_eq!((0..40).map(|i| spec.label(i) as usize).sum::<usize>(), 10);
    }

    #[test]
    fn lesions_are_single_components_inside_the_grid() {
        let spec = PhantomSpec { lobulation: 0.3, ..PhantomSpec::default() };
        for i in 0..6 {
            let s = generate_subject(&spec, i).unwrap();
            let (_, sizes) = label_components(&s.mask);
            assert_eq!(sizes.len(), 1);
            let g = s.mask.geometry();
            for idx in 0..g.len() {
                let c = g.coords(idx);
                if c.iter().zip(&g.dims).any(|(&v, &d)| v == 0 || v == d - 1) {
                    assert!(!s.mask.data()[idx]);
                }
            }
        }
    }

    #[test]
    fn seeded_and_distinct() {
        let spec = PhantomSpec::default();
        let a = generate_subject(&spec, 3).unwrap();
        let b = generate_subject(&spec, 3).unwrap();
        assert_eq!(a.image.data(), b.image.data());
        let c = generate_subject(&PhantomSpec { seed: 1, ..spec }, 3).unwrap();
        assert_ne!(a.image.data(), c.image.data());
    }

    #[test]
    fn spec_validation() {
        assert!(PhantomSpec { n_subjects: 10, ..PhantomSpec::default() }.validate().is_err());
        assert!(PhantomSpec { class_balance: 1.0, ..PhantomSpec::default() }.validate().is_err());
    }
}
