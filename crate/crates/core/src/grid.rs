//! Volume and mask data model: geometry, resampling, z-score normalisation and
//! largest connected component selection.
//!
//! Voxels are stored x-fastest (`index = x + nx * (y + ny * z)`), voxel `i`
//! along an axis is centred at `origin + i * spacing`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl Geometry {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Geometry(format!("dimensions must be positive, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Geometry(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Geometry(format!("origin must be finite, got {origin:?}")));
        }
        Ok(Geometry { dims, spacing, origin })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    /// Index of a signed coordinate, or `None` when it falls outside the grid.
    #[inline]
    pub fn checked_index(&self, x: isize, y: isize, z: isize) -> Option<usize> {
        if x < 0 || y < 0 || z < 0 {
            return None;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return None;
        }
        Some(self.index(x, y, z))
    }

    /// Physical position (mm) of a voxel centre.
    #[inline]
    pub fn position(&self, c: [usize; 3]) -> [f64; 3] {
        [
            self.origin[0] + c[0] as f64 * self.spacing[0],
            self.origin[1] + c[1] as f64 * self.spacing[1],
            self.origin[2] + c[2] as f64 * self.spacing[2],
        ]
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_isotropic(&self) -> bool {
        let s0 = self.spacing[0];
        self.spacing.iter().all(|s| ((s - s0) / s0).abs() <= 1e-6)
    }

    /// The isotropic spacing, or an error naming the offending spacing.
    pub fn isotropic_spacing(&self) -> Result<f64> {
        if self.is_isotropic() {
            Ok(self.spacing[0])
        } else {
            Err(Error::Anisotropic(self.spacing[0], self.spacing[1], self.spacing[2]))
        }
    }

    fn check_same(&self, other: &Geometry) -> Result<()> {
        if self != other {
            return Err(Error::Geometry(format!(
                "image/mask geometry differs: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageVolume {
    geometry: Geometry,
    data: Vec<f64>,
}

impl ImageVolume {
    pub fn new(geometry: Geometry, data: Vec<f64>) -> Result<Self> {
        if data.len() != geometry.len() {
            return Err(Error::Geometry(format!(
                "data length {} does not match dims {:?}",
                data.len(),
                geometry.dims
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ImageVolume { geometry, data })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    geometry: Geometry,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(geometry: Geometry, data: Vec<bool>) -> Result<Self> {
        if data.len() != geometry.len() {
            return Err(Error::Geometry(format!(
                "data length {} does not match dims {:?}",
                data.len(),
                geometry.dims
            )));
        }
        Ok(Mask { geometry, data })
    }

    pub fn empty(geometry: Geometry) -> Self {
        Mask { data: vec![false; geometry.len()], geometry }
    }

    /// Mask from 0/1 values; anything else is rejected.
    pub fn from_values(geometry: Geometry, values: &[f64]) -> Result<Self> {
        let mut data = Vec::with_capacity(values.len());
        for &v in values {
            if v == 0.0 {
                data.push(false);
            } else if v == 1.0 {
                data.push(true);
            } else {
                return Err(Error::InvalidParameter(format!("non-binary mask value {v}")));
            }
        }
        Mask::new(geometry, data)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.data[self.geometry.index(x, y, z)]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn complement(&self) -> Mask {
        Mask { geometry: self.geometry, data: self.data.iter().map(|b| !b).collect() }
    }

    /// Dice overlap; two empty masks count as identical.
    pub fn dice(&self, other: &Mask) -> f64 {
        let inter = self.data.iter().zip(&other.data).filter(|(&a, &b)| a && b).count();
        let total = self.count() + other.count();
        if total == 0 {
            1.0
        } else {
            2.0 * inter as f64 / total as f64
        }
    }

    /// Checks that the mask can be used with an image of geometry `g`.
    pub fn check_geometry(&self, g: &Geometry) -> Result<()> {
        self.geometry.check_same(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    Linear,
}

/// Output geometry of an isotropic resampling: extents preserved to within
/// one target voxel, first voxel centred half a target voxel inside the
/// original grid's outer corner.
pub fn isotropic_geometry(g: &Geometry, target: f64) -> Result<Geometry> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter(format!("target spacing must be positive, got {target}")));
    }
    let mut dims = [0usize; 3];
    let mut origin = [0.0; 3];
    for a in 0..3 {
        let extent = g.dims[a] as f64 * g.spacing[a];
        dims[a] = ((extent / target).round() as usize).max(1);
        origin[a] = g.origin[a] - 0.5 * g.spacing[a] + 0.5 * target;
    }
    Geometry::new(dims, [target; 3], origin)
}

/// Continuous source index for output index `i` (index domain, exact when the
/// spacings agree).
#[inline]
fn source_coordinate(i: usize, out_spacing: f64, in_spacing: f64) -> f64 {
    ((i as f64 + 0.5) * out_spacing) / in_spacing - 0.5
}

fn resample_values(
    src: &Geometry,
    dst: &Geometry,
    mode: Interpolation,
    sample: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(dst.len());
    let axis_map = |a: usize, i: usize| source_coordinate(i, dst.spacing[a], src.spacing[a]);
    for z in 0..dst.dims[2] {
        let uz = axis_map(2, z);
        for y in 0..dst.dims[1] {
            let uy = axis_map(1, y);
            for x in 0..dst.dims[0] {
                let ux = axis_map(0, x);
                let v = match mode {
                    Interpolation::Nearest => {
                        let c = [ux, uy, uz];
                        let mut idx = [0usize; 3];
                        for a in 0..3 {
                            let k = (c[a] + 0.5).floor();
                            idx[a] = (k.max(0.0) as usize).min(src.dims[a] - 1);
                        }
                        sample(src.index(idx[0], idx[1], idx[2]))
                    }
                    Interpolation::Linear => {
                        let c = [ux, uy, uz];
                        let mut lo = [0usize; 3];
                        let mut hi = [0usize; 3];
                        let mut w = [0.0; 3];
                        for a in 0..3 {
                            let max = (src.dims[a] - 1) as f64;
                            let u = c[a].clamp(0.0, max);
                            let f = u.floor();
                            lo[a] = f as usize;
                            hi[a] = (lo[a] + 1).min(src.dims[a] - 1);
                            w[a] = u - f;
                        }
                        let mut acc = 0.0;
                        for corner in 0..8 {
                            let mut weight = 1.0;
                            let mut idx = [0usize; 3];
                            for a in 0..3 {
                                if corner >> a & 1 == 1 {
                                    weight *= w[a];
                                    idx[a] = hi[a];
                                } else {
                                    weight *= 1.0 - w[a];
                                    idx[a] = lo[a];
                                }
                            }
                            if weight != 0.0 {
                                acc += weight * sample(src.index(idx[0], idx[1], idx[2]));
                            }
                        }
                        acc
                    }
                };
                out.push(v);
            }
        }
    }
    out
}

/// Resamples an image to isotropic `target` spacing.
pub fn resample_image_isotropic(
    img: &ImageVolume,
    target: f64,
    mode: Interpolation,
) -> Result<ImageVolume> {
    let dst = isotropic_geometry(&img.geometry, target)?;
    if img.geometry.spacing == [target; 3] {
        return Ok(img.clone());
    }
    let data = resample_values(&img.geometry, &dst, mode, |i| img.data[i]);
    ImageVolume::new(dst, data)
}

/// Resamples a mask to isotropic `target` spacing with nearest neighbour.
pub fn resample_mask_isotropic(mask: &Mask, target: f64) -> Result<Mask> {
    let dst = isotropic_geometry(&mask.geometry, target)?;
    if mask.geometry.spacing == [target; 3] {
        return Ok(mask.clone());
    }
    let data = resample_values(&mask.geometry, &dst, Interpolation::Nearest, |i| {
        if mask.data[i] {
            1.0
        } else {
            0.0
        }
    });
    Ok(Mask { geometry: dst, data: data.into_iter().map(|v| v == 1.0).collect() })
}

/// Nearest-neighbour mapping of `mask` onto `reference` (physical space).
/// Reference voxels whose centre falls outside the mask grid are background.
pub fn resample_to_grid(mask: &Mask, reference: &Geometry) -> Mask {
    if mask.geometry == *reference {
        return mask.clone();
    }
    let src = &mask.geometry;
    let mut data = Vec::with_capacity(reference.len());
    for z in 0..reference.dims[2] {
        for y in 0..reference.dims[1] {
            for x in 0..reference.dims[0] {
                let p = reference.position([x, y, z]);
                let mut idx = [0isize; 3];
                for a in 0..3 {
                    let u = (p[a] - src.origin[a]) / src.spacing[a];
                    idx[a] = (u + 0.5).floor() as isize;
                }
                let v = src
                    .checked_index(idx[0], idx[1], idx[2])
                    .map(|i| mask.data[i])
                    .unwrap_or(false);
                data.push(v);
            }
        }
    }
    Mask { geometry: *reference, data }
}

/// Whole-volume z-score normalisation (population statistics).
pub fn zscore_normalize(img: &ImageVolume) -> Result<ImageVolume> {
    let n = img.data.len() as f64;
    let mean = img.data.iter().sum::<f64>() / n;
    let var = img.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd > 0.0) || sd <= mean.abs() * 1e-14 {
        return Err(Error::ZeroVariance);
    }
    let mut data: Vec<f64> = img.data.iter().map(|v| (v - mean) / sd).collect();
    // second pass removes the residual mean left by rounding in the first
    let m2 = data.iter().sum::<f64>() / n;
    let s2 = (data.iter().map(|v| (v - m2) * (v - m2)).sum::<f64>() / n).sqrt();
    for v in &mut data {
        *v = (*v - m2) / s2;
    }
    ImageVolume::new(img.geometry, data)
}

/// 26-connected component labels (0 = background, components numbered in
/// order of their smallest linear voxel index) and their sizes.
pub fn label_components(mask: &Mask) -> (Vec<u32>, Vec<usize>) {
    let g = &mask.geometry;
    let mut labels = vec![0u32; g.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..g.len() {
        if !mask.data[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        labels[start] = label;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let [x, y, z] = g.coords(idx);
            for dz in -1isize..=1 {
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        if dx == 0 && dy == 0 && dz == 0 {
                            continue;
                        }
                        if let Some(n) =
                            g.checked_index(x as isize + dx, y as isize + dy, z as isize + dz)
                        {
                            if mask.data[n] && labels[n] == 0 {
                                labels[n] = label;
                                queue.push_back(n);
                            }
                        }
                    }
                }
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// Keeps the largest 26-connected component; ties go to the component holding
/// the smallest linear voxel index.
pub fn largest_component(mask: &Mask) -> Result<Mask> {
    let (labels, sizes) = label_components(mask);
    if sizes.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut best = 0usize;
    for (i, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = i;
        }
    }
    let keep = best as u32 + 1;
    Ok(Mask { geometry: mask.geometry, data: labels.iter().map(|&l| l == keep).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(d: [usize; 3], s: [f64; 3]) -> Geometry {
        Geometry::new(d, s, [0.0; 3]).unwrap()
    }

    #[test]
    fn geometry_rejects_bad_values() {
        assert!(Geometry::new([0, 1, 1], [1.0; 3], [0.0; 3]).is_err());
        assert!(Geometry::new([1, 1, 1], [1.0, 0.0, 1.0], [0.0; 3]).is_err());
        assert!(Geometry::new([1, 1, 1], [1.0, -1.0, 1.0], [0.0; 3]).is_err());
    }

    #[test]
    fn nearest_upsampling_of_full_mask() {
        let m = Mask::new(geom([2, 2, 2], [2.0; 3]), vec![true; 8]).unwrap();
        let r = resample_mask_isotropic(&m, 1.0).unwrap();
        assert_eq!(r.geometry().dims, [4, 4, 4]);
        assert_eq!(r.geometry().spacing, [1.0; 3]);
        assert_eq!(r.count(), 64);
    }

    /// Brute force: a target voxel takes the value of the source voxel whose
    /// physical box contains the target centre.
    fn nearest_oracle(m: &Mask, target: f64) -> Vec<bool> {
        let g = m.geometry();
        let d = isotropic_geometry(g, target).unwrap();
        let mut out = vec![];
        for z in 0..d.dims[2] {
            for y in 0..d.dims[1] {
                for x in 0..d.dims[0] {
                    let p = d.position([x, y, z]);
                    let mut hit = None;
                    for idx in 0..g.len() {
                        let c = g.position(g.coords(idx));
                        let inside = (0..3).all(|a| {
                            p[a] >= c[a] - g.spacing[a] / 2.0 && p[a] < c[a] + g.spacing[a] / 2.0
                        });
                        if inside {
                            hit = Some(m.data()[idx]);
                        }
                    }
                    out.push(hit.unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn single_voxel_doubles_along_z() {
        let g = geom([3, 3, 3], [1.0, 1.0, 2.0]);
        let mut data = vec![false; 27];
        data[g.index(1, 1, 1)] = true;
        let m = Mask::new(g, data).unwrap();
        let r = resample_mask_isotropic(&m, 1.0).unwrap();
        assert_eq!(r.geometry().dims, [3, 3, 6]);
        assert_eq!(r.count(), 2);
        assert_eq!(r.data(), nearest_oracle(&m, 1.0).as_slice());
    }

    #[test]
    fn identity_resampling() {
        let g = geom([3, 2, 2], [1.5; 3]);
        let img = ImageVolume::new(g, (0..12).map(|v| v as f64 * 0.37).collect()).unwrap();
        for mode in [Interpolation::Nearest, Interpolation::Linear] {
            let r = resample_image_isotropic(&img, 1.5, mode).unwrap();
            assert_eq!(r, img);
        }
        let m = Mask::new(g, (0..12).map(|v| v % 3 == 0).collect()).unwrap();
        assert_eq!(resample_to_grid(&m, m.geometry()), m);
    }

    #[test]
    fn resample_rejects_non_positive_spacing() {
        let m = Mask::empty(geom([2, 2, 2], [1.0; 3]));
        assert!(resample_mask_isotropic(&m, 0.0).is_err());
        assert!(resample_mask_isotropic(&m, -1.0).is_err());
    }

    #[test]
    fn linear_interpolation_midpoint() {
        let g = geom([2, 1, 1], [2.0, 1.0, 1.0]);
        let img = ImageVolume::new(g, vec![0.0, 4.0]).unwrap();
        let r = resample_image_isotropic(&img, 1.0, Interpolation::Linear).unwrap();
        // source coordinates -0.25, 0.25, 0.75, 1.25 clamp to [0, 1]
        assert_eq!(r.data(), &[0.0, 1.0, 3.0, 4.0]);
    }

    fn sphere(g: Geometry, c: [f64; 3], r: f64) -> Mask {
        let data = (0..g.len())
            .map(|i| {
                let p = g.position(g.coords(i));
                (0..3).map(|a| (p[a] - c[a]).powi(2)).sum::<f64>() <= r * r
            })
            .collect();
        Mask::new(g, data).unwrap()
    }

    #[test]
    fn sphere_round_trip_through_finer_grid() {
        let g = Geometry::new([20, 20, 14], [1.0, 1.0, 1.5], [3.0, -2.0, 1.0]).unwrap();
        let m = sphere(g, [12.5, 7.5, 11.0], 6.0);
        let iso = resample_mask_isotropic(&m, 0.5).unwrap();
        let back = resample_to_grid(&iso, m.geometry());
        assert!(back.dice(&m) >= 0.95, "dice {}", back.dice(&m));
        let empty = Mask::empty(g);
        let iso = resample_mask_isotropic(&empty, 0.5).unwrap();
        assert_eq!(resample_to_grid(&iso, &g).count(), 0);
    }

    #[test]
    fn zscore_two_point() {
        let img = ImageVolume::new(geom([2, 1, 1], [1.0; 3]), vec![0.0, 2.0]).unwrap();
        assert_eq!(zscore_normalize(&img).unwrap().data(), &[-1.0, 1.0]);
        let c = ImageVolume::new(geom([2, 1, 1], [1.0; 3]), vec![3.0, 3.0]).unwrap();
        assert_eq!(zscore_normalize(&c), Err(Error::ZeroVariance));
    }

    #[test]
    fn largest_component_cases() {
        let g = geom([12, 3, 3], [1.0; 3]);
        let mut data = vec![false; g.len()];
        // 3-voxel blob first in linear order, 10-voxel blob later
        for x in 0..3 {
            data[g.index(x, 0, 0)] = true;
        }
        for x in 5..10 {
            data[g.index(x, 1, 1)] = true;
            data[g.index(x, 2, 2)] = true; // diagonal contact: 26-connected
        }
        let m = Mask::new(g, data).unwrap();
        let l = largest_component(&m).unwrap();
        assert_eq!(l.count(), 10);
        assert!(!l.get(0, 0, 0));
        assert!(l.is_subset_of(&m));

        // tie: first component in linear order wins
        let mut data = vec![false; g.len()];
        data[g.index(0, 0, 0)] = true;
        data[g.index(5, 0, 0)] = true;
        let tie = Mask::new(g, data).unwrap();
        let l = largest_component(&tie).unwrap();
        assert!(l.get(0, 0, 0));
        assert_eq!(l.count(), 1);

        assert_eq!(largest_component(&Mask::empty(g)), Err(Error::EmptyMask));
    }

    proptest! {
        #[test]
        fn zscore_moments(values in proptest::collection::vec(-1e3f64..1e3, 27)) {
            let img = ImageVolume::new(geom([3, 3, 3], [1.0; 3]), values).unwrap();
            if let Ok(z) = zscore_normalize(&img) {
                let m = z.data().iter().sum::<f64>() / 27.0;
                let s = (z.data().iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 27.0).sqrt();
                prop_assert!(m.abs() < 1e-9);
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn zscore_affine_invariance(values in proptest::collection::vec(-100f64..100.0, 8),
                                    a in 0.1f64..10.0, b in -50f64..50.0) {
            let g = geom([2, 2, 2], [1.0; 3]);
            let img = ImageVolume::new(g, values.clone()).unwrap();
            let t = ImageVolume::new(g, values.iter().map(|v| a * v + b).collect()).unwrap();
            if let (Ok(z1), Ok(z2)) = (zscore_normalize(&img), zscore_normalize(&t)) {
                for (p, q) in z1.data().iter().zip(z2.data()) {
                    prop_assert!((p - q).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn largest_component_idempotent(bits in proptest::collection::vec(any::<bool>(), 64)) {
            let m = Mask::new(geom([4, 4, 4], [1.0; 3]), bits).unwrap();
            if m.count() > 0 {
                let once = largest_component(&m).unwrap();
                prop_assert!(once.is_subset_of(&m));
                prop_assert_eq!(largest_component(&once).unwrap(), once.clone());
                let (_, sizes) = label_components(&m);
                prop_assert_eq!(once.count(), *sizes.iter().max().unwrap());
            }
        }

        #[test]
        fn nearest_resampling_matches_oracle(bits in proptest::collection::vec(any::<bool>(), 18),
                                             sz in prop::sample::select(vec![1.0f64, 1.5, 2.0, 2.5, 3.0])) {
            let g = geom([3, 3, 2], [1.0, 1.0, sz]);
            let m = Mask::new(g, bits).unwrap();
            let r = resample_mask_isotropic(&m, 1.0).unwrap();
            let want = nearest_oracle(&m, 1.0);
            prop_assert_eq!(r.data(), want.as_slice());
        }
    }
}
