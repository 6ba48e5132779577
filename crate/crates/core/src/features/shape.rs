use alloc::collections::BTreeMap;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::Mask;
use crate::linalg::{symmetric_eigen, Vec3};
use crate::mesh::marching_cubes;
use crate::Result;

pub const SHAPE_NAMES: [&str; 14] = [
    "shape_Elongation",
    "shape_Flatness",
    "shape_LeastAxisLength",
    "shape_MajorAxisLength",
    "shape_Maximum2DDiameterColumn",
    "shape_Maximum2DDiameterRow",
    "shape_Maximum2DDiameterSlice",
    "shape_Maximum3DDiameter",
    "shape_MeshVolume",
    "shape_MinorAxisLength",
    "shape_Sphericity",
    "shape_SurfaceArea",
    "shape_SurfaceVolumeRatio",
    "shape_VoxelVolume",
];

fn max_dist2(points: &[Vec3]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            best = best.max(d);
        }
    }
    best
}

/// Largest in-plane distance among points sharing coordinate `axis`.
fn max_planar(points: &[Vec3], axis: usize) -> f64 {
    let mut groups: BTreeMap<u64, Vec<Vec3>> = BTreeMap::new();
    for p in points {
        groups.entry(p[axis].to_bits()).or_default().push(*p);
    }
    groups.values().map(|g| max_dist2(g)).fold(0.0, f64::max).sqrt()
}

/// The 14 shape features in `SHAPE_NAMES` order; depends only on the mask.
pub fn extract_shape(mask: &Mask) -> Result<[f64; 14]> {
    let mesh = marching_cubes(mask)?;
    let g = mask.geometry();
    let n = mask.count();
    let voxel_volume = n as f64 * g.voxel_volume();
    let mesh_volume = mesh.signed_volume();
    let area = mesh.surface_area();
    let sphericity = (36.0 * core::f64::consts::PI * mesh_volume * mesh_volume).cbrt() / area;
    let lattice = &mesh.vertices[..mesh.lattice_vertices];
    let d3 = max_dist2(lattice).sqrt();
    let d_slice = max_planar(lattice, 2);
    let d_column = max_planar(lattice, 1);
    let d_row = max_planar(lattice, 0);

    let mut mean = [0.0; 3];
    let mut pts = Vec::with_capacity(n);
    for (i, &m) in mask.data().iter().enumerate() {
        if m {
            let p = g.position(g.coords(i));
            for a in 0..3 {
                mean[a] += p[a];
            }
            pts.push(p);
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = [0.0; 9];
    for p in &pts {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for r in 0..3 {
            for c in 0..3 {
                cov[r * 3 + c] += d[r] * d[c];
            }
        }
    }
    for v in &mut cov {
        *v /= n as f64;
    }
    let floor = (g.min_spacing() / 2.0).powi(2);
    let eig = symmetric_eigen(&cov, 3);
    let lam: Vec<f64> = eig.values.iter().map(|&l| l.max(floor)).collect();
    let (least, minor, major) = (lam[0], lam[1], lam[2]);

    Ok([
        (minor / major).sqrt(),
        (least / major).sqrt(),
        4.0 * least.sqrt(),
        4.0 * major.sqrt(),
        d_column,
        d_row,
        d_slice,
        d3,
        mesh_volume,
        4.0 * minor.sqrt(),
        sphericity,
        area,
        area / mesh_volume,
        voxel_volume,
    ])
}
