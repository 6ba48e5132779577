//! Classic improved 3-D gradient noise with a seeded permutation table, and
//! the mesh randomisation built on it.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{smooth_mesh, vertex_normals, MeshSmoothing, TriMesh};
use crate::linalg::{norm3, sub3};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PerlinNoise {
    perm: [u8; 512],
}

impl PerlinNoise {
    pub fn new(seed: u64) -> Self {
        let mut p: Vec<u8> = (0..=255u8).collect();
        p.shuffle(&mut crate::rng::seeded(seed));
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = p[i & 255];
        }
        PerlinNoise { perm }
    }

    #[inline]
    fn fade(t: f64) -> f64 {
        t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
    }

    #[inline]
    fn lerp(t: f64, a: f64, b: f64) -> f64 {
        a + t * (b - a)
    }

    #[inline]
    fn grad(hash: u8, x: f64, y: f64, z: f64) -> f64 {
        let h = hash & 15;
        let u = if h < 8 { x } else { y };
        let v = if h < 4 {
            y
        } else if h == 12 || h == 14 {
            x
        } else {
            z
        };
        (if h & 1 == 0 { u } else { -u }) + (if h & 2 == 0 { v } else { -v })
    }

    /// Noise value clamped to `[-1, 1]`.
    pub fn noise(&self, x: f64, y: f64, z: f64) -> f64 {
        let (fx, fy, fz) = (x.floor(), y.floor(), z.floor());
        let xi = (fx as i64 & 255) as usize;
        let yi = (fy as i64 & 255) as usize;
        let zi = (fz as i64 & 255) as usize;
        let (x, y, z) = (x - fx, y - fy, z - fz);
        let (u, v, w) = (Self::fade(x), Self::fade(y), Self::fade(z));
        let p = &self.perm;
        let a = p[xi] as usize + yi;
        let aa = p[a] as usize + zi;
        let ab = p[a + 1] as usize + zi;
        let b = p[xi + 1] as usize + yi;
        let ba = p[b] as usize + zi;
        let bb = p[b + 1] as usize + zi;
        let value = Self::lerp(
            w,
            Self::lerp(
                v,
                Self::lerp(u, Self::grad(p[aa], x, y, z), Self::grad(p[ba], x - 1.0, y, z)),
                Self::lerp(u, Self::grad(p[ab], x, y - 1.0, z), Self::grad(p[bb], x - 1.0, y - 1.0, z)),
            ),
            Self::lerp(
                v,
                Self::lerp(u, Self::grad(p[aa + 1], x, y, z - 1.0), Self::grad(p[ba + 1], x - 1.0, y, z - 1.0)),
                Self::lerp(
                    u,
                    Self::grad(p[ab + 1], x, y - 1.0, z - 1.0),
                    Self::grad(p[bb + 1], x - 1.0, y - 1.0, z - 1.0),
                ),
            ),
        );
        value.clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizeParams {
    pub max_distance_mm: f64,
    pub seed: u64,
    /// Noise cycles across the normalised bounding box.
    pub noise_frequency: f64,
    /// Smoothing applied to the copy whose normals steer the displacement.
    pub smoothing: MeshSmoothing,
}

impl RandomizeParams {
    pub fn new(max_distance_mm: f64, seed: u64) -> Self {
        RandomizeParams { max_distance_mm, seed, noise_frequency: 4.0, smoothing: MeshSmoothing::default() }
    }
}

/// Moves each vertex along its (smoothed-copy) normal by
/// `noise(normalised position) * max_distance_mm`.
pub fn perlin_randomize(mesh: &TriMesh, params: &RandomizeParams) -> Result<TriMesh> {
    if !(params.max_distance_mm >= 0.0 && params.max_distance_mm.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "max distance must be >= 0, got {}",
            params.max_distance_mm
        )));
    }
    let smoothed = smooth_mesh(mesh, params.smoothing.iterations, params.smoothing.factor);
    let normals = vertex_normals(&smoothed)?.normals.expect("normals computed");
    let noise = PerlinNoise::new(params.seed);
    let (lo, hi) = mesh.bounding_box();
    let diag = norm3(sub3(hi, lo));
    let inv = if diag > 0.0 { 1.0 / diag } else { 0.0 };
    let mut out = mesh.clone();
    out.normals = None;
    for (v, n) in out.vertices.iter_mut().zip(&normals) {
        let q = [
            (v[0] - lo[0]) * inv * params.noise_frequency,
            (v[1] - lo[1]) * inv * params.noise_frequency,
            (v[2] - lo[2]) * inv * params.noise_frequency,
        ];
        let d = noise.noise(q[0], q[1], q[2]) * params.max_distance_mm;
        for a in 0..3 {
            v[a] += d * n[a];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> TriMesh {
        TriMesh::uv_ellipsoid([0.0; 3], [8.0, 8.0, 8.0], 24, 48)
    }

    #[test]
    fn noise_is_bounded_and_zero_on_lattice() {
        let n = PerlinNoise::new(3);
        for i in 0..2000 {
            let t = i as f64 * 0.0137;
            let v = n.noise(t * 3.1, t * 1.7 + 0.2, t * 0.9 - 5.0);
            assert!((-1.0..=1.0).contains(&v));
        }
        assert_eq!(n.noise(1.0, 2.0, 3.0), 0.0);
    }

    #[test]
    fn zero_distance_is_identity() {
        let m = sphere();
        let out = perlin_randomize(&m, &RandomizeParams::new(0.0, 7)).unwrap();
        assert_eq!(out.vertices, m.vertices);
    }

    #[test]
    fn deterministic_per_seed() {
        let m = sphere();
        let a = perlin_randomize(&m, &RandomizeParams::new(2.0, 11)).unwrap();
        let b = perlin_randomize(&m, &RandomizeParams::new(2.0, 11)).unwrap();
        let c = perlin_randomize(&m, &RandomizeParams::new(2.0, 12)).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert_ne!(a.vertices, c.vertices);
    }

    #[test]
    fn displacement_bounded_both_directions() {
        let m = sphere();
        let out = perlin_randomize(&m, &RandomizeParams::new(2.0, 5)).unwrap();
        let (mut inward, mut outward) = (0, 0);
        for (p, q) in m.vertices.iter().zip(&out.vertices) {
            let d = norm3(sub3(*q, *p));
            assert!(d <= 2.0 + 1e-12);
            let r0 = norm3(*p);
            let r1 = norm3(*q);
            if r1 > r0 + 1e-9 {
                outward += 1;
            } else if r1 < r0 - 1e-9 {
                inward += 1;
            }
        }
        assert!(inward > 0 && outward > 0);
    }
}
