//! Triangle-mesh VOI perturbations: surface extraction, smoothing, normals,
//! Perlin-noise boundary randomisation, ellipsoid fitting and voxelisation.

mod ellipsoid;
mod marching;
mod perlin;
mod smooth;
mod voxelize;

pub use ellipsoid::{fit_ellipsoid, Ellipsoid, EllipsoidFitParams};
pub use marching::marching_cubes;
pub use perlin::{perlin_randomize, PerlinNoise, RandomizeParams};
pub use smooth::{smooth_mesh, vertex_normals, MeshSmoothing};
pub use voxelize::{voxelize_ellipsoid, voxelize_mesh};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{cross3, dot3, norm3, sub3, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    /// Vertex positions in mm.
    pub vertices: Vec<Vec3>,
    /// Outward-wound (counter-clockwise seen from outside) index triples.
    pub triangles: Vec<[u32; 3]>,
    /// Unit per-vertex normals once computed.
    pub normals: Option<Vec<Vec3>>,
    /// Vertices `[0, lattice_vertices)` lie on grid edges of the source mask;
    /// the rest are polygon centres added by triangulation.
    pub lattice_vertices: usize,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        let lattice_vertices = vertices.len();
        TriMesh { vertices, triangles, normals: None, lattice_vertices }
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                0.5 * norm3(cross3(sub3(b, a), sub3(c, a)))
            })
            .sum()
    }

    /// Enclosed volume from the divergence theorem (positive for outward winding).
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                dot3(a, cross3(b, c)) / 6.0
            })
            .sum()
    }

    pub fn centroid(&self) -> Vec3 {
        let n = self.vertices.len().max(1) as f64;
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for a in 0..3 {
                c[a] += v[a];
            }
        }
        [c[0] / n, c[1] / n, c[2] / n]
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    }

    /// Undirected edge -> number of incident triangles.
    fn edge_counts(&self) -> BTreeMap<(u32, u32), usize> {
        let mut counts = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Every edge is shared by exactly two triangles.
    pub fn is_closed(&self) -> bool {
        !self.triangles.is_empty() && self.edge_counts().values().all(|&c| c == 2)
    }

    /// Every directed edge occurs once, so neighbours traverse shared edges in
    /// opposite directions.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut seen = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                if seen.insert((t[k], t[(k + 1) % 3]), ()).is_some() {
                    return false;
                }
            }
        }
        true
    }

    /// V - E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = alloc::vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &v in t {
                used[v as usize] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edge_counts().len() as i64 + self.triangles.len() as i64
    }

    /// Unique vertex adjacency lists from triangle edges.
    pub fn neighbours(&self) -> Vec<Vec<u32>> {
        let mut nb: Vec<Vec<u32>> = alloc::vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                nb[a as usize].push(b);
                nb[b as usize].push(a);
            }
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        nb
    }

    /// Closed latitude/longitude mesh of an axis-aligned ellipsoid; handy as
    /// an analytic surface for tests and phantoms.
    pub fn uv_ellipsoid(center: Vec3, semi: Vec3, n_lat: usize, n_lon: usize) -> TriMesh {
        assert!(n_lat >= 2 && n_lon >= 3);
        let mut vertices = Vec::new();
        vertices.push([center[0], center[1], center[2] + semi[2]]);
        for i in 1..n_lat {
            let theta = core::f64::consts::PI * i as f64 / n_lat as f64;
            for j in 0..n_lon {
                let phi = 2.0 * core::f64::consts::PI * j as f64 / n_lon as f64;
                vertices.push([
                    center[0] + semi[0] * theta.sin() * phi.cos(),
                    center[1] + semi[1] * theta.sin() * phi.sin(),
                    center[2] + semi[2] * theta.cos(),
                ]);
            }
        }
        vertices.push([center[0], center[1], center[2] - semi[2]]);
        let south = (vertices.len() - 1) as u32;
        let ring = |i: usize, j: usize| (1 + (i - 1) * n_lon + j % n_lon) as u32;
        let mut triangles = Vec::new();
        for j in 0..n_lon {
            triangles.push([0, ring(1, j), ring(1, j + 1)]);
        }
        for i in 1..n_lat - 1 {
            for j in 0..n_lon {
                let (a, b) = (ring(i, j), ring(i, j + 1));
                let (c, d) = (ring(i + 1, j), ring(i + 1, j + 1));
                triangles.push([a, c, d]);
                triangles.push([a, d, b]);
            }
        }
        for j in 0..n_lon {
            triangles.push([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)]);
        }
        TriMesh::new(vertices, triangles)
    }
}
