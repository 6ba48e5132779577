use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::linalg::{cross3, normalize3, sub3};
use crate::{Error, Result};

/// Laplacian smoothing settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSmoothing {
    pub iterations: usize,
    pub factor: f64,
}

impl Default for MeshSmoothing {
    fn default() -> Self {
        MeshSmoothing { iterations: 10, factor: 0.5 }
    }
}

/// Moves every vertex `factor` of the way to its neighbours' centroid,
/// `iterations` times (simultaneous updates). Topology is untouched.
pub fn smooth_mesh(mesh: &TriMesh, iterations: usize, factor: f64) -> TriMesh {
    let mut out = mesh.clone();
    out.normals = None;
    if iterations == 0 {
        return out;
    }
    let nb = mesh.neighbours();
    let mut next = out.vertices.clone();
    for _ in 0..iterations {
        for (i, list) in nb.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let mut c = [0.0; 3];
            for &j in list {
                let p = out.vertices[j as usize];
                c[0] += p[0];
                c[1] += p[1];
                c[2] += p[2];
            }
            let inv = 1.0 / list.len() as f64;
            let v = out.vertices[i];
            for a in 0..3 {
                next[i][a] = v[a] + factor * (c[a] * inv - v[a]);
            }
        }
        core::mem::swap(&mut out.vertices, &mut next);
    }
    out
}

/// Area-weighted vertex normals from outward-wound triangles. Degenerate
/// triangles contribute nothing; a vertex with no usable triangle is an error.
pub fn vertex_normals(mesh: &TriMesh) -> Result<TriMesh> {
    let mut acc = vec![[0.0f64; 3]; mesh.vertices.len()];
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        // |cross| is twice the area, so the raw cross product is area weighted
        let n = cross3(sub3(b, a), sub3(c, a));
        if n == [0.0; 3] {
            continue;
        }
        for &v in &mesh.triangles[t] {
            let s = &mut acc[v as usize];
            s[0] += n[0];
            s[1] += n[1];
            s[2] += n[2];
        }
    }
    let normals = acc
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            normalize3(n).ok_or_else(|| Error::Degenerate(format!("vertex {i} has no non-degenerate triangle")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = mesh.clone();
    out.normals = Some(normals);
    Ok(out)
}
