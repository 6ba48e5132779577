use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{Ellipsoid, TriMesh};
use crate::grid::{Geometry, Mask};
use crate::{Error, Result};

/// Foreground iff the voxel centre satisfies the ellipsoid's quadric.
pub fn voxelize_ellipsoid(e: &Ellipsoid, reference: &Geometry) -> Mask {
    let data = (0..reference.len()).map(|i| e.contains(reference.position(reference.coords(i)))).collect();
    Mask::new(*reference, data).expect("mask sized from geometry")
}

// Sub-voxel ray offsets (fractions of spacing) tried in turn; rays through
// exact grid coordinates would graze marching-cubes vertices.
const JITTER: [(f64, f64); 3] = [(1.37e-6, 2.71e-6), (-3.14e-6, 1.41e-6), (2.23e-6, -1.73e-6)];

fn row_crossings(mesh: &TriMesh, tris: &[u32], y: f64, z: f64, out: &mut Vec<f64>) {
    out.clear();
    for &t in tris {
        let [a, b, c] = mesh.triangle(t as usize);
        let e = |p: [f64; 3], q: [f64; 3]| (q[1] - p[1]) * (z - p[2]) - (q[2] - p[2]) * (y - p[1]);
        let w0 = e(b, c);
        let w1 = e(c, a);
        let w2 = e(a, b);
        let inside = (w0 > 0.0 && w1 > 0.0 && w2 > 0.0) || (w0 < 0.0 && w1 < 0.0 && w2 < 0.0);
        if !inside {
            continue;
        }
        let s = w0 + w1 + w2;
        out.push((w0 * a[0] + w1 * b[0] + w2 * c[0]) / s);
    }
    out.sort_by(f64::total_cmp);
}

/// Parity ray casting along +x for every (y, z) row of `reference`.
/// A row with an odd number of crossings means the surface is open.
pub fn voxelize_mesh(mesh: &TriMesh, reference: &Geometry) -> Result<Mask> {
    let [nx, ny, nz] = reference.dims;
    let [sx, sy, sz] = reference.spacing;
    let [ox, oy, oz] = reference.origin;
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); ny * nz];
    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangle(t);
        let (mut ylo, mut yhi, mut zlo, mut zhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in tri {
            ylo = ylo.min(p[1]);
            yhi = yhi.max(p[1]);
            zlo = zlo.min(p[2]);
            zhi = zhi.max(p[2]);
        }
        let margin = 1e-5;
        let j0 = ((ylo - oy) / sy - margin).ceil().max(0.0);
        let j1 = ((yhi - oy) / sy + margin).floor().min(ny as f64 - 1.0);
        let k0 = ((zlo - oz) / sz - margin).ceil().max(0.0);
        let k1 = ((zhi - oz) / sz + margin).floor().min(nz as f64 - 1.0);
        if j0 > j1 || k0 > k1 {
            continue;
        }
        for k in k0 as usize..=k1 as usize {
            for j in j0 as usize..=j1 as usize {
                rows[j + ny * k].push(t as u32);
            }
        }
    }
    let mut data = vec![false; reference.len()];
    let mut xs = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            let tris = &rows[j + ny * k];
            if tris.is_empty() {
                continue;
            }
            let mut ok = false;
            for (dy, dz) in JITTER {
                row_crossings(mesh, tris, oy + (j as f64 + dy) * sy, oz + (k as f64 + dz) * sz, &mut xs);
                if xs.len() % 2 == 0 {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::OpenSurface(format!("odd ray parity in row y={j} z={k}")));
            }
            let mut c = 0;
            for i in 0..nx {
                let x = ox + i as f64 * sx;
                while c < xs.len() && xs[c] < x {
                    c += 1;
                }
                data[reference.index(i, j, k)] = c % 2 == 1;
            }
        }
    }
    Mask::new(*reference, data)
}
