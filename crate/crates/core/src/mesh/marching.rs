//! Marching cubes on a binary mask at isolevel 0.5.
//!
//! Each cube face is contoured independently (a sign change puts a vertex at
//! the grid-edge midpoint; on a face with two diagonal foreground corners the
//! foreground is joined). Both cubes sharing a face derive the same segments
//! with opposite direction, so the stitched polygons form a closed,
//! consistently oriented surface. Polygons with more than three vertices are
//! fanned around their centroid.

use alloc::vec;
use alloc::vec::Vec;

use super::TriMesh;
use crate::grid::Mask;
use crate::{Error, Result};

/// Corner order per face, counter-clockwise seen from outside the cube.
/// Corner `c` sits at offset `(c & 1, c >> 1 & 1, c >> 2 & 1)`.
const FACES: [[usize; 4]; 6] = [
    [0, 4, 6, 2], // -x
    [1, 3, 7, 5], // +x
    [0, 1, 5, 4], // -y
    [2, 6, 7, 3], // +y
    [0, 2, 3, 1], // -z
    [4, 5, 7, 6], // +z
];

const NONE: u32 = u32::MAX;

pub fn marching_cubes(mask: &Mask) -> Result<TriMesh> {
    let g = *mask.geometry();
    let data = mask.data();
    // foreground bounding box
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut any = false;
    for (idx, _) in data.iter().enumerate().filter(|(_, &b)| b) {
        any = true;
        let c = g.coords(idx);
        for a in 0..3 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    if !any {
        return Err(Error::EmptyMask);
    }
    // local lattice: bbox plus one background layer on every side
    let base = [lo[0] as isize - 1, lo[1] as isize - 1, lo[2] as isize - 1];
    let n = [hi[0] - lo[0] + 3, hi[1] - lo[1] + 3, hi[2] - lo[2] + 3];
    let value = |p: [usize; 3]| -> bool {
        g.checked_index(base[0] + p[0] as isize, base[1] + p[1] as isize, base[2] + p[2] as isize)
            .map(|i| data[i])
            .unwrap_or(false)
    };
    let point_id = |p: [usize; 3]| p[0] + n[0] * (p[1] + n[1] * p[2]);
    let mut edge_vertex = vec![NONE; 3 * n[0] * n[1] * n[2]];
    let mut vertices = Vec::new();
    let mut loops: Vec<Vec<u32>> = Vec::new();

    let mut corner_pos = [[0usize; 3]; 8];
    let mut corner_val = [false; 8];
    let mut next = [NONE; 12];
    let mut local_ids = [NONE; 12];
    for cz in 0..n[2] - 1 {
        for cy in 0..n[1] - 1 {
            for cx in 0..n[0] - 1 {
                let mut inside = 0;
                for c in 0..8 {
                    let p = [cx + (c & 1), cy + (c >> 1 & 1), cz + (c >> 2 & 1)];
                    corner_pos[c] = p;
                    corner_val[c] = value(p);
                    inside += corner_val[c] as usize;
                }
                if inside == 0 || inside == 8 {
                    continue;
                }
                // segment successor map over this cube's crossing vertices
                let mut used = 0usize;
                let mut vertex_of = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> u32 {
                    let (pa, pb) = (corner_pos[a], corner_pos[b]);
                    let (p, axis) = if pa <= pb { (pa, axis_of(pa, pb)) } else { (pb, axis_of(pb, pa)) };
                    let key = 3 * point_id(p) + axis;
                    if edge_vertex[key] == NONE {
                        let mut q = [0.0; 3];
                        for k in 0..3 {
                            let gi = base[k] as f64 + p[k] as f64 + if k == axis { 0.5 } else { 0.0 };
                            q[k] = g.origin[k] + gi * g.spacing[k];
                        }
                        edge_vertex[key] = vertices.len() as u32;
                        vertices.push(q);
                    }
                    edge_vertex[key]
                };
                let mut segments: [(u32, u32); 12] = [(NONE, NONE); 12];
                let mut n_seg = 0;
                for face in &FACES {
                    // transitions around the face in CCW order: (vertex, is_exit)
                    let mut trans: [(u32, bool); 4] = [(NONE, false); 4];
                    let mut nt = 0;
                    for k in 0..4 {
                        let (a, b) = (face[k], face[(k + 1) % 4]);
                        if corner_val[a] != corner_val[b] {
                            trans[nt] = (vertex_of(a, b, &mut vertices), corner_val[a]);
                            nt += 1;
                        }
                    }
                    // pair each exit with the next entry
                    for t in 0..nt {
                        if trans[t].1 {
                            let entry = trans[(t + 1) % nt];
                            debug_assert!(!entry.1);
                            segments[n_seg] = (trans[t].0, entry.0);
                            n_seg += 1;
                        }
                    }
                }
                // link segments into loops
                for s in &segments[..n_seg] {
                    let slot = match local_ids[..used].iter().position(|&v| v == s.0) {
                        Some(i) => i,
                        None => {
                            local_ids[used] = s.0;
                            used += 1;
                            used - 1
                        }
                    };
                    debug_assert_eq!(next[slot], NONE);
                    next[slot] = s.1;
                }
                let mut visited = [false; 12];
                for start in 0..used {
                    if visited[start] {
                        continue;
                    }
                    let mut poly = Vec::new();
                    let mut cur = start;
                    while !visited[cur] {
                        visited[cur] = true;
                        poly.push(local_ids[cur]);
                        let to = next[cur];
                        cur = local_ids[..used].iter().position(|&v| v == to).expect("open contour");
                    }
                    loops.push(poly);
                }
                for k in 0..used {
                    next[k] = NONE;
                    local_ids[k] = NONE;
                }
            }
        }
    }

    // Face contours run clockwise seen from outside; emit reversed polygons.
    let lattice_vertices = vertices.len();
    let mut triangles = Vec::new();
    for poly in &loops {
        if poly.len() == 3 {
            triangles.push([poly[0], poly[2], poly[1]]);
            continue;
        }
        let mut c = [0.0; 3];
        for &v in poly {
            for k in 0..3 {
                c[k] += vertices[v as usize][k];
            }
        }
        let inv = 1.0 / poly.len() as f64;
        let centre = vertices.len() as u32;
        vertices.push([c[0] * inv, c[1] * inv, c[2] * inv]);
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            triangles.push([centre, b, a]);
        }
    }
    Ok(TriMesh { vertices, triangles, normals: None, lattice_vertices })
}

fn axis_of(a: [usize; 3], b: [usize; 3]) -> usize {
    (0..3).find(|&k| a[k] != b[k]).expect("distinct corners")
}
