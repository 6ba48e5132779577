use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::linalg::{add3, cross3, dot3, norm3, normalize3, scale3, sub3, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: Vec3,
    /// Orthonormal directions matching `semi_lengths`.
    pub axes: [Vec3; 3],
    /// Descending: `semi_lengths[0]` is the major semi-axis.
    pub semi_lengths: [f64; 3],
}

impl Ellipsoid {
    /// Point in the local frame, scaled so the surface is the unit sphere.
    pub fn normalized(&self, p: Vec3) -> Vec3 {
        let d = sub3(p, self.center);
        [
            dot3(d, self.axes[0]) / self.semi_lengths[0],
            dot3(d, self.axes[1]) / self.semi_lengths[1],
            dot3(d, self.axes[2]) / self.semi_lengths[2],
        ]
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let q = self.normalized(p);
        dot3(q, q) <= 1.0
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * core::f64::consts::PI * self.semi_lengths.iter().product::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidFitParams {
    /// Farthest-pair search is exact up to this many vertices.
    pub max_pair_vertices: usize,
    pub seed: u64,
    pub angle_steps: usize,
}

impl Default for EllipsoidFitParams {
    fn default() -> Self {
        EllipsoidFitParams { max_pair_vertices: 20_000, seed: 0, angle_steps: 180 }
    }
}

fn farthest_pair(points: &[Vec3], candidates: &[usize]) -> (usize, usize, f64) {
    let mut best = (candidates[0], candidates[0], -1.0);
    for (k, &i) in candidates.iter().enumerate() {
        for &j in &candidates[k + 1..] {
            let d = sub3(points[i], points[j]);
            let d2 = dot3(d, d);
            if d2 > best.2 {
                best = (i, j, d2);
            }
        }
    }
    best
}

fn sse(rel: &[Vec3], frame: &[Vec3; 3], semi: [f64; 3]) -> f64 {
    let mut s = 0.0;
    for p in rel {
        let r = norm3(*p);
        if r == 0.0 {
            continue;
        }
        let q: f64 = (0..3).map(|k| (dot3(*p, frame[k]) / semi[k]).powi(2)).sum();
        let re = r / q.sqrt();
        s += (r - re).powi(2);
    }
    s
}

/// Major axis from the farthest vertex pair, then the perpendicular frame is
/// swept about it; each angle gets max-projection semi-lengths and the angle
/// with the least squared radial misfit wins.
pub fn fit_ellipsoid(mesh: &TriMesh, params: &EllipsoidFitParams) -> Result<Ellipsoid> {
    let pts = &mesh.vertices;
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!("{} vertices", pts.len())));
    }
    let candidates: Vec<usize> = if pts.len() <= params.max_pair_vertices {
        (0..pts.len()).collect()
    } else {
        let mut rng = crate::rng::seeded(params.seed);
        let mut idx = rand::seq::index::sample(&mut rng, pts.len(), params.max_pair_vertices).into_vec();
        idx.sort_unstable();
        idx
    };
    let (i, j, d2) = farthest_pair(pts, &candidates);
    if d2 <= 0.0 {
        return Err(Error::Degenerate("all vertices coincide".into()));
    }
    let a = d2.sqrt() / 2.0;
    let center = scale3(add3(pts[i], pts[j]), 0.5);
    let e1 = normalize3(sub3(pts[j], pts[i])).expect("non-zero pair distance");
    let rel: Vec<Vec3> = pts.iter().map(|p| sub3(*p, center)).collect();

    let mut far = (0usize, 0.0f64);
    for (k, p) in rel.iter().enumerate() {
        let perp = sub3(*p, scale3(e1, dot3(*p, e1)));
        let d = dot3(perp, perp);
        if d > far.1 {
            far = (k, d);
        }
    }
    let tol = 1e-12 * a * a;
    if far.1 <= tol {
        return Err(Error::Degenerate("collinear vertices".into()));
    }
    let p = rel[far.0];
    let u0 = normalize3(sub3(p, scale3(e1, dot3(p, e1)))).expect("off-axis vertex");
    let v0 = cross3(e1, u0);

    let mut best: Option<(f64, [Vec3; 3], [f64; 3])> = None;
    let steps = params.angle_steps.max(1);
    for s in 0..steps {
        let t = core::f64::consts::PI * s as f64 / steps as f64;
        let (sn, cs) = t.sin_cos();
        let u = add3(scale3(u0, cs), scale3(v0, sn));
        let v = add3(scale3(u0, -sn), scale3(v0, cs));
        let mut b: f64 = 0.0;
        let mut c: f64 = 0.0;
        for p in &rel {
            b = b.max(dot3(*p, u).abs());
            c = c.max(dot3(*p, v).abs());
        }
        if b <= 0.0 || c <= 0.0 {
            continue;
        }
        let frame = [e1, u, v];
        let semi = [a, b, c];
        let score = sse(&rel, &frame, semi);
        if best.as_ref().is_none_or(|(s0, _, _)| score < *s0) {
            best = Some((score, frame, semi));
        }
    }
    let (_, frame, semi) = best.ok_or_else(|| Error::Degenerate("planar vertex set".into()))?;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| semi[y].total_cmp(&semi[x]));
    Ok(Ellipsoid {
        center,
        axes: [frame[order[0]], frame[order[1]], frame[order[2]]],
        semi_lengths: [semi[order[0]], semi[order[1]], semi[order[2]]],
    })
}
