use std::fmt::Write;
use std::path::Path;

use voiforge_core::linalg::{cross3, normalize3, sub3};
use voiforge_core::mesh::TriMesh;

use crate::error::{Result, VfError};

/// ASCII STL, for inspecting perturbed surfaces.
pub fn write_stl(mesh: &TriMesh, name: &str, path: &Path) -> Result<()> {
    let mut s = format!("solid {name}\n");
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        let n = normalize3(cross3(sub3(b, a), sub3(c, a))).unwrap_or([0.0; 3]);
        let _ = writeln!(s, "facet normal {} {} {}\n outer loop", n[0], n[1], n[2]);
        for v in [a, b, c] {
            let _ = writeln!(s, "  vertex {} {} {}", v[0], v[1], v[2]);
        }
        s.push_str(" endloop\nendfacet\n");
    }
    let _ = writeln!(s, "endsolid {name}");
    std::fs::write(path, s).map_err(|e| VfError::io(path, e))
}
