//! Wavefront-style triangle mesh text format.
//!
//! Recognized lines are `v x y z` and `f a b c`, with 1-based (or negative,
//! relative) vertex indices; `a/t/n` index groups are accepted and only the
//! vertex index is used. Faces must already be triangles. Comments (`#`),
//! blank lines and other statements (`vn`, `vt`, `o`, `g`, `s`, `usemtl`,
//! `mtllib`) are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

/// Reads a mesh and multiplies every coordinate by `scale` (use 0.001 for millimeter files).
pub fn load_mesh(path: impl AsRef<Path>, scale: f64) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path, scale)
}

pub fn parse_obj(text: &str, path: &Path, scale: f64) -> Result<TriangleMesh> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!("mesh scale must be positive, got {scale}")));
    }
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::parse(path, lineno, format!("bad vertex: {e}")))?;
                if coords.len() != 3 || coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::parse(path, lineno, "vertex needs 3 finite coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]) * scale);
            }
            Some("f") => {
                let idx: Vec<&str> = tokens.collect();
                if idx.len() != 3 {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("face has {} vertices; only triangles are accepted", idx.len()),
                    ));
                }
                let mut face = [0u32; 3];
                for (slot, tok) in face.iter_mut().zip(&idx) {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| Error::parse(path, lineno, format!("bad face index `{tok}`")))?;
                    let n = vertices.len() as i64;
                    let resolved = match i {
                        i if i > 0 => i - 1,
                        i if i < 0 => n + i,
                        _ => return Err(Error::parse(path, lineno, "face index 0 is invalid")),
                    };
                    if resolved < 0 || resolved >= n {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("face index {i} out of range ({n} vertices defined)"),
                        ));
                    }
                    *slot = resolved as u32;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Serializes with shortest round-trip float formatting.
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn save_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_obj(mesh)).map_err(|e| Error::io(path, e))
}
