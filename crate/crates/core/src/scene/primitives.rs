//! Watertight primitive solids standing in for scanned object models.
//!
//! Every primitive is centered on its bounding-box center, except the bumpy
//! plate, whose flat bottom sits at `z = -thickness / 2`. Faces meeting at a
//! sharp crease use separate vertex copies so that vertex normals stay
//! face-aligned; watertightness is judged on welded positions.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{TriangleMesh, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Primitive {
    /// Axis-aligned box: 24 vertices (4 per face), 12 triangles.
    Cuboid { x: f64, y: f64, z: f64 },
    /// Icosphere: `10 * 4^s + 2` vertices, `20 * 4^s` triangles.
    Sphere { radius: f64, subdivisions: u32 },
    /// Z-axis cylinder: `4 * segments + 2` vertices, `4 * segments` triangles.
    Cylinder {
        radius: f64,
        height: f64,
        segments: usize,
    },
    /// Slab with top surface `t/2 + a sin(2 pi x / l) sin(2 pi y / l)` on a
    /// `cells x cells` grid.
    BumpyPlate {
        x: f64,
        y: f64,
        thickness: f64,
        amplitude: f64,
        wavelength: f64,
        cells: usize,
    },
}

pub fn make_primitive(primitive: &Primitive) -> Result<TriangleMesh> {
    match *primitive {
        Primitive::Cuboid { x, y, z } => {
            positive(&[("x", x), ("y", y), ("z", z)])?;
            Ok(cuboid(x, y, z))
        }
        Primitive::Sphere {
            radius,
            subdivisions,
        } => {
            positive(&[("radius", radius)])?;
            if subdivisions > 8 {
                return Err(Error::InvalidInput("at most 8 sphere subdivisions".into()));
            }
            Ok(icosphere(radius, subdivisions))
        }
        Primitive::Cylinder {
            radius,
            height,
            segments,
        } => {
            positive(&[("radius", radius), ("height", height)])?;
            if segments < 3 {
                return Err(Error::InvalidInput("cylinder needs at least 3 segments".into()));
            }
            Ok(cylinder(radius, height, segments))
        }
        Primitive::BumpyPlate {
            x,
            y,
            thickness,
            amplitude,
            wavelength,
            cells,
        } => {
            positive(&[("x", x), ("y", y), ("thickness", thickness), ("wavelength", wavelength)])?;
            if !(amplitude >= 0.0 && amplitude < thickness) {
                return Err(Error::InvalidInput(
                    "bump amplitude must be in [0, thickness)".into(),
                ));
            }
            if cells == 0 {
                return Err(Error::InvalidInput("bumpy plate needs at least one cell".into()));
            }
            Ok(bumpy_plate(x, y, thickness, amplitude, wavelength, cells))
        }
    }
}

fn positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("dimension {name} must be positive, got {v}")));
        }
    }
    Ok(())
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
}

impl Builder {
    fn vertex(&mut self, v: Vec3) -> u32 {
        self.vertices.push(v);
        (self.vertices.len() - 1) as u32
    }

    /// Quad `a b c d`, counter-clockwise seen from outside.
    fn quad(&mut self, a: Vec3, b: Vec3, c: Vec3, d: Vec3) {
        let ia = self.vertex(a);
        let ib = self.vertex(b);
        let ic = self.vertex(c);
        let id = self.vertex(d);
        self.faces.push([ia, ib, ic]);
        self.faces.push([ia, ic, id]);
    }

    fn finish(self) -> TriangleMesh {
        TriangleMesh::new(self.vertices, self.faces).expect("primitive builder emits valid indices")
    }
}

fn cuboid(x: f64, y: f64, z: f64) -> TriangleMesh {
    let (hx, hy, hz) = (x / 2.0, y / 2.0, z / 2.0);
    let p = |sx: f64, sy: f64, sz: f64| Vec3::new(sx * hx, sy * hy, sz * hz);
    let mut b = Builder::default();
    b.quad(p(-1., -1., 1.), p(1., -1., 1.), p(1., 1., 1.), p(-1., 1., 1.)); // +z
    b.quad(p(-1., -1., -1.), p(-1., 1., -1.), p(1., 1., -1.), p(1., -1., -1.)); // -z
    b.quad(p(1., -1., -1.), p(1., 1., -1.), p(1., 1., 1.), p(1., -1., 1.)); // +x
    b.quad(p(-1., -1., -1.), p(-1., -1., 1.), p(-1., 1., 1.), p(-1., 1., -1.)); // -x
    b.quad(p(-1., 1., -1.), p(-1., 1., 1.), p(1., 1., 1.), p(1., 1., -1.)); // +y
    b.quad(p(-1., -1., -1.), p(1., -1., -1.), p(1., -1., 1.), p(-1., -1., 1.)); // -y
    b.finish()
}

fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts.into_iter().map(|v| v * radius).collect();
    TriangleMesh::new(verts, faces).expect("icosphere indices are valid")
}

fn cylinder(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    let h = height / 2.0;
    let ring = |i: usize, z: f64| {
        let a = 2.0 * PI * (i % segments) as f64 / segments as f64;
        Vec3::new(radius * a.cos(), radius * a.sin(), z)
    };
    let mut b = Builder::default();
    // side: shared vertices so normals blend radially
    let side_base = b.vertices.len() as u32;
    for i in 0..segments {
        b.vertex(ring(i, -h));
        b.vertex(ring(i, h));
    }
    for i in 0..segments {
        let j = (i + 1) % segments;
        let (lo_i, hi_i) = (side_base + 2 * i as u32, side_base + 2 * i as u32 + 1);
        let (lo_j, hi_j) = (side_base + 2 * j as u32, side_base + 2 * j as u32 + 1);
        b.faces.push([lo_i, lo_j, hi_j]);
        b.faces.push([lo_i, hi_j, hi_i]);
    }
    for (z, up) in [(h, true), (-h, false)] {
        let center = b.vertex(Vec3::new(0.0, 0.0, z));
        let first = b.vertices.len() as u32;
        for i in 0..segments {
            b.vertex(ring(i, z));
        }
        for i in 0..segments as u32 {
            let a = first + i;
            let c = first + (i + 1) % segments as u32;
            b.faces.push(if up { [center, a, c] } else { [center, c, a] });
        }
    }
    b.finish()
}

fn bumpy_plate(
    x: f64,
    y: f64,
    thickness: f64,
    amplitude: f64,
    wavelength: f64,
    cells: usize,
) -> TriangleMesh {
    let (hx, hy, ht) = (x / 2.0, y / 2.0, thickness / 2.0);
    let n = cells;
    let k = 2.0 * PI / wavelength;
    let gx = |i: usize| -hx + x * i as f64 / n as f64;
    let gy = |j: usize| -hy + y * j as f64 / n as f64;
    let top = |i: usize, j: usize| {
        let (px, py) = (gx(i), gy(j));
        Vec3::new(px, py, ht + amplitude * (k * px).sin() * (k * py).sin())
    };
    let bottom = |i: usize, j: usize| Vec3::new(gx(i), gy(j), -ht);

    let mut b = Builder::default();
    let stride = (n + 1) as u32;
    let top_base = b.vertices.len() as u32;
    for j in 0..=n {
        for i in 0..=n {
            b.vertex(top(i, j));
        }
    }
    let bottom_base = b.vertices.len() as u32;
    for j in 0..=n {
        for i in 0..=n {
            b.vertex(bottom(i, j));
        }
    }
    for j in 0..n as u32 {
        for i in 0..n as u32 {
            let t00 = top_base + j * stride + i;
            let (t10, t01, t11) = (t00 + 1, t00 + stride, t00 + stride + 1);
            b.faces.push([t00, t10, t11]);
            b.faces.push([t00, t11, t01]);
            let b00 = bottom_base + j * stride + i;
            let (b10, b01, b11) = (b00 + 1, b00 + stride, b00 + stride + 1);
            b.faces.push([b00, b11, b10]);
            b.faces.push([b00, b01, b11]);
        }
    }
    for s in 0..n {
        // -y wall (j = 0), +x wall (i = n), +y wall (j = n), -x wall (i = 0)
        b.quad(bottom(s, 0), bottom(s + 1, 0), top(s + 1, 0), top(s, 0));
        b.quad(bottom(n, s), bottom(n, s + 1), top(n, s + 1), top(n, s));
        b.quad(bottom(s + 1, n), bottom(s, n), top(s, n), top(s + 1, n));
        b.quad(bottom(0, s + 1), bottom(0, s), top(0, s), top(0, s + 1));
    }
    b.finish()
}
