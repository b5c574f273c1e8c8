use std::collections::BTreeMap;

use super::mesh::closest_point_on_triangle;
use super::{PointCloud, TriangleMesh, Vec3};

/// One suction candidate drawn from an occupied surface voxel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelSample {
    /// Integer cell coordinates; cell 0 is centered on the mesh bounding-box center.
    pub voxel: [i64; 3],
    pub point: Vec3,
    /// Interpolated vertex normal at `point`.
    pub normal: Vec3,
    pub face: usize,
}

/// Samples at most one candidate per occupied surface voxel.
///
/// The grid is anchored so that a voxel center coincides with the mesh
/// bounding-box center. Each occupied voxel contributes the surface point
/// nearest its center (ties: lowest face id). A voxel counts as occupied when
/// some face meets it other than only along the voxel's upper boundary planes,
/// so every surface point belongs to exactly one half-open cell. Output is
/// sorted by voxel coordinates.
pub fn voxel_sample_surface(mesh: &TriangleMesh, voxel: f64) -> Vec<VoxelSample> {
    assert!(voxel > 0.0, "voxel size must be positive");
    if mesh.is_empty() {
        return Vec::new();
    }
    let origin = mesh.bounding_box().center();
    let cell_of = |x: f64, axis: usize| ((x - origin[axis]) / voxel + 0.5).floor() as i64;
    let mut best: BTreeMap<[i64; 3], (f64, usize, Vec3)> = BTreeMap::new();

    for face in 0..mesh.faces().len() {
        let tri = mesh.triangle(face);
        let n = mesh.face_cross(face);
        if n.norm() == 0.0 {
            continue;
        }
        let n = n.normalize();
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for axis in 0..3 {
            let (mn, mx) = tri.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p[axis]), b.max(p[axis]))
            });
            lo[axis] = cell_of(mn, axis);
            hi[axis] = cell_of(mx, axis);
        }
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    let cell = [i, j, k];
                    let center = Vec3::new(
                        origin.x + i as f64 * voxel,
                        origin.y + j as f64 * voxel,
                        origin.z + k as f64 * voxel,
                    );
                    let half = Vec3::repeat(0.5 * voxel);
                    let (bmin, bmax) = (center - half, center + half);
                    let poly = clip_to_box(&tri, &bmin, &bmax);
                    if poly.is_empty() || on_upper_boundary(&poly, &bmax) {
                        continue;
                    }
                    let q = closest_on_polygon(&poly, &n, &center);
                    let d = (q - center).norm_squared();
                    let entry = best.entry(cell).or_insert((f64::INFINITY, usize::MAX, q));
                    if d < entry.0 || (d == entry.0 && face < entry.1) {
                        *entry = (d, face, q);
                    }
                }
            }
        }
    }

    best.into_iter()
        .map(|(voxel, (_, face, point))| {
            let [a, b, c] = mesh.triangle(face);
            let (_, w) = closest_point_on_triangle(&point, &a, &b, &c);
            VoxelSample {
                voxel,
                point,
                normal: mesh.interpolated_normal(face, w),
                face,
            }
        })
        .collect()
}

fn on_upper_boundary(poly: &[Vec3], bmax: &Vec3) -> bool {
    (0..3).any(|axis| poly.iter().all(|p| p[axis] >= bmax[axis]))
}

/// Sutherland–Hodgman clip of a triangle against a closed box.
fn clip_to_box(tri: &[Vec3; 3], bmin: &Vec3, bmax: &Vec3) -> Vec<Vec3> {
    let mut poly: Vec<Vec3> = tri.to_vec();
    for axis in 0..3 {
        for (bound, keep_below) in [(bmin[axis], false), (bmax[axis], true)] {
            if poly.is_empty() {
                return poly;
            }
            let inside = |p: &Vec3| {
                if keep_below {
                    p[axis] <= bound
                } else {
                    p[axis] >= bound
                }
            };
            let mut out = Vec::with_capacity(poly.len() + 2);
            for idx in 0..poly.len() {
                let cur = poly[idx];
                let next = poly[(idx + 1) % poly.len()];
                let (ci, ni) = (inside(&cur), inside(&next));
                if ci {
                    out.push(cur);
                }
                if ci != ni {
                    let t = (bound - cur[axis]) / (next[axis] - cur[axis]);
                    let mut p = cur + (next - cur) * t;
                    p[axis] = bound;
                    out.push(p);
                }
            }
            poly = out;
        }
    }
    poly
}

/// Closest point to `q` on a planar convex polygon with unit normal `n`.
fn closest_on_polygon(poly: &[Vec3], n: &Vec3, q: &Vec3) -> Vec3 {
    if poly.len() >= 3 {
        let proj = q - n * (q - poly[0]).dot(n);
        let inside = (0..poly.len()).all(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            (b - a).cross(&(proj - a)).dot(n) >= 0.0
        });
        if inside {
            return proj;
        }
    }
    if poly.len() == 1 {
        return poly[0];
    }
    let mut best = poly[0];
    let mut best_d = f64::INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let ab = b - a;
        let len2 = ab.norm_squared();
        let t = if len2 > 0.0 {
            ((q - a).dot(&ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let p = a + ab * t;
        let d = (p - q).norm_squared();
        if d < best_d {
            best_d = d;
            best = p;
        }
    }
    best
}

/// Dense deterministic surface sampling on a barycentric lattice with edge
/// spacing at most `spacing`. Normals are the geometric face normals.
pub fn sample_surface(mesh: &TriangleMesh, spacing: f64) -> PointCloud {
    assert!(spacing > 0.0, "sampling spacing must be positive");
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for face in 0..mesh.faces().len() {
        let normal = mesh.face_normal(face);
        if normal == Vec3::zeros() {
            continue;
        }
        let [a, b, c] = mesh.triangle(face);
        let longest = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        let n = ((longest / spacing).ceil() as usize).max(1);
        let inv = 1.0 / n as f64;
        for i in 0..=n {
            for j in 0..=(n - i) {
                points.push(a + (b - a) * (i as f64 * inv) + (c - a) * (j as f64 * inv));
                normals.push(normal);
            }
        }
    }
    PointCloud {
        points,
        normals: Some(normals),
        labels: None,
    }
}
