use std::collections::HashMap;

use super::{Aabb, RigidTransform, Vec3};
use crate::error::{Error, Result};

/// Indexed triangle mesh with area-weighted per-vertex normals.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    normals: Vec<Vec3>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        if let Some(v) = vertices.iter().position(|v| !super::is_finite(v)) {
            return Err(Error::InvalidInput(format!("vertex {v} is not finite")));
        }
        let n = vertices.len();
        for (i, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&idx| idx as usize >= n) {
                return Err(Error::InvalidInput(format!(
                    "face {i} references vertex {bad} but the mesh has {n} vertices"
                )));
            }
        }
        let normals = vertex_normals(&vertices, &faces);
        Ok(TriangleMesh {
            vertices,
            faces,
            normals,
        })
    }

    pub fn empty() -> Self {
        TriangleMesh {
            vertices: Vec::new(),
            faces: Vec::new(),
            normals: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Unnormalized `(b - a) x (c - a)`; its length is twice the face area.
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    /// Geometric unit normal, or zero for a degenerate face.
    pub fn face_normal(&self, face: usize) -> Vec3 {
        let n = self.face_cross(face);
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * self.face_cross(face).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Vertex normals blended with barycentric weights `(wa, wb, wc)`, renormalized.
    pub fn interpolated_normal(&self, face: usize, weights: [f64; 3]) -> Vec3 {
        let [a, b, c] = self.faces[face];
        let n = self.normals[a as usize] * weights[0]
            + self.normals[b as usize] * weights[1]
            + self.normals[c as usize] * weights[2];
        let len = n.norm();
        if len > 1e-12 {
            n / len
        } else {
            self.face_normal(face)
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriangleMesh {
        TriangleMesh {
            vertices: t.transform_points(&self.vertices),
            faces: self.faces.clone(),
            normals: self.normals.iter().map(|n| t.apply_vector(n)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| v * factor).collect(),
            faces: self.faces.clone(),
            normals: self.normals.clone(),
        }
    }

    /// Signed enclosed volume (positive for outward-oriented closed meshes).
    pub fn signed_volume(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Checks that the mesh is closed and consistently oriented.
    ///
    /// Vertices at bit-identical positions are welded first, so meshes that split
    /// vertices along creases (for sharp normals) still pass.
    pub fn check_watertight(&self) -> Result<()> {
        if self.faces.is_empty() {
            return Err(Error::NonWatertight("mesh has no faces".into()));
        }
        let mut weld: HashMap<[u64; 3], u32> = HashMap::new();
        let ids: Vec<u32> = self
            .vertices
            .iter()
            .map(|v| {
                let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
                let next = weld.len() as u32;
                *weld.entry(key).or_insert(next)
            })
            .collect();
        // directed edge -> count
        let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
        for f in &self.faces {
            let w = [ids[f[0] as usize], ids[f[1] as usize], ids[f[2] as usize]];
            if w[0] == w[1] || w[1] == w[2] || w[0] == w[2] {
                return Err(Error::NonWatertight("degenerate face".into()));
            }
            for i in 0..3 {
                *edges.entry((w[i], w[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            if count != 1 {
                return Err(Error::NonWatertight(format!(
                    "edge ({a}, {b}) is used {count} times in the same direction"
                )));
            }
            if !edges.contains_key(&(b, a)) {
                return Err(Error::NonWatertight(format!("edge ({a}, {b}) is a boundary")));
            }
        }
        Ok(())
    }

    /// Euler characteristic V - E + F of the welded mesh.
    pub fn euler_characteristic(&self) -> i64 {
        let mut weld: HashMap<[u64; 3], u32> = HashMap::new();
        let ids: Vec<u32> = self
            .vertices
            .iter()
            .map(|v| {
                let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
                let next = weld.len() as u32;
                *weld.entry(key).or_insert(next)
            })
            .collect();
        let mut edges = std::collections::HashSet::new();
        for f in &self.faces {
            for i in 0..3 {
                let a = ids[f[i] as usize];
                let b = ids[f[(i + 1) % 3] as usize];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        weld.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Copy with vertices permuted by `order` (new index i holds old vertex `order[i]`).
    pub fn with_vertex_order(&self, order: &[usize]) -> Result<TriangleMesh> {
        if order.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch("vertex permutation length".into()));
        }
        let mut inverse = vec![u32::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new as u32;
        }
        if inverse.contains(&u32::MAX) {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
        let vertices = order.iter().map(|&o| self.vertices[o]).collect();
        let faces = self
            .faces
            .iter()
            .map(|f| f.map(|i| inverse[i as usize]))
            .collect();
        TriangleMesh::new(vertices, faces)
    }
}

fn vertex_normals(vertices: &[Vec3], faces: &[[u32; 3]]) -> Vec<Vec3> {
    let mut acc = vec![Vec3::zeros(); vertices.len()];
    for f in faces {
        let [a, b, c] = f.map(|i| vertices[i as usize]);
        // cross product length is twice the area: area weighting for free
        let n = (b - a).cross(&(c - a));
        for &i in f {
            acc[i as usize] += n;
        }
    }
    acc.into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                Vec3::z()
            }
        })
        .collect()
}

/// Slack on the barycentric bounds so a ray grazing a shared or outer edge
/// still hits after an ulp-level perturbation of its origin.
const EDGE_SLACK: f64 = 1e-9;

/// Double-sided Möller–Trumbore. Returns `(t, u, v)` with hit = a + u (b - a) + v (c - a),
/// only for `t > 0`.
pub fn intersect_triangle(
    origin: &Vec3,
    dir: &Vec3,
    a: &Vec3,
    b: &Vec3,
    c: &Vec3,
) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() <= f64::EPSILON * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv;
    if !(-EDGE_SLACK..=1.0 + EDGE_SLACK).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if v < -EDGE_SLACK || u + v > 1.0 + EDGE_SLACK {
        return None;
    }
    let t = e2.dot(&qvec) * inv;
    (t > 0.0).then_some((t, u, v))
}

/// Closest point on triangle `abc` to `p`, with barycentric weights for `(a, b, c)`.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> TriangleMesh {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let f = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
        TriangleMesh::new(v, f).unwrap()
    }

    #[test]
    fn tetra_is_closed_with_positive_volume() {
        let m = tetra();
        m.check_watertight().unwrap();
        assert!((m.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn open_mesh_is_rejected() {
        let m = tetra();
        let open = TriangleMesh::new(m.vertices().to_vec(), m.faces()[..3].to_vec()).unwrap();
        assert!(matches!(open.check_watertight(), Err(Error::NonWatertight(_))));
    }

    #[test]
    fn normals_are_unit() {
        for n in tetra().normals() {
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_face_is_rejected() {
        let err = TriangleMesh::new(vec![Vec3::zeros(); 3], vec![[0, 1, 7]]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn ray_hits_triangle_interior() {
        let (t, u, v) = intersect_triangle(
            &Vec3::new(0.25, 0.25, 1.0),
            &Vec3::new(0.0, 0.0, -1.0),
            &Vec3::zeros(),
            &Vec3::x(),
            &Vec3::y(),
        )
        .unwrap();
        assert!((t - 1.0).abs() < 1e-15);
        assert!((u - 0.25).abs() < 1e-15 && (v - 0.25).abs() < 1e-15);
        // behind the origin
        assert!(intersect_triangle(
            &Vec3::new(0.25, 0.25, 1.0),
            &Vec3::z(),
            &Vec3::zeros(),
            &Vec3::x(),
            &Vec3::y()
        )
        .is_none());
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (Vec3::zeros(), Vec3::x(), Vec3::y());
        let (q, _) = closest_point_on_triangle(&Vec3::new(0.2, 0.2, 3.0), &a, &b, &c);
        assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        let (q, w) = closest_point_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c);
        assert_eq!(q, a);
        assert_eq!(w, [1.0, 0.0, 0.0]);
        let (q, _) = closest_point_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }
}
