use super::mesh::{closest_point_on_triangle, intersect_triangle};
use super::{Aabb, TriangleMesh, Vec3};

const LEAF_SIZE: usize = 4;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    bbox: Aabb,
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub point: Vec3,
    pub face: usize,
    /// Weights of the face's three vertices.
    pub barycentric: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub point: Vec3,
    pub face: usize,
    pub distance_squared: f64,
    pub barycentric: [f64; 3],
}

/// Bounding volume hierarchy over the triangles of a mesh.
///
/// Ties (equal ray parameter or equal distance) resolve to the lowest face id,
/// matching an exhaustive per-triangle scan.
#[derive(Debug, Clone)]
pub struct MeshIndex {
    mesh: TriangleMesh,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl MeshIndex {
    pub fn new(mesh: TriangleMesh) -> Self {
        let n = mesh.faces().len();
        let boxes: Vec<Aabb> = (0..n).map(|f| Aabb::from_points(&mesh.triangle(f))).collect();
        let centroids: Vec<Vec3> = boxes.iter().map(|b| b.center()).collect();
        let diag = mesh.bounding_box();
        let pad = if diag.is_empty() {
            0.0
        } else {
            1e-12 + 1e-9 * diag.extent().norm()
        };
        let mut index = MeshIndex {
            mesh,
            order: (0..n as u32).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            index.build(0, n, &boxes, &centroids, pad);
        }
        index
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    fn build(&mut self, start: usize, end: usize, boxes: &[Aabb], centroids: &[Vec3], pad: f64) -> u32 {
        let slice = &self.order[start..end];
        let bbox = slice
            .iter()
            .fold(Aabb::empty(), |acc, &f| acc.merge(&boxes[f as usize]))
            .padded(pad);
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            bbox,
            start: start as u32,
            end: end as u32,
            left: NONE,
            right: NONE,
        });
        if end - start > LEAF_SIZE {
            let cb = Aabb::from_points(slice.iter().map(|&f| &centroids[f as usize]));
            let ext = cb.extent();
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = (start + end) / 2;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                centroids[a as usize][axis]
                    .total_cmp(&centroids[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let left = self.build(start, mid, boxes, centroids, pad);
            let right = self.build(mid, end, boxes, centroids, pad);
            let node = &mut self.nodes[id as usize];
            node.left = left;
            node.right = right;
        }
        id
    }

    /// Nearest intersection with `t > 0`.
    pub fn ray_cast(&self, origin: &Vec3, dir: &Vec3) -> Option<RayHit> {
        self.ray_cast_within(origin, dir, f64::INFINITY)
    }

    /// Nearest intersection with `0 < t <= t_max`.
    pub fn ray_cast_within(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<RayHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(f64, u32, f64, f64)> = None;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            let limit = best.map_or(t_max, |b| b.0);
            if node.bbox.ray_entry(origin, &inv, limit).is_none() {
                continue;
            }
            if node.left == NONE {
                for &f in &self.order[node.start as usize..node.end as usize] {
                    let [a, b, c] = self.mesh.triangle(f as usize);
                    if let Some((t, u, v)) = intersect_triangle(origin, dir, &a, &b, &c) {
                        if t > t_max {
                            continue;
                        }
                        let better = match best {
                            None => true,
                            Some((bt, bf, _, _)) => t < bt || (t == bt && f < bf),
                        };
                        if better {
                            best = Some((t, f, u, v));
                        }
                    }
                }
                continue;
            }
            let l = &self.nodes[node.left as usize];
            let r = &self.nodes[node.right as usize];
            let tl = l.bbox.ray_entry(origin, &inv, limit);
            let tr = r.bbox.ray_entry(origin, &inv, limit);
            match (tl, tr) {
                (Some(a), Some(b)) => {
                    // visit the nearer child first
                    if a <= b {
                        stack.push(node.right);
                        stack.push(node.left);
                    } else {
                        stack.push(node.left);
                        stack.push(node.right);
                    }
                }
                (Some(_), None) => stack.push(node.left),
                (None, Some(_)) => stack.push(node.right),
                (None, None) => {}
            }
        }
        best.map(|(t, f, u, v)| RayHit {
            t,
            point: origin + dir * t,
            face: f as usize,
            barycentric: [1.0 - u - v, u, v],
        })
    }

    /// Number of triangle crossings with `t > 0` along the ray.
    pub fn count_crossings(&self, origin: &Vec3, dir: &Vec3) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut count = 0;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.bbox.ray_entry(origin, &inv, f64::INFINITY).is_none() {
                continue;
            }
            if node.left == NONE {
                for &f in &self.order[node.start as usize..node.end as usize] {
                    let [a, b, c] = self.mesh.triangle(f as usize);
                    if intersect_triangle(origin, dir, &a, &b, &c).is_some() {
                        count += 1;
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        count
    }

    /// Inside test for closed meshes by crossing parity along a skewed direction.
    pub fn contains(&self, p: &Vec3) -> bool {
        let dir = Vec3::new(0.5773, 0.5779, 0.5767).normalize();
        self.count_crossings(p, &dir) % 2 == 1
    }

    /// Closest point on the surface to `q`.
    pub fn closest_point(&self, q: &Vec3) -> Option<SurfacePoint> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<SurfacePoint> = None;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            let bound = best.map_or(f64::INFINITY, |b| b.distance_squared);
            if node.bbox.distance_squared(q) > bound {
                continue;
            }
            if node.left == NONE {
                for &f in &self.order[node.start as usize..node.end as usize] {
                    let [a, b, c] = self.mesh.triangle(f as usize);
                    let (p, w) = closest_point_on_triangle(q, &a, &b, &c);
                    let d = (p - q).norm_squared();
                    let better = match best {
                        None => true,
                        Some(s) => d < s.distance_squared || (d == s.distance_squared && (f as usize) < s.face),
                    };
                    if better {
                        best = Some(SurfacePoint {
                            point: p,
                            face: f as usize,
                            distance_squared: d,
                            barycentric: w,
                        });
                    }
                }
                continue;
            }
            let dl = self.nodes[node.left as usize].bbox.distance_squared(q);
            let dr = self.nodes[node.right as usize].bbox.distance_squared(q);
            if dl <= dr {
                stack.push(node.right);
                stack.push(node.left);
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        best
    }
}
