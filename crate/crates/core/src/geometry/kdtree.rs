use super::{Aabb, Vec3};

const LEAF_SIZE: usize = 8;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    bbox: Aabb,
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

/// Static median-split tree over a point set.
///
/// Distance ties are broken by the lower point index, so every query returns
/// exactly what an exhaustive scan with the same ordering would.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Vec3>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl PointIndex {
    pub fn new(points: &[Vec3]) -> Self {
        let mut index = PointIndex {
            points: points.to_vec(),
            order: (0..points.len() as u32).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            index.build(0, points.len());
        }
        index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn build(&mut self, start: usize, end: usize) -> u32 {
        let bbox = Aabb::from_points(self.order[start..end].iter().map(|&i| &self.points[i as usize]));
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            bbox,
            start: start as u32,
            end: end as u32,
            left: NONE,
            right: NONE,
        });
        if end - start > LEAF_SIZE {
            let ext = bbox.extent();
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = (start + end) / 2;
            let pts = &self.points;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                pts[a as usize][axis]
                    .total_cmp(&pts[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            let node = &mut self.nodes[id as usize];
            node.left = left;
            node.right = right;
        }
        id
    }

    /// Nearest point as `(index, squared distance)`.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, u32::MAX);
        self.nearest_rec(0, q, &mut best);
        Some((best.1 as usize, best.0))
    }

    fn nearest_rec(&self, node: u32, q: &Vec3, best: &mut (f64, u32)) {
        let n = &self.nodes[node as usize];
        if n.bbox.distance_squared(q) > best.0 {
            return;
        }
        if n.left == NONE {
            for &i in &self.order[n.start as usize..n.end as usize] {
                let d = (self.points[i as usize] - q).norm_squared();
                if d < best.0 || (d == best.0 && i < best.1) {
                    *best = (d, i);
                }
            }
            return;
        }
        let dl = self.nodes[n.left as usize].bbox.distance_squared(q);
        let dr = self.nodes[n.right as usize].bbox.distance_squared(q);
        let (first, second) = if dl <= dr { (n.left, n.right) } else { (n.right, n.left) };
        self.nearest_rec(first, q, best);
        self.nearest_rec(second, q, best);
    }

    /// The `k` nearest points sorted by `(squared distance, index)`.
    pub fn knn(&self, q: &Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut found: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.knn_rec(0, q, k, &mut found);
        found.into_iter().map(|(d, i)| (i as usize, d)).collect()
    }

    fn knn_rec(&self, node: u32, q: &Vec3, k: usize, found: &mut Vec<(f64, u32)>) {
        let n = &self.nodes[node as usize];
        if found.len() == k && n.bbox.distance_squared(q) > found[k - 1].0 {
            return;
        }
        if n.left == NONE {
            for &i in &self.order[n.start as usize..n.end as usize] {
                let d = (self.points[i as usize] - q).norm_squared();
                let key = (d, i);
                if found.len() == k {
                    let worst = found[k - 1];
                    if !(d < worst.0 || (d == worst.0 && i < worst.1)) {
                        continue;
                    }
                }
                let pos = found.partition_point(|&(fd, fi)| fd < d || (fd == d && fi < i));
                found.insert(pos, key);
                found.truncate(k);
            }
            return;
        }
        let dl = self.nodes[n.left as usize].bbox.distance_squared(q);
        let dr = self.nodes[n.right as usize].bbox.distance_squared(q);
        let (first, second) = if dl <= dr { (n.left, n.right) } else { (n.right, n.left) };
        self.knn_rec(first, q, k, found);
        self.knn_rec(second, q, k, found);
    }

    /// Indices of all points with distance `<= radius`, ascending.
    pub fn within_radius(&self, q: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.points.is_empty() && radius >= 0.0 {
            self.radius_rec(0, q, radius * radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn radius_rec(&self, node: u32, q: &Vec3, r2: f64, out: &mut Vec<usize>) {
        let n = &self.nodes[node as usize];
        if n.bbox.distance_squared(q) > r2 {
            return;
        }
        if n.left == NONE {
            out.extend(
                self.order[n.start as usize..n.end as usize]
                    .iter()
                    .filter(|&&i| (self.points[i as usize] - q).norm_squared() <= r2)
                    .map(|&i| i as usize),
            );
            return;
        }
        self.radius_rec(n.left, q, r2, out);
        self.radius_rec(n.right, q, r2, out);
    }
}
