use nalgebra::SymmetricEigen;

use super::{Mat3, PointIndex, RigidTransform, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointCloud {
            points,
            normals: None,
            labels: None,
        }
    }

    pub fn with_normals(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self> {
        if normals.len() != points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} normals for {} points",
                normals.len(),
                points.len()
            )));
        }
        if let Some(i) = normals.iter().position(|n| (n.norm() - 1.0).abs() > 1e-6) {
            return Err(Error::InvalidInput(format!("normal {i} is not unit length")));
        }
        Ok(PointCloud {
            points,
            normals: Some(normals),
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::DimensionMismatch("labels vs points".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        PointCloud {
            points: t.transform_points(&self.points),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| t.apply_vector(n)).collect()),
            labels: self.labels.clone(),
        }
    }

    /// Concatenates clouds; normals/labels survive only if every part has them.
    pub fn concat(parts: &[PointCloud]) -> PointCloud {
        let points = parts.iter().flat_map(|c| c.points.iter().copied()).collect();
        let normals = parts
            .iter()
            .map(|c| c.normals.as_ref())
            .collect::<Option<Vec<_>>>()
            .map(|ns| ns.into_iter().flatten().copied().collect());
        let labels = parts
            .iter()
            .map(|c| c.labels.as_ref())
            .collect::<Option<Vec<_>>>()
            .map(|ls| ls.into_iter().flatten().copied().collect());
        PointCloud {
            points,
            normals,
            labels,
        }
    }
}

/// Least-squares plane through a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub centroid: Vec3,
    /// Unit normal (sign arbitrary).
    pub normal: Vec3,
    /// Mean squared point-to-plane distance.
    pub mean_squared_error: f64,
    /// Fewer than three points, or all points (nearly) collinear.
    pub degenerate: bool,
}

pub fn fit_plane<'a>(points: impl IntoIterator<Item = &'a Vec3> + Clone) -> PlaneFit {
    let mut n = 0usize;
    let mut sum = Vec3::zeros();
    for p in points.clone() {
        sum += p;
        n += 1;
    }
    let degenerate_fit = |centroid| PlaneFit {
        centroid,
        normal: Vec3::z(),
        mean_squared_error: 0.0,
        degenerate: true,
    };
    if n < 3 {
        return degenerate_fit(if n > 0 { sum / n as f64 } else { sum });
    }
    let centroid = sum / n as f64;
    let mut cov = Mat3::zeros();
    for p in points.clone() {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lmid = eig.eigenvalues[order[1]];
    let lmax = eig.eigenvalues[order[2]];
    if lmax <= 0.0 || lmid <= 1e-12 * lmax {
        return degenerate_fit(centroid);
    }
    let normal = eig.eigenvectors.column(order[0]).into_owned().normalize();
    let mse = points
        .into_iter()
        .map(|p| {
            let d = (p - centroid).dot(&normal);
            d * d
        })
        .sum::<f64>()
        / n as f64;
    PlaneFit {
        centroid,
        normal,
        mean_squared_error: mse,
        degenerate: false,
    }
}

#[derive(Debug, Clone)]
pub struct NormalEstimate {
    /// Input cloud with unit normals attached. Invalid entries hold the unit
    /// direction toward the view point.
    pub cloud: PointCloud,
    pub valid: Vec<bool>,
}

/// Per-point normals from a plane fit over the `k` nearest neighbours, oriented toward `view`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, view: &Vec3) -> Result<NormalEstimate> {
    if k < 3 {
        return Err(Error::InvalidInput("need at least 3 neighbours".into()));
    }
    if cloud.len() < k {
        return Err(Error::InvalidInput(format!(
            "cloud has {} points, fewer than the neighbour count {k}",
            cloud.len()
        )));
    }
    let index = PointIndex::new(&cloud.points);
    let (normals, valid): (Vec<Vec3>, Vec<bool>) = cloud
        .points
        .iter()
        .map(|p| match estimate_normal_at(&index, p, k, view) {
            Some(n) => (n, true),
            None => (fallback_normal(p, view), false),
        })
        .unzip();
    Ok(NormalEstimate {
        cloud: PointCloud {
            points: cloud.points.clone(),
            normals: Some(normals),
            labels: cloud.labels.clone(),
        },
        valid,
    })
}

/// Normal at an arbitrary query location from its `k` nearest indexed points.
pub fn estimate_normal_at(index: &PointIndex, q: &Vec3, k: usize, view: &Vec3) -> Option<Vec3> {
    let nbrs = index.knn(q, k);
    let pts: Vec<Vec3> = nbrs.iter().map(|&(i, _)| index.points()[i]).collect();
    let fit = fit_plane(pts.iter());
    if fit.degenerate {
        return None;
    }
    Some(orient_toward(fit.normal, q, view))
}

pub(crate) fn orient_toward(n: Vec3, at: &Vec3, view: &Vec3) -> Vec3 {
    if n.dot(&(view - at)) < 0.0 {
        -n
    } else {
        n
    }
}

fn fallback_normal(p: &Vec3, view: &Vec3) -> Vec3 {
    let d = view - p;
    if d.norm() > 0.0 {
        d.normalize()
    } else {
        Vec3::z()
    }
}
