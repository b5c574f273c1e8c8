//! Seal formation score from a perimeter-spring cup model plus a local
//! plane-fit penalty.
//!
//! The contact ring is a regular `n`-gon of radius `r` in the plane orthogonal
//! to the suction direction `u`. Each ring vertex is lifted `h` above the
//! contact point and cast along `-u` onto the object. Consecutive projected
//! vertices define the deformed perimeter spring lengths. The ring azimuth is
//! fixed by [`orthonormal_basis`] in the frame of the [`SealSurface`], so a
//! posed object is always scored in its own body frame.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    fit_plane, orthonormal_basis, sample_surface, MeshIndex, PointCloud, PointIndex,
    RigidTransform, TriangleMesh, Vec3,
};
use crate::pose::SuctionPose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CupModel {
    /// Contact-ring radius in meters.
    pub radius: f64,
    /// Number of ring vertices (perimeter springs).
    pub vertices: usize,
}

impl Default for CupModel {
    fn default() -> Self {
        CupModel {
            radius: 0.010,
            vertices: 8,
        }
    }
}

impl CupModel {
    pub fn new(radius: f64, vertices: usize) -> Result<Self> {
        let cup = CupModel { radius, vertices };
        cup.validate()?;
        Ok(cup)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput("cup radius must be positive".into()));
        }
        if self.vertices < 4 {
            return Err(Error::InvalidInput("cup needs at least 4 ring vertices".into()));
        }
        Ok(())
    }

    /// Undeformed perimeter spring length `2 r sin(pi / n)`.
    pub fn rest_length(&self) -> f64 {
        2.0 * self.radius * (std::f64::consts::PI / self.vertices as f64).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SealParams {
    /// Plane-fit decay coefficient `c` in 1/m².
    pub fit_coefficient: f64,
    /// Plane-fit neighborhood radius as a multiple of the cup radius.
    pub neighborhood_factor: f64,
    /// Height above the contact point where ring rays start, in cup radii.
    pub standoff_factor: f64,
    /// Maximum ray travel before a ring vertex counts as missing, in cup radii.
    pub max_travel_factor: f64,
    /// Spacing of the dense surface cloud used for plane fitting, in meters.
    pub surface_spacing: f64,
    /// DexNet-style binary deformation rule (`S_deform = 1` iff every ratio is within
    /// the threshold). Off by default.
    pub binary_threshold: Option<f64>,
}

impl Default for SealParams {
    fn default() -> Self {
        SealParams {
            fit_coefficient: 5.0e5,
            neighborhood_factor: 1.25,
            standoff_factor: 2.0,
            max_travel_factor: 4.0,
            surface_spacing: 0.001,
            binary_threshold: None,
        }
    }
}

impl SealParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fit coefficient", self.fit_coefficient),
            ("neighborhood factor", self.neighborhood_factor),
            ("standoff factor", self.standoff_factor),
            ("max travel factor", self.max_travel_factor),
            ("surface spacing", self.surface_spacing),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        if let Some(t) = self.binary_threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidInput("binary threshold must be in (0, 1)".into()));
            }
        }
        Ok(())
    }
}

/// Object geometry prepared for seal queries: a ray-cast index over the mesh
/// and a dense surface cloud for the plane fit.
#[derive(Debug, Clone)]
pub struct SealSurface {
    index: MeshIndex,
    cloud: PointCloud,
    cloud_index: PointIndex,
}

impl SealSurface {
    pub fn new(mesh: TriangleMesh, surface_spacing: f64) -> Self {
        let cloud = sample_surface(&mesh, surface_spacing);
        let cloud_index = PointIndex::new(&cloud.points);
        SealSurface {
            index: MeshIndex::new(mesh),
            cloud,
            cloud_index,
        }
    }

    pub fn mesh(&self) -> &TriangleMesh {
        self.index.mesh()
    }

    pub fn mesh_index(&self) -> &MeshIndex {
        &self.index
    }

    pub fn surface_cloud(&self) -> &PointCloud {
        &self.cloud
    }

    /// Dense surface points within `radius` of `p` whose normals face along `u`.
    pub fn neighborhood(&self, p: &Vec3, u: &Vec3, radius: f64) -> Vec<Vec3> {
        let normals = self.cloud.normals.as_ref().expect("surface cloud carries normals");
        self.cloud_index
            .within_radius(p, radius)
            .into_iter()
            .filter(|&i| normals[i].dot(u) > 0.0)
            .map(|i| self.cloud.points[i])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// Ring vertex positions before casting.
    pub ring: Vec<Vec3>,
    /// Projected ring vertices; `None` marks a miss.
    pub hits: Vec<Option<Vec3>>,
    /// Deformed length of spring `i` (vertex `i` to `i + 1`) when both ends hit.
    pub deformed_lengths: Vec<Option<f64>>,
}

impl ProjectionResult {
    pub fn any_miss(&self) -> bool {
        self.hits.iter().any(Option::is_none)
    }
}

/// Projects the contact ring along `-u` onto the surface.
///
/// A ring vertex misses when its ray travels `max_travel_factor * r` without
/// a hit, or when the first surface it reaches faces away from the ray (the
/// ray started inside the object).
pub fn project_cup(
    index: &MeshIndex,
    pose: &SuctionPose,
    cup: &CupModel,
    params: &SealParams,
) -> ProjectionResult {
    let u = pose.direction();
    let (e1, e2) = orthonormal_basis(u);
    let r = cup.radius;
    let lift = pose.point() + u * (params.standoff_factor * r);
    let dir = -u;
    let max_t = params.max_travel_factor * r;
    let n = cup.vertices;
    let ring: Vec<Vec3> = (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            lift + (e1 * theta.cos() + e2 * theta.sin()) * r
        })
        .collect();
    let mesh = index.mesh();
    let hits: Vec<Option<Vec3>> = ring
        .iter()
        .map(|start| {
            index
                .ray_cast_within(start, &dir, max_t)
                .filter(|hit| mesh.face_cross(hit.face).dot(&dir) < 0.0)
                .map(|hit| hit.point)
        })
        .collect();
    let deformed_lengths = (0..n)
        .map(|i| match (hits[i], hits[(i + 1) % n]) {
            (Some(a), Some(b)) => Some((b - a).norm()),
            _ => None,
        })
        .collect();
    ProjectionResult {
        ring,
        hits,
        deformed_lengths,
    }
}

/// `min(1, |l' - l| / l)`.
pub fn change_ratio(rest: f64, deformed: f64) -> Result<f64> {
    if !(rest > 0.0) {
        return Err(Error::InvalidRestLength(rest));
    }
    Ok(((deformed - rest) / rest).abs().min(1.0))
}

/// `1 - max(ratios)`.
pub fn deformation_score(ratios: &[f64]) -> Result<f64> {
    let worst = ratios.iter().copied().fold(None, |acc: Option<f64>, r| {
        Some(acc.map_or(r, |a| a.max(r)))
    });
    worst.map(|w| 1.0 - w).ok_or(Error::NoSprings)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFitScore {
    pub score: f64,
    /// Mean squared point-to-plane distance in m².
    pub mean_squared_error: f64,
    pub degenerate: bool,
}

/// `exp(-c * E_square)` for the least-squares plane through `points`.
pub fn plane_fit_score(points: &[Vec3], params: &SealParams) -> PlaneFitScore {
    let fit = fit_plane(points.iter());
    if fit.degenerate {
        return PlaneFitScore {
            score: 0.0,
            mean_squared_error: fit.mean_squared_error,
            degenerate: true,
        };
    }
    PlaneFitScore {
        score: (-params.fit_coefficient * fit.mean_squared_error).exp(),
        mean_squared_error: fit.mean_squared_error,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SealScore {
    /// `S_deform * S_fit`, or 0 when any ring vertex missed.
    pub seal: f64,
    pub deform: f64,
    pub fit: f64,
    pub missed: bool,
    pub fit_degenerate: bool,
}

pub fn seal_score(
    surface: &SealSurface,
    pose: &SuctionPose,
    cup: &CupModel,
    params: &SealParams,
) -> SealScore {
    let projection = project_cup(&surface.index, pose, cup, params);
    let rest = cup.rest_length();
    let ratios: Vec<f64> = projection
        .deformed_lengths
        .iter()
        .flatten()
        .map(|&l| change_ratio(rest, l).expect("cup validated: rest length > 0"))
        .collect();
    let deform = match (deformation_score(&ratios), params.binary_threshold) {
        (Ok(_), Some(t)) => {
            if ratios.iter().all(|&r| r <= t) {
                1.0
            } else {
                0.0
            }
        }
        (Ok(s), None) => s,
        (Err(_), _) => 0.0,
    };
    let neighborhood = surface.neighborhood(
        pose.point(),
        pose.direction(),
        params.neighborhood_factor * cup.radius,
    );
    let fit = plane_fit_score(&neighborhood, params);
    let missed = projection.any_miss();
    SealScore {
        seal: if missed { 0.0 } else { deform * fit.score },
        deform,
        fit: fit.score,
        missed,
        fit_degenerate: fit.degenerate,
    }
}

/// Scores a world-frame pose against a surface placed by `object_pose` (body -> world).
pub fn seal_score_posed(
    surface: &SealSurface,
    object_pose: &RigidTransform,
    world_pose: &SuctionPose,
    cup: &CupModel,
    params: &SealParams,
) -> SealScore {
    let body = world_pose.transformed(&object_pose.inverse());
    seal_score(surface, &body, cup, params)
}

/// Scores many poses in parallel; output order follows input order.
pub fn seal_scores(
    surface: &SealSurface,
    poses: &[SuctionPose],
    cup: &CupModel,
    params: &SealParams,
) -> Vec<SealScore> {
    poses
        .par_iter()
        .map(|p| seal_score(surface, p, cup, params))
        .collect()
}
