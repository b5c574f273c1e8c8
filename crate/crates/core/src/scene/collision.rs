//! End-effector collision: the cup body is a cylinder along the suction
//! direction, checked against the scene cloud and the table plane.

use serde::{Deserialize, Serialize};

use super::{SceneCloud, TABLE_Z};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::pose::SuctionPose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollisionParams {
    pub radius: f64,
    pub height: f64,
    /// Gap between the contact point and the cylinder base, along `u`.
    pub offset: f64,
    /// Points this close to the contact point never count as collisions.
    pub self_exclusion: f64,
    /// Surface sampling spacing of the scene cloud.
    pub cloud_spacing: f64,
    /// Also flag cylinders that dip below the table plane.
    pub check_table: bool,
}

impl Default for CollisionParams {
    fn default() -> Self {
        CollisionParams {
            radius: 0.012,
            height: 0.05,
            offset: 0.002,
            self_exclusion: 0.005,
            cloud_spacing: 0.002,
            check_table: true,
        }
    }
}

impl CollisionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radius", self.radius),
            ("height", self.height),
            ("offset", self.offset),
            ("self_exclusion", self.self_exclusion),
            ("cloud_spacing", self.cloud_spacing),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "collision {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub fn point_in_cylinder(q: &Vec3, pose: &SuctionPose, params: &CollisionParams) -> bool {
    let v = q - pose.point();
    let d2 = v.norm_squared();
    if d2 <= params.self_exclusion * params.self_exclusion {
        return false;
    }
    let a = v.dot(pose.direction());
    if a < params.offset || a > params.offset + params.height {
        return false;
    }
    let radial = v - pose.direction() * a;
    radial.norm_squared() <= params.radius * params.radius
}

/// True when any scene point lies in the cup cylinder.
pub fn check_collision(cloud: &SceneCloud, pose: &SuctionPose, params: &CollisionParams) -> bool {
    let half = params.height / 2.0;
    let center = pose.point() + pose.direction() * (params.offset + half);
    let reach = half.hypot(params.radius);
    let reach = reach * (1.0 + 1e-9) + 1e-12;
    let points = cloud.cloud().points.as_slice();
    cloud
        .index()
        .within_radius(&center, reach)
        .into_iter()
        .any(|i| point_in_cylinder(&points[i], pose, params))
}

/// Linear scan counterpart of [`check_collision`].
pub fn check_collision_exhaustive(points: &[Vec3], pose: &SuctionPose, params: &CollisionParams) -> bool {
    points.iter().any(|q| point_in_cylinder(q, pose, params))
}

/// True when the cylinder reaches below the table plane.
pub fn below_table(pose: &SuctionPose, params: &CollisionParams) -> bool {
    let u = pose.direction();
    let base = pose.point() + u * params.offset;
    let top = base + u * params.height;
    let spread = params.radius * (1.0 - u.z * u.z).max(0.0).sqrt();
    base.z.min(top.z) - spread < TABLE_Z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up(p: Vec3) -> SuctionPose {
        SuctionPose::new(p, Vec3::z()).unwrap()
    }

    #[test]
    fn cylinder_membership() {
        let params = CollisionParams::default();
        let pose = up(Vec3::zeros());
        assert!(point_in_cylinder(&Vec3::new(0.0, 0.0, 0.03), &pose, &params));
        assert!(point_in_cylinder(&Vec3::new(0.011, 0.0, 0.03), &pose, &params));
        assert!(!point_in_cylinder(&Vec3::new(0.013, 0.0, 0.03), &pose, &params));
        assert!(!point_in_cylinder(&Vec3::new(0.0, 0.0, 0.001), &pose, &params));
        assert!(!point_in_cylinder(&Vec3::new(0.0, 0.0, 0.06), &pose, &params));
        // inside the slab but within the exclusion ball
        assert!(!point_in_cylinder(&Vec3::new(0.0, 0.004, 0.0025), &pose, &params));
    }

    #[test]
    fn table_check() {
        let params = CollisionParams::default();
        assert!(!below_table(&up(Vec3::new(0.0, 0.0, 0.05)), &params));
        let side = SuctionPose::new(Vec3::new(0.05, 0.0, 0.005), Vec3::x()).unwrap();
        assert!(below_table(&side, &params));
        let high_side = SuctionPose::new(Vec3::new(0.05, 0.0, 0.02), Vec3::x()).unwrap();
        assert!(!below_table(&high_side, &params));
        let down = SuctionPose::new(Vec3::new(0.0, 0.0, 0.03), -Vec3::z()).unwrap();
        assert!(below_table(&down, &params));
    }
}
