use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};

const UNIT_TOL: f64 = 1e-9;

/// A contact point and the unit direction pointing from it out of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuctionPose {
    point: Vec3,
    direction: Vec3,
}

impl SuctionPose {
    /// Requires `‖direction‖ = 1` within 1e-9.
    pub fn new(point: Vec3, direction: Vec3) -> Result<Self> {
        if !point.iter().chain(direction.iter()).all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("suction pose is not finite".into()));
        }
        if (direction.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!(
                "suction direction has norm {}, expected 1",
                direction.norm()
            )));
        }
        Ok(SuctionPose { point, direction })
    }

    /// Normalizes `direction` first; fails on a zero vector.
    pub fn from_unnormalized(point: Vec3, direction: Vec3) -> Result<Self> {
        let len = direction.norm();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidInput("suction direction is zero".into()));
        }
        Self::new(point, direction / len)
    }

    pub fn point(&self) -> &Vec3 {
        &self.point
    }

    pub fn direction(&self) -> &Vec3 {
        &self.direction
    }

    /// Point by the full transform, direction by the rotation only.
    pub fn transformed(&self, t: &RigidTransform) -> SuctionPose {
        SuctionPose {
            point: t.apply_point(&self.point),
            direction: t.apply_vector(&self.direction),
        }
    }
}
