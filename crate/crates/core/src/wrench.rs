//! Wrench resistance against gravity.
//!
//! Only the elastic-restoring-torque limit of the cup is modeled: the gravity
//! torque about the contact point, restricted to the plane orthogonal to the
//! suction direction, is compared with `tau_thre = pi * r * k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{orthonormal_basis, TriangleMesh, Vec3};
use crate::pose::SuctionPose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrenchParams {
    /// Contact-ring radius (m); shared with the cup model.
    pub radius: f64,
    /// Material constant `k` (N).
    pub k: f64,
    /// Object mass (kg), the same for every object.
    pub mass: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
    /// Unit gravity direction in the world frame.
    pub gravity: Vec3,
}

impl Default for WrenchParams {
    fn default() -> Self {
        WrenchParams {
            radius: 0.010,
            k: 31.8,
            mass: 1.0,
            g: 9.8,
            gravity: Vec3::new(0.0, 0.0, -1.0),
        }
    }
}

impl WrenchParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radius", self.radius),
            ("k", self.k),
            ("mass", self.mass),
            ("g", self.g),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("wrench {name} must be positive")));
            }
        }
        if (self.gravity.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("gravity direction must be a unit vector".into()));
        }
        Ok(())
    }

    pub fn with_gravity(mut self, gravity: Vec3) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    /// `pi * r * k`.
    pub fn torque_threshold(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchResult {
    pub tau_x: f64,
    pub tau_y: f64,
    /// `sqrt(tau_x² + tau_y²)`.
    pub magnitude: f64,
    pub score: f64,
}

/// Uniform-density centroid by signed tetrahedron integration.
pub fn center_of_mass(mesh: &TriangleMesh) -> Result<Vec3> {
    mesh.check_watertight()?;
    // Reference at the box center keeps the tetrahedra small.
    let o = mesh.bounding_box().center();
    let mut volume = 0.0;
    let mut moment = Vec3::zeros();
    for f in 0..mesh.faces().len() {
        let [a, b, c] = mesh.triangle(f);
        let (a, b, c) = (a - o, b - o, c - o);
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += (a + b + c) * (v / 4.0);
    }
    if !(volume.abs() > 0.0) {
        return Err(Error::NonWatertight("enclosed volume is zero".into()));
    }
    Ok(o + moment / volume)
}

/// Gravity torque about the contact point, `(com - p) x (m g ĝ)`.
pub fn gravity_torque_vector(pose: &SuctionPose, com: &Vec3, params: &WrenchParams) -> Vec3 {
    let force = params.gravity * (params.mass * params.g);
    (com - pose.point()).cross(&force)
}

/// Torque components along the in-plane basis `(e1, e2)` orthogonal to the suction direction.
pub fn gravity_torque_in_basis(
    pose: &SuctionPose,
    com: &Vec3,
    params: &WrenchParams,
    e1: &Vec3,
    e2: &Vec3,
) -> (f64, f64) {
    let tau = gravity_torque_vector(pose, com, params);
    (tau.dot(e1), tau.dot(e2))
}

pub fn gravity_torque(pose: &SuctionPose, com: &Vec3, params: &WrenchParams) -> (f64, f64) {
    let (e1, e2) = orthonormal_basis(pose.direction());
    gravity_torque_in_basis(pose, com, params, &e1, &e2)
}

pub fn wrench_score(pose: &SuctionPose, com: &Vec3, params: &WrenchParams) -> WrenchResult {
    let (tau_x, tau_y) = gravity_torque(pose, com, params);
    let magnitude = tau_x.hypot(tau_y);
    WrenchResult {
        tau_x,
        tau_y,
        magnitude,
        score: 1.0 - (magnitude / params.torque_threshold()).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_threshold_is_about_one_newton_meter() {
        let t = WrenchParams::default().torque_threshold();
        assert!((t - std::f64::consts::PI * 0.01 * 31.8).abs() < 1e-15);
        assert!((t - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_lever_arm() {
        let params = WrenchParams::default();
        let pose = SuctionPose::new(Vec3::new(0.0, 0.0, 0.1), Vec3::z()).unwrap();
        let r = wrench_score(&pose, &Vec3::new(0.0, 0.0, 0.03), &params);
        assert_eq!(r.magnitude, 0.0);
        assert_eq!(r.score, 1.0);
    }

    #[test]
    fn clamps_at_threshold() {
        let params = WrenchParams::default();
        let pose = SuctionPose::new(Vec3::zeros(), Vec3::z()).unwrap();
        // lever arm of 0.2 m gives 1.96 N m > 1 N m
        let r = wrench_score(&pose, &Vec3::new(0.2, 0.0, 0.0), &params);
        assert!(r.magnitude > params.torque_threshold());
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(WrenchParams::default().with_mass(0.0).validate().is_err());
        assert!(WrenchParams::default()
            .with_gravity(Vec3::new(0.0, 0.0, -2.0))
            .validate()
            .is_err());
    }
}
