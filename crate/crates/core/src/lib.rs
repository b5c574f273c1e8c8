//! Analytic suction-grasp scoring and benchmarking.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: meshes, point clouds, rigid transforms, pinhole cameras and
//!   the spatial indices every other module queries.
//! - [`seal`]: the perimeter-spring seal model and the local plane-fit term.
//! - [`wrench`]: gravity torque against the cup's elastic restoring torque.
//! - [`scene`]: primitive objects, scene composition, collision checks,
//!   dense scene annotation and depth rendering.
//! - [`eval`]: association, NMS, Precision@k and AP metrics over prediction files.
//! - [`baselines`]: heatmap utilities and the Normal STD heuristic.
//! - [`io`]: configuration and text/binary file formats.
//!
//! All lengths are meters.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod pose;
pub mod scene;
pub mod seal;
pub mod wrench;

pub use error::{Error, Result};
pub use geometry::{
    CameraIntrinsics, DepthImage, MeshIndex, PointCloud, PointIndex, RigidTransform, TriangleMesh,
    Vec3,
};
pub use pose::SuctionPose;
pub use seal::{CupModel, SealParams, SealScore, SealSurface};
pub use wrench::{WrenchParams, WrenchResult};
