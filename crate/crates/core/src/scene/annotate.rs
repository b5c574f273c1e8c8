use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;

use super::collision::{below_table, check_collision, CollisionParams};
use super::SceneModel;
use crate::error::{Error, Result};
use crate::geometry::{voxel_sample_surface, Vec3};
use crate::pose::SuctionPose;
use crate::seal::{seal_scores, CupModel, SealParams, SealSurface};
use crate::wrench::{wrench_score, WrenchParams};

/// One object-frame candidate with its seal terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRecord {
    pub pose: SuctionPose,
    pub seal: f64,
    pub deform: f64,
    pub fit: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjectAnnotation {
    pub candidates: Vec<CandidateRecord>,
}

/// Voxel-samples the surface and seal-scores every candidate.
/// Candidate order follows the voxel index.
pub fn annotate_object(
    surface: &SealSurface,
    voxel: f64,
    cup: &CupModel,
    params: &SealParams,
) -> Result<ObjectAnnotation> {
    cup.validate()?;
    params.validate()?;
    if !(voxel > 0.0 && voxel.is_finite()) {
        return Err(Error::InvalidInput(format!("voxel size must be positive, got {voxel}")));
    }
    let poses: Vec<SuctionPose> = voxel_sample_surface(surface.mesh(), voxel)
        .into_iter()
        .map(|s| SuctionPose::from_unnormalized(s.point, s.normal))
        .collect::<Result<_>>()?;
    let scores = seal_scores(surface, &poses, cup, params);
    Ok(ObjectAnnotation {
        candidates: poses
            .into_iter()
            .zip(scores)
            .map(|(pose, s)| CandidateRecord {
                pose,
                seal: s.seal,
                deform: s.deform,
                fit: s.fit,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneRecord {
    pub object_id: u32,
    pub instance: usize,
    /// Index into the object annotation.
    pub candidate: usize,
    /// World-frame pose.
    pub pose: SuctionPose,
    pub seal: f64,
    pub wrench: f64,
    pub score: f64,
    pub collision_free: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneAnnotation {
    /// Sorted by object id, then instance, then candidate index.
    pub records: Vec<SceneRecord>,
    /// World-frame center of mass per instance, as `(object id, com)`.
    pub coms: Vec<(u32, Vec3)>,
    pub warnings: Vec<String>,
}

impl SceneAnnotation {
    pub fn collision_free(&self) -> impl Iterator<Item = &SceneRecord> {
        self.records.iter().filter(|r| r.collision_free)
    }
}

/// Projects every object annotation into the scene, adds the wrench score
/// under the scene gravity, and flags cup collisions.
pub fn annotate_scene(
    model: &SceneModel,
    annotations: &BTreeMap<u32, ObjectAnnotation>,
    wrench: &WrenchParams,
    collision: &CollisionParams,
) -> Result<SceneAnnotation> {
    if model.is_empty() {
        return Err(Error::EmptyScene);
    }
    collision.validate()?;
    let wrench = wrench.clone().with_gravity(*model.scene().gravity());
    wrench.validate()?;

    let mut order: Vec<usize> = (0..model.len()).collect();
    order.sort_by_key(|&i| (model.instance(i).object_id, i));

    let mut records = Vec::new();
    for &i in &order {
        let inst = model.instance(i);
        let ann = annotations.get(&inst.object_id).ok_or_else(|| {
            Error::InvalidInput(format!("no seal annotation for object {}", inst.object_id))
        })?;
        let com = model.world_com(i);
        let part: Vec<SceneRecord> = ann
            .candidates
            .par_iter()
            .enumerate()
            .map(|(c, cand)| {
                let pose = cand.pose.transformed(&inst.pose);
                let w = wrench_score(&pose, &com, &wrench).score;
                let hit = check_collision(model.cloud(), &pose, collision)
                    || (collision.check_table && below_table(&pose, collision));
                SceneRecord {
                    object_id: inst.object_id,
                    instance: i,
                    candidate: c,
                    pose,
                    seal: cand.seal,
                    wrench: w,
                    score: cand.seal * w,
                    collision_free: !hit,
                }
            })
            .collect();
        records.extend(part);
    }

    let warnings: Vec<String> = model
        .interpenetrations()
        .into_iter()
        .map(|(a, b, d)| {
            format!(
                "instances {a} (object {}) and {b} (object {}) overlap by {:.1} mm",
                model.instance(a).object_id,
                model.instance(b).object_id,
                d * 1e3
            )
        })
        .collect();
    for w in &warnings {
        warn!("{w}");
    }
    Ok(SceneAnnotation {
        records,
        coms: (0..model.len())
            .map(|i| (model.instance(i).object_id, model.world_com(i)))
            .collect(),
        warnings,
    })
}
