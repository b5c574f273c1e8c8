//! Scene composition: object instances placed by rigid poses, prepared
//! per-object geometry, and the queries shared by annotation, rendering and
//! evaluation.
//!
//! The table is the plane `z = 0`; objects rest on it with `+z` up.

mod annotate;
mod collision;
mod primitives;
mod render;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use annotate::{
    annotate_object, annotate_scene, CandidateRecord, ObjectAnnotation, SceneAnnotation,
    SceneRecord,
};
pub use collision::{
    below_table, check_collision, check_collision_exhaustive, point_in_cylinder, CollisionParams,
};
pub use primitives::{make_primitive, Primitive};
pub use render::{render_depth, render_depth_with_mask, RenderOutput};

use crate::error::{Error, Result};
use crate::geometry::{sample_surface, Aabb, PointCloud, PointIndex, RigidTransform, TriangleMesh, Vec3};
use crate::pose::SuctionPose;
use crate::seal::{seal_score_posed, CupModel, SealParams, SealScore, SealSurface};
use crate::wrench::center_of_mass;

/// Height of the supporting table plane.
pub const TABLE_Z: f64 = 0.0;

/// Penetration depth above which two instances are reported as overlapping.
pub const INTERPENETRATION_TOLERANCE: f64 = 0.002;

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInstance {
    pub object_id: u32,
    /// Object -> world.
    pub pose: RigidTransform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    instances: Vec<ObjectInstance>,
    camera_poses: Vec<RigidTransform>,
    gravity: Vec3,
}

impl Scene {
    /// `camera_poses` map camera -> world. `gravity` is normalized.
    pub fn new(
        instances: Vec<ObjectInstance>,
        camera_poses: Vec<RigidTransform>,
        gravity: Vec3,
    ) -> Result<Self> {
        let n = gravity.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("gravity must be a nonzero finite vector".into()));
        }
        Ok(Scene {
            instances,
            camera_poses,
            gravity: gravity / n,
        })
    }

    pub fn instances(&self) -> &[ObjectInstance] {
        &self.instances
    }

    pub fn camera_poses(&self) -> &[RigidTransform] {
        &self.camera_poses
    }

    pub fn camera_pose(&self, index: usize) -> Result<&RigidTransform> {
        self.camera_poses.get(index).ok_or_else(|| {
            Error::InvalidInput(format!(
                "camera {index} out of range ({} cameras)",
                self.camera_poses.len()
            ))
        })
    }

    pub fn gravity(&self) -> &Vec3 {
        &self.gravity
    }

    /// The same scene with every pose pre-multiplied by `t`, gravity included.
    pub fn transformed(&self, t: &RigidTransform) -> Scene {
        Scene {
            instances: self
                .instances
                .iter()
                .map(|i| ObjectInstance {
                    object_id: i.object_id,
                    pose: t.compose(&i.pose),
                })
                .collect(),
            camera_poses: self.camera_poses.iter().map(|c| t.compose(c)).collect(),
            gravity: t.apply_vector(&self.gravity),
        }
    }
}

/// Object pose seen from camera `i`, given the pose `p0` annotated in camera 0.
pub fn propagate_pose(
    cam_i: &RigidTransform,
    cam_0: &RigidTransform,
    p0: &RigidTransform,
) -> RigidTransform {
    cam_i.inverse().compose(cam_0).compose(p0)
}

/// Maps object-frame suctions through `cam_0 * instance.pose`.
///
/// `cam_0` takes the frame the instance pose is expressed in to the world; pass
/// the identity when instance poses are already world-frame.
pub fn project_suctions(
    instance: &ObjectInstance,
    cam_0: &RigidTransform,
    suctions: &[SuctionPose],
) -> Vec<SuctionPose> {
    let t = cam_0.compose(&instance.pose);
    suctions.iter().map(|s| s.transformed(&t)).collect()
}

/// Per-object geometry prepared once and shared across scenes.
#[derive(Debug, Clone)]
pub struct ObjectModel {
    id: u32,
    surface: SealSurface,
    com: Vec3,
    collision_cloud: PointCloud,
}

impl ObjectModel {
    /// Fails when the mesh is not watertight (no well-defined centroid).
    pub fn new(
        id: u32,
        mesh: TriangleMesh,
        seal: &SealParams,
        collision: &CollisionParams,
    ) -> Result<Self> {
        seal.validate()?;
        collision.validate()?;
        let com = center_of_mass(&mesh)?;
        let collision_cloud = sample_surface(&mesh, collision.cloud_spacing);
        Ok(ObjectModel {
            id,
            surface: SealSurface::new(mesh, seal.surface_spacing),
            com,
            collision_cloud,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn surface(&self) -> &SealSurface {
        &self.surface
    }

    pub fn mesh(&self) -> &TriangleMesh {
        self.surface.mesh()
    }

    /// Body-frame center of mass.
    pub fn com(&self) -> &Vec3 {
        &self.com
    }

    pub fn collision_cloud(&self) -> &PointCloud {
        &self.collision_cloud
    }
}

pub type ObjectRegistry = BTreeMap<u32, Arc<ObjectModel>>;

/// World-frame collision cloud; labels hold the instance index of each point.
#[derive(Debug, Clone)]
pub struct SceneCloud {
    cloud: PointCloud,
    index: PointIndex,
}

impl SceneCloud {
    pub fn new(cloud: PointCloud) -> Self {
        let index = PointIndex::new(&cloud.points);
        SceneCloud { cloud, index }
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn index(&self) -> &PointIndex {
        &self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub instance: usize,
    pub object_id: u32,
    pub distance: f64,
}

/// A scene bound to its object models, with the world collision cloud built.
#[derive(Debug, Clone)]
pub struct SceneModel {
    scene: Scene,
    models: Vec<Arc<ObjectModel>>,
    inverses: Vec<RigidTransform>,
    world_boxes: Vec<Aabb>,
    cloud: SceneCloud,
}

impl SceneModel {
    pub fn new(scene: Scene, registry: &ObjectRegistry) -> Result<Self> {
        let mut models = Vec::with_capacity(scene.instances.len());
        for inst in &scene.instances {
            let model = registry.get(&inst.object_id).ok_or_else(|| {
                Error::InvalidInput(format!("object id {} not in the mesh registry", inst.object_id))
            })?;
            models.push(Arc::clone(model));
        }
        let mut parts = Vec::with_capacity(models.len());
        let mut world_boxes = Vec::with_capacity(models.len());
        for (i, (inst, model)) in scene.instances.iter().zip(&models).enumerate() {
            let mut part = model.collision_cloud.transformed(&inst.pose);
            part.normals = None;
            let n = part.len();
            parts.push(part.with_labels(vec![i as u32; n])?);
            let bbox = model.mesh().transformed(&inst.pose).bounding_box();
            let pad = 1e-9 * (1.0 + bbox.extent().norm());
            world_boxes.push(bbox.padded(pad));
        }
        let inverses = scene.instances.iter().map(|i| i.pose.inverse()).collect();
        Ok(SceneModel {
            cloud: SceneCloud::new(PointCloud::concat(&parts)),
            scene,
            models,
            inverses,
            world_boxes,
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn model(&self, instance: usize) -> &ObjectModel {
        &self.models[instance]
    }

    pub fn instance(&self, instance: usize) -> &ObjectInstance {
        &self.scene.instances[instance]
    }

    pub fn cloud(&self) -> &SceneCloud {
        &self.cloud
    }

    pub fn world_box(&self, instance: usize) -> &Aabb {
        &self.world_boxes[instance]
    }

    pub fn world_com(&self, instance: usize) -> Vec3 {
        self.instance(instance).pose.apply_point(self.model(instance).com())
    }

    pub fn world_mesh(&self, instance: usize) -> TriangleMesh {
        self.model(instance).mesh().transformed(&self.instance(instance).pose)
    }

    /// World point expressed in the body frame of `instance`.
    pub fn to_body(&self, instance: usize, p: &Vec3) -> Vec3 {
        self.inverses[instance].apply_point(p)
    }

    pub(crate) fn inverse_pose(&self, instance: usize) -> &RigidTransform {
        &self.inverses[instance]
    }

    /// Distance from `q` to the surface of every instance.
    pub fn surface_distances(&self, q: &Vec3) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let body = self.to_body(i, q);
                self.model(i)
                    .surface()
                    .mesh_index()
                    .closest_point(&body)
                    .map_or(f64::INFINITY, |s| s.distance_squared.sqrt())
            })
            .collect()
    }

    /// The instance whose surface is nearest to `q`, if within `max_distance`.
    /// Ties go to the lower instance index.
    pub fn associate(&self, q: &Vec3, max_distance: f64) -> Option<Association> {
        let mut best: Option<Association> = None;
        for (i, d) in self.surface_distances(q).into_iter().enumerate() {
            if best.map_or(true, |b| d < b.distance) {
                best = Some(Association {
                    instance: i,
                    object_id: self.instance(i).object_id,
                    distance: d,
                });
            }
        }
        best.filter(|b| b.distance <= max_distance)
    }

    pub fn seal_score(
        &self,
        instance: usize,
        world_pose: &SuctionPose,
        cup: &CupModel,
        params: &SealParams,
    ) -> SealScore {
        seal_score_posed(
            self.model(instance).surface(),
            &self.instance(instance).pose,
            world_pose,
            cup,
            params,
        )
    }

    /// Pairs of instances whose surfaces sink more than
    /// [`INTERPENETRATION_TOLERANCE`] into each other.
    pub fn interpenetrations(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        let labels = self.cloud.cloud.labels.as_ref().expect("scene cloud is labeled");
        for j in 0..self.len() {
            let bbox = self.world_boxes[j];
            let index = self.model(j).surface().mesh_index();
            let mut depth = vec![0.0f64; self.len()];
            for (p, &l) in self.cloud.cloud.points.iter().zip(labels) {
                let i = l as usize;
                if i == j || bbox.distance_squared(p) > 0.0 {
                    continue;
                }
                let body = self.to_body(j, p);
                if index.contains(&body) {
                    if let Some(s) = index.closest_point(&body) {
                        depth[i] = depth[i].max(s.distance_squared.sqrt());
                    }
                }
            }
            for (i, &d) in depth.iter().enumerate() {
                if d > INTERPENETRATION_TOLERANCE {
                    out.push((i.min(j), i.max(j), d));
                }
            }
        }
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.total_cmp(&a.2)));
        out.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        out
    }
}
