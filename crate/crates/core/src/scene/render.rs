use rayon::prelude::*;

use super::{SceneModel, TABLE_Z};
use crate::geometry::{CameraIntrinsics, DepthImage, RigidTransform, Vec3};

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub depth: DepthImage,
    /// Row-major instance index of the first hit; `None` for table or background.
    pub instances: Vec<Option<u32>>,
}

/// Ray-cast depth image; `camera_pose` maps camera -> world.
///
/// Pixels that miss every object see the table plane; rays that miss the
/// table as well read 0.
pub fn render_depth(model: &SceneModel, intr: &CameraIntrinsics, camera_pose: &RigidTransform) -> DepthImage {
    render_depth_with_mask(model, intr, camera_pose).depth
}

pub fn render_depth_with_mask(
    model: &SceneModel,
    intr: &CameraIntrinsics,
    camera_pose: &RigidTransform,
) -> RenderOutput {
    let origin = *camera_pose.translation();
    let rows: Vec<Vec<(f32, Option<u32>)>> = (0..intr.height)
        .into_par_iter()
        .map(|v| {
            (0..intr.width)
                .map(|u| {
                    let d_cam = intr.ray_direction(u as f64, v as f64);
                    let dir = camera_pose.apply_vector(&d_cam);
                    let (t, hit) = cast(model, &origin, &dir);
                    match t {
                        Some(t) => ((t * d_cam.z) as f32, hit),
                        None => (0.0, None),
                    }
                })
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(intr.width * intr.height);
    let mut instances = Vec::with_capacity(intr.width * intr.height);
    for row in rows {
        for (d, i) in row {
            data.push(d);
            instances.push(i);
        }
    }
    RenderOutput {
        depth: DepthImage::new(intr.width, intr.height, data).expect("sized to the intrinsics"),
        instances,
    }
}

fn cast(model: &SceneModel, origin: &Vec3, dir: &Vec3) -> (Option<f64>, Option<u32>) {
    let mut best = if dir.z < 0.0 && origin.z > TABLE_Z {
        Some((origin.z - TABLE_Z) / -dir.z)
    } else {
        None
    };
    let mut hit = None;
    let inv_dir = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
    for i in 0..model.len() {
        let limit = best.unwrap_or(f64::INFINITY);
        if model.world_box(i).ray_entry(origin, &inv_dir, limit).is_none() {
            continue;
        }
        let inv = model.inverse_pose(i);
        let o = inv.apply_point(origin);
        let d = inv.apply_vector(dir);
        let index = model.model(i).surface().mesh_index();
        let h = match best {
            Some(b) => index.ray_cast_within(&o, &d, b),
            None => index.ray_cast(&o, &d),
        };
        if let Some(h) = h {
            if best.map_or(true, |b| h.t < b) {
                best = Some(h.t);
                hit = Some(i as u32);
            }
        }
    }
    (best, hit)
}
