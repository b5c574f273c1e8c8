use super::heatmap::Heatmap;
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, RigidTransform, Vec3};
use crate::scene::SceneAnnotation;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelHeatmaps {
    pub seal: Heatmap,
    pub center: Heatmap,
    /// Annotated points behind the camera or outside the image.
    pub skipped: usize,
}

/// Rasterizes scene labels seen from `camera_pose` (camera -> world).
///
/// Every record splats a Gaussian of amplitude `score` (0 for colliding
/// records when `penalize_collisions`) centered on its rounded pixel; every
/// instance's center of mass splats amplitude 1 into the center map. Splats
/// combine by per-pixel maximum. A sigma of 0 marks the single pixel.
pub fn render_label_heatmaps(
    annotation: &SceneAnnotation,
    intr: &CameraIntrinsics,
    camera_pose: &RigidTransform,
    sigma: f64,
    center_sigma: f64,
    penalize_collisions: bool,
) -> Result<LabelHeatmaps> {
    if annotation.records.is_empty() {
        return Err(Error::InvalidInput("scene annotation has no records".into()));
    }
    if !(sigma >= 0.0 && center_sigma >= 0.0) {
        return Err(Error::InvalidInput("splat sigma must be non-negative".into()));
    }
    let world_to_cam = camera_pose.inverse();
    let mut seal = Heatmap::for_camera(intr);
    let mut center = Heatmap::for_camera(intr);
    let mut skipped = 0;
    for r in &annotation.records {
        let amplitude = if penalize_collisions && !r.collision_free {
            0.0
        } else {
            r.score
        };
        if !splat(&mut seal, intr, &world_to_cam.apply_point(r.pose.point()), amplitude, sigma) {
            skipped += 1;
        }
    }
    for (_, com) in &annotation.coms {
        splat(&mut center, intr, &world_to_cam.apply_point(com), 1.0, center_sigma);
    }
    Ok(LabelHeatmaps {
        seal,
        center,
        skipped,
    })
}

/// Returns false when the point does not land in the image.
fn splat(map: &mut Heatmap, intr: &CameraIntrinsics, p: &Vec3, amplitude: f64, sigma: f64) -> bool {
    let Some((u, v)) = intr.project(p) else {
        return false;
    };
    let (cu, cv) = (u.round() as i64, v.round() as i64);
    if !intr.contains_pixel(cu, cv) {
        return false;
    }
    if sigma == 0.0 {
        map.raise(cu as usize, cv as usize, amplitude as f32);
        return true;
    }
    let reach = (3.0 * sigma).ceil() as i64;
    let two_s2 = 2.0 * sigma * sigma;
    for y in cv - reach..=cv + reach {
        for x in cu - reach..=cu + reach {
            if !intr.contains_pixel(x, y) {
                continue;
            }
            let d2 = ((x - cu).pow(2) + (y - cv).pow(2)) as f64;
            map.raise(x as usize, y as usize, (amplitude * (-d2 / two_s2).exp()) as f32);
        }
    }
    true
}
