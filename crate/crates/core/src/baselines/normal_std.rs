use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::heatmap::Heatmap;
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthImage, Vec3};

/// Spread below this is treated as exact zero, absorbing rounding noise from
/// back-projection.
const SIGMA_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalStdParams {
    /// Half side of the square patch, in pixels.
    pub patch_radius: usize,
}

impl Default for NormalStdParams {
    fn default() -> Self {
        NormalStdParams { patch_radius: 5 }
    }
}

impl NormalStdParams {
    pub fn validate(&self) -> Result<()> {
        if self.patch_radius == 0 {
            return Err(Error::InvalidInput("patch radius must be at least 1 pixel".into()));
        }
        Ok(())
    }
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelRect {
    pub fn full(width: usize, height: usize) -> Self {
        PixelRect {
            x0: 0,
            y0: 0,
            x1: width,
            y1: height,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        u >= self.x0 && u < self.x1 && v >= self.y0 && v < self.y1
    }
}

/// Camera-frame normals from the organized back-projected cloud, oriented
/// toward the camera. Central differences, falling back to one-sided ones at
/// invalid neighbors; `None` where no tangent pair exists.
pub fn pixel_normals(depth: &DepthImage, intr: &CameraIntrinsics) -> Vec<Option<Vec3>> {
    let (w, h) = (depth.width(), depth.height());
    let point = |u: usize, v: usize| -> Option<Vec3> {
        depth
            .is_valid(u, v)
            .then(|| intr.unproject(u as f64, v as f64, depth.get(u, v) as f64))
    };
    (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (u, v) = (i % w, i / w);
            let p = point(u, v)?;
            let tangent = |a: Option<Vec3>, b: Option<Vec3>| match (a, b) {
                (Some(a), Some(b)) => Some(b - a),
                (None, Some(b)) => Some(b - p),
                (Some(a), None) => Some(p - a),
                (None, None) => None,
            };
            let left = if u > 0 { point(u - 1, v) } else { None };
            let right = if u + 1 < w { point(u + 1, v) } else { None };
            let up = if v > 0 { point(u, v - 1) } else { None };
            let down = if v + 1 < h { point(u, v + 1) } else { None };
            let n = tangent(left, right)?.cross(&tangent(up, down)?);
            let len = n.norm();
            if !(len > 0.0) {
                return None;
            }
            let n = n / len;
            Some(if n.dot(&p) > 0.0 { -n } else { n })
        })
        .collect()
}

/// Scores each pixel by `1 - sigma / max sigma`, where sigma is the spread of
/// normal components over the patch; 0 outside `bbox` and at invalid depth.
pub fn normal_std_heatmap(
    depth: &DepthImage,
    intr: &CameraIntrinsics,
    bbox: &PixelRect,
    params: &NormalStdParams,
) -> Result<Heatmap> {
    params.validate()?;
    if !depth.matches(intr) {
        return Err(Error::DimensionMismatch("depth image does not match the intrinsics".into()));
    }
    let (w, h) = (depth.width(), depth.height());
    if bbox.is_empty() || bbox.x1 > w || bbox.y1 > h {
        return Err(Error::InvalidInput(format!("bounding box {bbox:?} empty or outside the image")));
    }
    let any_valid = (bbox.y0..bbox.y1).any(|v| (bbox.x0..bbox.x1).any(|u| depth.is_valid(u, v)));
    if !any_valid {
        return Err(Error::InvalidInput("no valid depth inside the bounding box".into()));
    }
    let normals = pixel_normals(depth, intr);
    let r = params.patch_radius;
    let sigma: Vec<Option<f64>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            normals[i]?;
            let (u, v) = (i % w, i / w);
            let mut patch = Vec::with_capacity((2 * r + 1) * (2 * r + 1));
            for y in v.saturating_sub(r)..(v + r + 1).min(h) {
                for x in u.saturating_sub(r)..(u + r + 1).min(w) {
                    if let Some(n) = normals[y * w + x] {
                        patch.push(n);
                    }
                }
            }
            Some(pooled_std(&patch))
        })
        .collect();
    let max = sigma.iter().flatten().copied().fold(0.0, f64::max);
    let mut map = Heatmap::for_camera(intr);
    for v in bbox.y0..bbox.y1 {
        for u in bbox.x0..bbox.x1 {
            if let Some(s) = sigma[v * w + u] {
                let normalized = if max > 0.0 { s / max } else { 0.0 };
                map.set(u, v, (1.0 - normalized) as f32);
            }
        }
    }
    Ok(map)
}

/// Square root of the mean per-component variance.
fn pooled_std(normals: &[Vec3]) -> f64 {
    let n = normals.len() as f64;
    let mean = normals.iter().sum::<Vec3>() / n;
    let var = normals.iter().map(|x| (x - mean).norm_squared()).sum::<f64>() / (3.0 * n);
    let s = var.sqrt();
    if s < SIGMA_FLOOR {
        0.0
    } else {
        s
    }
}
