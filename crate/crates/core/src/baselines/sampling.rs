use serde::{Deserialize, Serialize};

use super::heatmap::Heatmap;
use crate::error::{Error, Result};
use crate::eval::Prediction;
use crate::geometry::{estimate_normal_at, CameraIntrinsics, DepthImage, PointIndex, Vec3};
use crate::pose::SuctionPose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Grid cell side, in pixels.
    pub cell: usize,
    pub top_n: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            cell: 16,
            top_n: 1024,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cell == 0 || self.top_n == 0 {
            return Err(Error::InvalidInput("sampler cell and top_n must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledPixel {
    pub u: usize,
    pub v: usize,
    pub score: f32,
}

/// Best pixel of every grid cell (ties to the lowest row-major index), ranked
/// by score with ties in cell order. Cells whose maximum is 0 are skipped.
pub fn grid_sample(map: &Heatmap, config: &SamplerConfig) -> Vec<SampledPixel> {
    let c = config.cell.max(1);
    let (w, h) = (map.width(), map.height());
    let mut cells = Vec::new();
    for cy in (0..h).step_by(c) {
        for cx in (0..w).step_by(c) {
            let mut best: Option<SampledPixel> = None;
            for v in cy..(cy + c).min(h) {
                for u in cx..(cx + c).min(w) {
                    let s = map.get(u, v);
                    if best.map_or(true, |b| s > b.score) {
                        best = Some(SampledPixel { u, v, score: s });
                    }
                }
            }
            if let Some(b) = best.filter(|b| b.score > 0.0) {
                cells.push(b);
            }
        }
    }
    cells.sort_by(|a, b| b.score.total_cmp(&a.score));
    cells.truncate(config.top_n);
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suctions {
    /// Camera-frame predictions, in input order.
    pub predictions: Vec<Prediction>,
    /// Pixels dropped for invalid depth or an undefined normal.
    pub skipped: usize,
}

/// Back-projects sampled pixels into camera-frame suctions whose direction is
/// the local surface normal of `cloud` (camera frame), turned toward the camera.
pub fn pixels_to_suctions(
    pixels: &[SampledPixel],
    depth: &DepthImage,
    intr: &CameraIntrinsics,
    cloud: &PointIndex,
    neighbors: usize,
) -> Suctions {
    let mut out = Suctions {
        predictions: Vec::with_capacity(pixels.len()),
        skipped: 0,
    };
    let eye = Vec3::zeros();
    for px in pixels {
        let Ok(p) = depth.backproject(intr, px.u, px.v) else {
            out.skipped += 1;
            continue;
        };
        let pose = estimate_normal_at(cloud, &p, neighbors, &eye)
            .and_then(|n| SuctionPose::from_unnormalized(p, n).ok());
        match pose {
            Some(pose) => out.predictions.push(Prediction {
                pose,
                confidence: px.score as f64,
            }),
            None => out.skipped += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_nonzero_pixel_ranks_first() {
        let mut map = Heatmap::zeros(40, 30);
        map.set(17, 21, 0.4);
        let out = grid_sample(&map, &SamplerConfig::default());
        assert_eq!(out, vec![SampledPixel { u: 17, v: 21, score: 0.4 }]);
    }

    #[test]
    fn ties_take_lowest_index() {
        let map = Heatmap::new(4, 4, vec![0.5; 16]).unwrap();
        let out = grid_sample(&map, &SamplerConfig { cell: 2, top_n: 10 });
        let firsts: Vec<(usize, usize)> = out.iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(firsts, vec![(0, 0), (2, 0), (0, 2), (2, 2)]);
    }

    #[test]
    fn top_n_truncates() {
        let map = Heatmap::new(4, 4, (0..16).map(|i| i as f32 / 16.0 + 0.01).collect()).unwrap();
        let out = grid_sample(&map, &SamplerConfig { cell: 1, top_n: 3 });
        assert_eq!(out.len(), 3);
        assert_eq!((out[0].u, out[0].v), (3, 3));
    }
}
