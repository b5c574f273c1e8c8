use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::io::grid::{read_grid, write_grid};

/// Row-major per-pixel scores clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Heatmap {
    /// Values are clamped into `[0, 1]`; NaN is rejected.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("heatmap dimensions must be positive".into()));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} heatmap",
                data.len()
            )));
        }
        if data.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("heatmap contains NaN".into()));
        }
        Ok(Heatmap {
            width,
            height,
            data: data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Heatmap {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn for_camera(intr: &CameraIntrinsics) -> Self {
        Heatmap::zeros(intr.width, intr.height)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, u: usize, v: usize) -> f32 {
        self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: f32) {
        self.data[v * self.width + u] = value.clamp(0.0, 1.0);
    }

    /// Raises the pixel to `value` if larger.
    pub fn raise(&mut self, u: usize, v: usize, value: f32) {
        let cell = &mut self.data[v * self.width + u];
        *cell = cell.max(value.clamp(0.0, 1.0));
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(0.0, f32::max)
    }

    pub fn matches(&self, intr: &CameraIntrinsics) -> bool {
        self.width == intr.width && self.height == intr.height
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_grid(path, self.width, self.height, &self.data)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (w, h, data) = read_grid(path)?;
        Heatmap::new(w, h, data).map_err(|e| Error::parse(path, 0, e.to_string()))
    }
}

/// Pixel-wise product.
pub fn combine_heatmaps(seal: &Heatmap, center: &Heatmap) -> Result<Heatmap> {
    if seal.width != center.width || seal.height != center.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            seal.width, seal.height, center.width, center.height
        )));
    }
    Ok(Heatmap {
        width: seal.width,
        height: seal.height,
        data: seal
            .data
            .par_iter()
            .zip(&center.data)
            .map(|(a, b)| a * b)
            .collect(),
    })
}
