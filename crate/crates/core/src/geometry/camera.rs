use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PointCloud, Vec3};
use crate::error::{Error, Result};
use crate::io::grid;

/// Pinhole intrinsics. Camera frame: x right, y down, z forward; pixel `(u, v)`
/// is column `u`, row `v`, with its center at integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let intr = CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        intr.validate()?;
        Ok(intr)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::InvalidInput("focal lengths must be positive".into()));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy)
        {
            return Err(Error::InvalidInput(
                "principal point must lie inside the image".into(),
            ));
        }
        Ok(())
    }

    /// Pixel coordinates of a camera-frame point, if it is in front of the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        (p.z > 0.0).then(|| (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    /// Camera-frame point at depth `d` along pixel `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, d: f64) -> Vec3 {
        Vec3::new((u - self.cx) * d / self.fx, (v - self.cy) * d / self.fy, d)
    }

    /// Unit ray direction through pixel `(u, v)`.
    pub fn ray_direction(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0).normalize()
    }

    pub fn contains_pixel(&self, u: i64, v: i64) -> bool {
        u >= 0 && v >= 0 && (u as usize) < self.width && (v as usize) < self.height
    }
}

/// Row-major depth grid in meters; 0 marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} depth values for a {width}x{height} image",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidInput(format!(
                "depth value {} at index {i} is negative or not finite",
                data[i]
            )));
        }
        Ok(DepthImage {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        DepthImage {
            width,
            height,
            data: vec![0.0; width * height],
        }
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

    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        u < self.width && v < self.height && self.get(u, v) > 0.0
    }

    pub fn set(&mut self, u: usize, v: usize, d: f32) {
        self.data[v * self.width + u] = d;
    }

    pub fn matches(&self, intr: &CameraIntrinsics) -> bool {
        self.width == intr.width && self.height == intr.height
    }

    /// Back-projects pixel `(u, v)` into the camera frame.
    pub fn backproject(&self, intr: &CameraIntrinsics, u: usize, v: usize) -> Result<Vec3> {
        if !self.is_valid(u, v) {
            return Err(Error::InvalidDepth { u, v });
        }
        Ok(intr.unproject(u as f64, v as f64, self.get(u, v) as f64))
    }

    /// Camera-frame cloud of all valid pixels, with their `(u, v)` coordinates.
    pub fn to_cloud(&self, intr: &CameraIntrinsics) -> (PointCloud, Vec<(usize, usize)>) {
        let mut points = Vec::new();
        let mut pixels = Vec::new();
        for v in 0..self.height {
            for u in 0..self.width {
                if let Ok(p) = self.backproject(intr, u, v) {
                    points.push(p);
                    pixels.push((u, v));
                }
            }
        }
        (PointCloud::new(points), pixels)
    }

    /// Adds `offset` meters to every valid pixel.
    pub fn offset(&self, offset: f32) -> DepthImage {
        DepthImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&d| if d > 0.0 { d + offset } else { 0.0 })
                .collect(),
        }
    }

    /// Binary grid file: little-endian u32 width, u32 height, then f32 meters row-major.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        grid::write_grid(path.as_ref(), self.width, self.height, &self.data)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (w, h, data) = grid::read_grid(path.as_ref())?;
        DepthImage::new(w, h, data)
    }

    /// 16-bit grayscale PNG in whole millimeters (values above 65.535 m saturate).
    pub fn save_png_mm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mm: Vec<u16> = self
            .data
            .iter()
            .map(|&d| (d as f64 * 1000.0).round().clamp(0.0, u16::MAX as f64) as u16)
            .collect();
        grid::write_png16(path.as_ref(), self.width, self.height, &mm)
    }

    pub fn load_png_mm(path: impl AsRef<Path>) -> Result<Self> {
        let (w, h, mm) = grid::read_png16(path.as_ref())?;
        DepthImage::new(w, h, mm.into_iter().map(|m| m as f32 / 1000.0).collect())
    }
}
