use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::read_text;
use crate::baselines::{NormalStdParams, SamplerConfig};
use crate::error::{Error, Result};
use crate::eval::{EvalConfig, ScoringParams};
use crate::geometry::Vec3;
use crate::scene::CollisionParams;
use crate::seal::{CupModel, SealParams};
use crate::wrench::WrenchParams;

const MM: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CupConfig {
    pub radius_mm: f64,
    pub vertices: usize,
}

impl Default for CupConfig {
    fn default() -> Self {
        CupConfig {
            radius_mm: 10.0,
            vertices: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SealConfig {
    /// Plane-fit decay coefficient, 1/m^2.
    pub fit_coefficient: f64,
    /// Plane-fit neighborhood radius in cup radii.
    pub neighborhood_factor: f64,
    /// Ray start height above the contact point in cup radii.
    pub standoff_factor: f64,
    /// Ray travel beyond which a ring vertex misses, in cup radii.
    pub max_travel_factor: f64,
    pub surface_spacing_mm: f64,
    /// Switches to pass/fail deformation with this change-ratio limit.
    pub binary_threshold: Option<f64>,
}

impl Default for SealConfig {
    fn default() -> Self {
        let p = SealParams::default();
        SealConfig {
            fit_coefficient: p.fit_coefficient,
            neighborhood_factor: p.neighborhood_factor,
            standoff_factor: p.standoff_factor,
            max_travel_factor: p.max_travel_factor,
            surface_spacing_mm: p.surface_spacing / MM,
            binary_threshold: p.binary_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WrenchConfig {
    /// Cup material constant, N.
    pub k: f64,
    pub mass_kg: f64,
    /// Gravitational acceleration, m/s^2. The direction comes from the scene.
    pub g: f64,
}

impl Default for WrenchConfig {
    fn default() -> Self {
        let p = WrenchParams::default();
        WrenchConfig {
            k: p.k,
            mass_kg: p.mass,
            g: p.g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionConfig {
    pub radius_mm: f64,
    pub height_mm: f64,
    pub offset_mm: f64,
    pub self_exclusion_mm: f64,
    pub cloud_spacing_mm: f64,
    pub check_table: bool,
}

impl Default for CollisionConfig {
    fn default() -> Self {
        let p = CollisionParams::default();
        CollisionConfig {
            radius_mm: p.radius / MM,
            height_mm: p.height / MM,
            offset_mm: p.offset / MM,
            self_exclusion_mm: p.self_exclusion / MM,
            cloud_spacing_mm: p.cloud_spacing / MM,
            check_table: p.check_table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    pub voxel_mm: f64,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        AnnotationConfig { voxel_mm: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfigFile {
    pub thresholds: Vec<f64>,
    pub top_k: usize,
    pub per_object_cap: usize,
    pub nms_radius_mm: f64,
    pub association_distance_mm: f64,
    pub penalize_collisions: bool,
}

impl Default for EvalConfigFile {
    fn default() -> Self {
        let c = EvalConfig::default();
        EvalConfigFile {
            thresholds: c.thresholds,
            top_k: c.top_k,
            per_object_cap: c.per_object_cap,
            nms_radius_mm: c.nms_radius / MM,
            association_distance_mm: c.association_distance / MM,
            penalize_collisions: c.penalize_collisions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub patch_radius_px: usize,
    pub cell_px: usize,
    pub top_n: usize,
    /// Neighbors used for the direction of each sampled suction.
    pub normal_neighbors: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        let s = SamplerConfig::default();
        BaselineConfig {
            patch_radius_px: NormalStdParams::default().patch_radius,
            cell_px: s.cell,
            top_n: s.top_n,
            normal_neighbors: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    pub sigma_px: f64,
    pub center_sigma_px: f64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            sigma_px: 4.0,
            center_sigma_px: 12.0,
        }
    }
}

/// Every tunable constant of the toolkit. Lengths are millimeters in the file
/// and meters once converted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    pub output_dir: Option<String>,
    pub cup: CupConfig,
    pub seal: SealConfig,
    pub wrench: WrenchConfig,
    pub collision: CollisionConfig,
    pub annotation: AnnotationConfig,
    pub eval: EvalConfigFile,
    pub baseline: BaselineConfig,
    pub labels: LabelConfig,
}

impl ToolkitConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidInput(m) => Error::parse(path, 0, m),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ToolkitConfig =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Converts every block and runs the owning module's checks.
    pub fn validate(&self) -> Result<()> {
        self.cup()?;
        self.seal_params()?;
        self.wrench_params()?;
        self.collision_params()?;
        self.eval_config()?;
        self.voxel()?;
        self.normal_std_params()?;
        self.sampler_config()?;
        if self.baseline.normal_neighbors < 3 {
            return Err(Error::InvalidInput("baseline.normal_neighbors must be at least 3".into()));
        }
        if !(self.labels.sigma_px >= 0.0 && self.labels.center_sigma_px >= 0.0) {
            return Err(Error::InvalidInput("label sigmas must be non-negative".into()));
        }
        Ok(())
    }

    pub fn cup(&self) -> Result<CupModel> {
        CupModel::new(self.cup.radius_mm * MM, self.cup.vertices)
    }

    pub fn seal_params(&self) -> Result<SealParams> {
        let p = SealParams {
            fit_coefficient: self.seal.fit_coefficient,
            neighborhood_factor: self.seal.neighborhood_factor,
            standoff_factor: self.seal.standoff_factor,
            max_travel_factor: self.seal.max_travel_factor,
            surface_spacing: self.seal.surface_spacing_mm * MM,
            binary_threshold: self.seal.binary_threshold,
        };
        p.validate()?;
        Ok(p)
    }

    /// Wrench parameters with the default gravity direction; scenes override it.
    pub fn wrench_params(&self) -> Result<WrenchParams> {
        let p = WrenchParams {
            radius: self.cup.radius_mm * MM,
            k: self.wrench.k,
            mass: self.wrench.mass_kg,
            g: self.wrench.g,
            gravity: Vec3::new(0.0, 0.0, -1.0),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn collision_params(&self) -> Result<CollisionParams> {
        let c = &self.collision;
        let p = CollisionParams {
            radius: c.radius_mm * MM,
            height: c.height_mm * MM,
            offset: c.offset_mm * MM,
            self_exclusion: c.self_exclusion_mm * MM,
            cloud_spacing: c.cloud_spacing_mm * MM,
            check_table: c.check_table,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn eval_config(&self) -> Result<EvalConfig> {
        let e = &self.eval;
        let c = EvalConfig {
            thresholds: e.thresholds.clone(),
            top_k: e.top_k,
            per_object_cap: e.per_object_cap,
            nms_radius: e.nms_radius_mm * MM,
            association_distance: e.association_distance_mm * MM,
            penalize_collisions: e.penalize_collisions,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn scoring_params(&self) -> Result<ScoringParams> {
        Ok(ScoringParams {
            cup: self.cup()?,
            seal: self.seal_params()?,
            wrench: self.wrench_params()?,
            collision: self.collision_params()?,
        })
    }

    /// Voxel side length in meters.
    pub fn voxel(&self) -> Result<f64> {
        let v = self.annotation.voxel_mm * MM;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput("annotation.voxel_mm must be positive".into()));
        }
        Ok(v)
    }

    pub fn normal_std_params(&self) -> Result<NormalStdParams> {
        let p = NormalStdParams {
            patch_radius: self.baseline.patch_radius_px,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        let s = SamplerConfig {
            cell: self.baseline.cell_px,
            top_n: self.baseline.top_n,
        };
        s.validate()?;
        Ok(s)
    }

    /// Commented default configuration, as printed by `config init`.
    pub fn default_toml() -> String {
        let body = ToolkitConfig::default().to_toml();
        format!(
            "# Toolkit configuration. Lengths in millimeters unless noted.\n\
             # seal.fit_coefficient is in 1/m^2; wrench.k in newtons; pixel sizes in pixels.\n\
             # Set seal.binary_threshold (e.g. 0.1) for pass/fail deformation scoring.\n\n{body}"
        )
    }
}
