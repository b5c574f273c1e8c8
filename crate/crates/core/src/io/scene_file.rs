//! Scene description file (TOML). Lengths are meters; poses are 12 numbers,
//! the row-major `[R | t]` of an object -> world or camera -> world transform.
//!
//! ```toml
//! gravity = [0.0, 0.0, -1.0]
//!
//! [camera]
//! fx = 600.0
//! fy = 600.0
//! cx = 319.5
//! cy = 239.5
//! width = 640
//! height = 480
//!
//! [[cameras]]
//! pose = [1, 0, 0, 0,  0, -1, 0, 0,  0, 0, -1, 0.6]
//!
//! [[objects]]
//! id = 0
//! mesh = "meshes/mug.obj"
//! scale = 0.001
//! annotation = "annotations/mug.txt"
//!
//! [[objects]]
//! id = 1
//! primitive = { kind = "cuboid", x = 0.1, y = 0.06, z = 0.04 }
//!
//! [[instances]]
//! object = 0
//! pose = [1, 0, 0, 0.1,  0, 1, 0, 0,  0, 0, 1, 0.05]
//! ```
//!
//! Relative paths resolve against the directory holding the scene file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::read_text;
use crate::error::{Error, Result};
use crate::geometry::{obj, CameraIntrinsics, RigidTransform, TriangleMesh, Vec3};
use crate::scene::{make_primitive, ObjectInstance, Primitive, Scene};

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -1.0]
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub id: u32,
    /// OBJ path; exclusive with `primitive`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primitive: Option<Primitive>,
    /// Multiplier applied to OBJ coordinates.
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Object annotation file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceEntry {
    pub object: u32,
    pub pose: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraEntry {
    pose: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default = "default_gravity")]
    gravity: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    camera: Option<CameraIntrinsics>,
    #[serde(default)]
    cameras: Vec<CameraEntry>,
    #[serde(default)]
    objects: Vec<ObjectEntry>,
    #[serde(default)]
    instances: Vec<InstanceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub base_dir: PathBuf,
    pub gravity: Vec3,
    pub camera: Option<CameraIntrinsics>,
    pub cameras: Vec<RigidTransform>,
    pub objects: Vec<ObjectEntry>,
    pub instances: Vec<InstanceEntry>,
}

impl SceneConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::InvalidInput(m) => Error::parse(path, 0, m),
            other => other,
        })
    }

    pub fn from_toml(text: &str, base_dir: PathBuf) -> Result<Self> {
        let file: SceneFile =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("scene file: {e}")))?;
        let config = SceneConfig {
            base_dir,
            gravity: Vec3::from(file.gravity),
            camera: file.camera,
            cameras: file.cameras.into_iter().map(|c| c.pose).collect(),
            objects: file.objects,
            instances: file.instances,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        let file = SceneFile {
            gravity: self.gravity.into(),
            camera: self.camera,
            cameras: self.cameras.iter().map(|&pose| CameraEntry { pose }).collect(),
            objects: self.objects.clone(),
            instances: self.instances.clone(),
        };
        toml::to_string(&file).expect("scene serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gravity.norm() > 0.0 && self.gravity.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidInput("gravity must be a nonzero vector".into()));
        }
        if let Some(c) = &self.camera {
            c.validate()?;
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                return Err(Error::InvalidInput(format!("duplicate object id {}", o.id)));
            }
            if o.mesh.is_some() == o.primitive.is_some() {
                return Err(Error::InvalidInput(format!(
                    "object {} needs exactly one of `mesh` or `primitive`",
                    o.id
                )));
            }
            if !(o.scale > 0.0 && o.scale.is_finite()) {
                return Err(Error::InvalidInput(format!("object {} scale must be positive", o.id)));
            }
        }
        for inst in &self.instances {
            if !ids.contains(&inst.object) {
                return Err(Error::InvalidInput(format!(
                    "instance references unknown object id {}",
                    inst.object
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.base_dir.join(relative)
    }

    pub fn scene(&self) -> Result<Scene> {
        Scene::new(
            self.instances
                .iter()
                .map(|i| ObjectInstance {
                    object_id: i.object,
                    pose: i.pose,
                })
                .collect(),
            self.cameras.clone(),
            self.gravity,
        )
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        self.camera
            .ok_or_else(|| Error::InvalidInput("scene file has no [camera] intrinsics".into()))
    }

    pub fn object(&self, id: u32) -> Result<&ObjectEntry> {
        self.objects
            .iter()
            .find(|o| o.id == id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown object id {id}")))
    }

    pub fn load_mesh(&self, entry: &ObjectEntry) -> Result<TriangleMesh> {
        match (&entry.mesh, &entry.primitive) {
            (Some(p), None) => obj::load_mesh(self.resolve(p), entry.scale),
            (None, Some(p)) => make_primitive(p),
            _ => Err(Error::InvalidInput(format!("object {} has no geometry", entry.id))),
        }
    }

    /// Meshes of the objects referenced by at least one instance.
    pub fn load_used_meshes(&self) -> Result<BTreeMap<u32, TriangleMesh>> {
        let used: BTreeSet<u32> = self.instances.iter().map(|i| i.object).collect();
        used.into_iter()
            .map(|id| Ok((id, self.load_mesh(self.object(id)?)?)))
            .collect()
    }

    pub fn annotation_path(&self, id: u32) -> Result<PathBuf> {
        let entry = self.object(id)?;
        entry
            .annotation
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::InvalidInput(format!("object {id} has no annotation path")))
    }
}
