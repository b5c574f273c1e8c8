//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use suctionbench::geometry::Mat3;
use suctionbench::scene::{
    annotate_object, make_primitive, CollisionParams, ObjectAnnotation, ObjectInstance,
    ObjectModel, ObjectRegistry, Primitive, Scene, SceneModel,
};
use suctionbench::{
    CameraIntrinsics, CupModel, RigidTransform, SealParams, TriangleMesh, Vec3,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let axis = unit_vector(rng);
    *RigidTransform::from_axis_angle(&axis, rng.gen_range(0.0..2.0 * PI), Vec3::zeros()).rotation()
}

pub fn random_transform(rng: &mut impl Rng, reach: f64) -> RigidTransform {
    let axis = unit_vector(rng);
    let t = Vec3::new(
        rng.gen_range(-reach..reach),
        rng.gen_range(-reach..reach),
        rng.gen_range(-reach..reach),
    );
    RigidTransform::from_axis_angle(&axis, rng.gen_range(0.0..2.0 * PI), t)
}

pub fn cuboid(x: f64, y: f64, z: f64) -> TriangleMesh {
    make_primitive(&Primitive::Cuboid { x, y, z }).unwrap()
}

pub fn sphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    make_primitive(&Primitive::Sphere { radius, subdivisions }).unwrap()
}

/// Prism over the L-shaped polygon `[0,2]x[0,1] U [0,1]x[0,2]`, scaled by `s`
/// in x and y and extruded to height `h`.
pub fn l_solid(s: f64, h: f64) -> TriangleMesh {
    let outline = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
    let mut vertices = Vec::new();
    for &(x, y) in &outline {
        vertices.push(Vec3::new(x * s, y * s, 0.0));
    }
    for &(x, y) in &outline {
        vertices.push(Vec3::new(x * s, y * s, h));
    }
    let mut faces = Vec::new();
    // fan from the origin corner, which sees every other vertex
    for i in 1..5u32 {
        faces.push([0, i + 1, i]);
        faces.push([6, 6 + i, 6 + i + 1]);
    }
    for i in 0..6u32 {
        let j = (i + 1) % 6;
        faces.push([i, j, 6 + j]);
        faces.push([i, 6 + j, 6 + i]);
    }
    TriangleMesh::new(vertices, faces).unwrap()
}

/// Membership oracle for [`l_solid`].
pub fn in_l_solid(p: &Vec3, s: f64, h: f64) -> bool {
    let (x, y) = (p.x / s, p.y / s);
    (0.0..=h).contains(&p.z)
        && ((0.0..=2.0).contains(&x) && (0.0..=1.0).contains(&y)
            || (0.0..=1.0).contains(&x) && (0.0..=2.0).contains(&y))
}

pub fn camera() -> CameraIntrinsics {
    CameraIntrinsics::new(600.0, 600.0, 319.5, 239.5, 640, 480).unwrap()
}

/// Camera at height `z` above the origin looking straight down (camera -> world).
pub fn overhead_camera(z: f64) -> RigidTransform {
    let r = Mat3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    RigidTransform::new(r, Vec3::new(0.0, 0.0, z)).unwrap()
}

/// Resting pose: translation `(x, y)`, yaw about z, and the mesh lifted so
/// its lowest point touches the table.
pub fn resting(mesh: &TriangleMesh, x: f64, y: f64, yaw: f64) -> RigidTransform {
    let lift = -mesh.bounding_box().min.z;
    RigidTransform::from_axis_angle(&Vec3::z(), yaw, Vec3::new(x, y, lift))
}

pub struct Fixture {
    pub model: SceneModel,
    pub registry: ObjectRegistry,
    pub annotations: BTreeMap<u32, ObjectAnnotation>,
}

/// Builds models, annotates objects and places each at its resting pose.
pub fn build_scene(objects: &[(Primitive, f64, f64, f64)], voxel: f64) -> Fixture {
    let seal = SealParams::default();
    let collision = CollisionParams::default();
    let cup = CupModel::default();
    let mut registry = ObjectRegistry::new();
    let mut annotations = BTreeMap::new();
    let mut instances = Vec::new();
    for (id, (prim, x, y, yaw)) in objects.iter().enumerate() {
        let id = id as u32;
        let mesh = make_primitive(prim).unwrap();
        let pose = resting(&mesh, *x, *y, *yaw);
        let model = ObjectModel::new(id, mesh, &seal, &collision).unwrap();
        annotations.insert(id, annotate_object(model.surface(), voxel, &cup, &seal).unwrap());
        registry.insert(id, Arc::new(model));
        instances.push(ObjectInstance { object_id: id, pose });
    }
    let scene = Scene::new(instances, vec![overhead_camera(0.7)], Vec3::new(0.0, 0.0, -1.0)).unwrap();
    Fixture {
        model: SceneModel::new(scene, &registry).unwrap(),
        registry,
        annotations,
    }
}

/// Five smooth primitives spread over the table.
pub fn smooth_objects() -> Vec<(Primitive, f64, f64, f64)> {
    vec![
        (Primitive::Cuboid { x: 0.10, y: 0.08, z: 0.05 }, -0.12, -0.08, 0.0),
        (Primitive::Cylinder { radius: 0.04, height: 0.08, segments: 64 }, 0.10, -0.10, 0.0),
        (Primitive::Sphere { radius: 0.045, subdivisions: 4 }, 0.0, 0.10, 0.0),
        (Primitive::Cuboid { x: 0.12, y: 0.06, z: 0.03 }, 0.13, 0.08, 0.5),
        (
            Primitive::BumpyPlate {
                x: 0.10,
                y: 0.10,
                thickness: 0.01,
                amplitude: 0.0,
                wavelength: 0.02,
                cells: 1,
            },
            -0.14,
            0.12,
            0.0,
        ),
    ]
}

/// The same layout built from strongly corrugated plates.
pub fn bumpy_objects() -> Vec<(Primitive, f64, f64, f64)> {
    let plate = |x: f64, y: f64| Primitive::BumpyPlate {
        x,
        y,
        thickness: 0.02,
        amplitude: 0.004,
        wavelength: 0.016,
        cells: 48,
    };
    vec![
        (plate(0.10, 0.08), -0.12, -0.08, 0.0),
        (plate(0.08, 0.08), 0.10, -0.10, 0.0),
        (plate(0.09, 0.09), 0.0, 0.10, 0.0),
        (plate(0.12, 0.06), 0.13, 0.08, 0.5),
        (plate(0.10, 0.10), -0.14, 0.12, 0.0),
    ]
}
