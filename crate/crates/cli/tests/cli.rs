use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CAMERA: &str = r#"
[camera]
fx = 300.0
fy = 300.0
cx = 79.5
cy = 59.5
width = 160
height = 120

[[cameras]]
pose = [1, 0, 0, 0,  0, -1, 0, 0,  0, 0, -1, 0.6]
"#;

const PLATE: &str = r#"
[[objects]]
id = 0
primitive = { kind = "cuboid", x = 0.1, y = 0.1, z = 0.02 }
"#;

const BUMPY: &str = r#"
[[objects]]
id = 1
primitive = { kind = "bumpy-plate", x = 0.1, y = 0.1, thickness = 0.02, amplitude = 0.004, wavelength = 0.02, cells = 40 }
"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_suctionbench"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn suctionbench")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn instance(object: u32, x: f64, y: f64) -> String {
    format!("\n[[instances]]\nobject = {object}\npose = [1, 0, 0, {x},  0, 1, 0, {y},  0, 0, 1, 0.01]\n")
}

/// Workspace with a coarse-voxel config so annotation stays quick.
struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        std::fs::write(dir.path().join("fast.toml"), "[annotation]\nvoxel_mm = 10.0\n").unwrap();
        Work { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path().join(name)).unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let mut all = vec!["--config", "fast.toml"];
        all.extend_from_slice(args);
        ok(self.path(), &all)
    }

    fn report(&self, dir: &str) -> Value {
        serde_json::from_str(&self.read(&format!("{dir}/report.json"))).unwrap()
    }
}

/// (seal, collision_free) per record of a scene annotation file.
fn records(text: &str) -> Vec<(f64, bool)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("com") && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[9].parse().unwrap(), f[12] == "1")
        })
        .collect()
}

fn data_rows(text: &str) -> usize {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("frame") && !l.trim().is_empty())
        .count()
}

#[test]
fn help_and_bad_arguments() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["evaluate"]).status.code(), Some(1));
}

#[test]
fn scene_annotation_is_byte_identical_across_runs() {
    let w = Work::new();
    w.write("scene.toml", &format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0)));
    for out in ["a.txt", "b.txt"] {
        w.ok(&["annotate-scene", "--scene", "scene.toml", "--out", out, "--annotate-missing"]);
    }
    let a = w.read("a.txt");
    assert!(!records(&a).is_empty());
    assert_eq!(a, w.read("b.txt"));
}

#[test]
fn empty_scene_exits_with_input_error() {
    let w = Work::new();
    w.write("scene.toml", CAMERA);
    let out = run(w.path(), &["annotate-scene", "--scene", "scene.toml", "--out", "a.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no object instances"), "{err}");
    assert!(!w.path().join("a.txt").exists());
}

#[test]
fn undeclared_annotation_requires_opt_in() {
    let w = Work::new();
    w.write("scene.toml", &format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0)));
    let out = run(w.path(), &["annotate-scene", "--scene", "scene.toml", "--out", "a.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--annotate-missing"));
}

#[test]
fn declared_object_annotation_is_used() {
    let w = Work::new();
    w.write("scene0.toml", &format!("{CAMERA}{PLATE}"));
    w.ok(&["annotate-object", "--scene", "scene0.toml", "--object", "0", "--out", "plate.txt"]);
    let declared = PLATE.replace("id = 0\n", "id = 0\nannotation = \"plate.txt\"\n");
    w.write("scene.toml", &format!("{CAMERA}{declared}{}", instance(0, 0.0, 0.0)));
    w.ok(&["annotate-scene", "--scene", "scene.toml", "--out", "declared.txt"]);
    w.write("fresh.toml", &format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0)));
    w.ok(&["annotate-scene", "--scene", "fresh.toml", "--out", "fresh.txt", "--annotate-missing"]);
    let seals = |t: &str| records(t).iter().map(|r| r.0).collect::<Vec<_>>();
    assert_eq!(seals(&w.read("declared.txt")), seals(&w.read("fresh.txt")));
}

#[test]
fn facing_sides_of_adjacent_objects_collide() {
    let w = Work::new();
    // 5 mm gap between two plates, well inside the cup cylinder.
    let scene = format!("{CAMERA}{PLATE}{}{}", instance(0, -0.0525, 0.0), instance(0, 0.0525, 0.0));
    w.write("scene.toml", &scene);
    w.ok(&["annotate-scene", "--scene", "scene.toml", "--out", "a.txt", "--annotate-missing"]);
    let text = w.read("a.txt");
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("com"))
        .map(|l| l.split_whitespace().map(|f| f.parse().unwrap()).collect())
        .collect();
    // Candidates on the inner side faces, pointing across the gap.
    let inner: Vec<&Vec<f64>> = rows
        .iter()
        .filter(|r| r[3].abs() < 0.004 && r[6].abs() > 0.9 && r[8].abs() < 0.1)
        .collect();
    assert!(!inner.is_empty());
    assert!(inner.iter().all(|r| r[12] == 0.0));
    // Top-face centers are free.
    assert!(rows.iter().any(|r| r[5] > 0.015 && r[8].abs() > 0.9 && r[12] == 1.0));
}

#[test]
fn empty_prediction_file_scores_zero() {
    let w = Work::new();
    w.write("scene.toml", &format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0)));
    w.write("pred.txt", "frame world\n");
    w.ok(&["evaluate", "--scene", "scene.toml", "--predictions", "pred.txt", "--out-dir", "rep"]);
    let r = w.report("rep");
    assert_eq!(r["aggregate"]["ap"].as_f64(), Some(0.0));
    assert_eq!(r["failed"].as_u64(), Some(0));
    assert!(w.read("rep/report.csv").lines().count() >= 3);
}

#[test]
fn missing_prediction_file_counts_as_failed_scene() {
    let w = Work::new();
    w.write("scene.toml", &format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0)));
    w.ok(&["evaluate", "--scene", "scene.toml", "--predictions", "nope.txt", "--out-dir", "rep"]);
    let r = w.report("rep");
    assert_eq!(r["failed"].as_u64(), Some(1));
    assert_eq!(r["aggregate"]["ap"].as_f64(), Some(0.0));
}

#[test]
fn baseline_predictions_round_trip_through_evaluate() {
    let w = Work::new();
    for (name, obj, id) in [("smooth.toml", PLATE, 0), ("bumpy.toml", BUMPY, 1)] {
        w.write(name, &format!("{CAMERA}{obj}{}", instance(id, 0.0, 0.0)));
        let stem = name.trim_end_matches(".toml");
        let pred = format!("{stem}.txt");
        w.ok(&["baseline-normal-std", "--scene", name, "--out", &pred]);
        let rows = data_rows(&w.read(&pred));
        assert!(rows > 0 && rows <= 100, "{rows} predictions");
        w.ok(&["evaluate", "--scene", name, "--predictions", &pred, "--out-dir", stem]);
        let r = w.report(stem);
        let ap = r["aggregate"]["ap"].as_f64().unwrap();
        let ap_s: Vec<f64> = r["aggregate"]["ap_s"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let mean = ap_s.iter().sum::<f64>() / ap_s.len() as f64;
        assert!((ap - mean).abs() < 1e-12);
    }
    let smooth = w.report("smooth")["aggregate"]["ap"].as_f64().unwrap();
    let bumpy = w.report("bumpy")["aggregate"]["ap"].as_f64().unwrap();
    assert!(smooth > bumpy, "smooth {smooth} vs bumpy {bumpy}");
}

#[test]
fn label_heatmaps_sample_back_to_good_predictions() {
    let w = Work::new();
    w.write("scene.toml", &format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0)));
    w.ok(&["annotate-scene", "--scene", "scene.toml", "--out", "ann.txt", "--annotate-missing"]);
    w.ok(&["render-labels", "--scene", "scene.toml", "--annotation", "ann.txt", "--out-dir", "labels"]);
    for f in ["seal.bin", "center.bin", "combined.bin"] {
        assert!(w.path().join("labels").join(f).exists());
    }
    w.ok(&["sample-from-heatmap", "--scene", "scene.toml", "--heatmap", "labels/combined.bin", "--out", "gt.txt"]);
    w.ok(&["evaluate", "--scene", "scene.toml", "--predictions", "gt.txt", "--out-dir", "rep"]);
    w.ok(&["baseline-normal-std", "--scene", "scene.toml", "--out", "base.txt"]);
    w.ok(&["evaluate", "--scene", "scene.toml", "--predictions", "base.txt", "--out-dir", "base"]);
    // One object caps how many predictions survive NMS, so compare rather
    // than expect a high absolute AP.
    let labels = &w.report("rep")["aggregate"];
    let base = &w.report("base")["aggregate"];
    assert_eq!(labels["ap_top1"].as_f64(), Some(1.0));
    assert!(labels["ap"].as_f64() >= base["ap"].as_f64(), "{labels} vs {base}");
}

fn mean_seal(out: &str) -> f64 {
    out.split("mean seal score ")
        .nth(1)
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| panic!("no mean in {out:?}"))
}

#[test]
fn large_sphere_seals_better_than_small() {
    let dir = TempDir::new().unwrap();
    let mut means = Vec::new();
    for (radius, voxel) in [(0.02, 5.0), (0.16, 40.0)] {
        let obj = format!(
            "{CAMERA}\n[[objects]]\nid = 0\nprimitive = {{ kind = \"sphere\", radius = {radius}, subdivisions = 4 }}\n"
        );
        std::fs::write(dir.path().join("s.toml"), obj).unwrap();
        std::fs::write(dir.path().join("c.toml"), format!("[annotation]\nvoxel_mm = {voxel}\n")).unwrap();
        let out = ok(
            dir.path(),
            &["--config", "c.toml", "annotate-object", "--scene", "s.toml", "--object", "0", "--out", "a.txt"],
        );
        means.push(mean_seal(&out));
    }
    assert!(means[0] < means[1], "{means:?}");
}

#[test]
fn plate_mesh_top_center_seals_perfectly() {
    let w = Work::new();
    let obj = "v -0.05 -0.05 0\nv 0.05 -0.05 0\nv 0.05 0.05 0\nv -0.05 0.05 0\nf 1 2 3\nf 1 3 4\n";
    w.write("plate.obj", obj);
    w.ok(&["annotate-object", "--mesh", "plate.obj", "--out", "a.txt"]);
    let text = w.read("a.txt");
    let centre: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|f| f.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|r| r[0].abs() < 0.02 && r[1].abs() < 0.02)
        .map(|r| r[6])
        .collect();
    assert!(!centre.is_empty());
    assert!(centre.iter().all(|&s| (s - 1.0).abs() < 1e-9), "{centre:?}");
}

#[test]
fn config_init_round_trips_and_manifest_records_hashes() {
    let dir = TempDir::new().unwrap();
    let printed = ok(dir.path(), &["config", "init"]);
    ok(dir.path(), &["config", "init", "--out", "cfg.toml"]);
    let written = std::fs::read_to_string(dir.path().join("cfg.toml")).unwrap();
    assert_eq!(printed, written);
    std::fs::write(dir.path().join("scene.toml"), format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0))).unwrap();
    ok(dir.path(), &["--config", "cfg.toml", "render-depth", "--scene", "scene.toml", "--out", "d.bin"]);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.bin.manifest.json")).unwrap()).unwrap();
    let inputs: Vec<&str> = manifest["inputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    assert!(inputs.contains(&"cfg.toml") && inputs.contains(&"scene.toml"));
    let out = &manifest["outputs"][0];
    assert_eq!(out["path"].as_str(), Some("d.bin"));
    assert_eq!(out["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn output_dir_from_config_prefixes_relative_outputs() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), "output_dir = \"runs\"\n").unwrap();
    std::fs::write(dir.path().join("scene.toml"), format!("{CAMERA}{PLATE}{}", instance(0, 0.0, 0.0))).unwrap();
    ok(dir.path(), &["--config", "cfg.toml", "render-depth", "--scene", "scene.toml", "--out", "d.bin"]);
    assert!(dir.path().join("runs/d.bin").exists());
}
