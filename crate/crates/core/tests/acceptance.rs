//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;
use suctionbench::baselines::{
    grid_sample, normal_std_heatmap, pixels_to_suctions, NormalStdParams, PixelRect, SamplerConfig,
};
use suctionbench::eval::{
    ap_metrics, evaluate_scene, nms, precision_at_k, EvalConfig, Prediction, PredictionFrame,
    PredictionSet, ScoringParams,
};
use suctionbench::geometry::{
    intersect_triangle, orthonormal_basis, voxel_sample_surface, MeshIndex,
};
use suctionbench::scene::{
    annotate_scene, check_collision, check_collision_exhaustive, render_depth_with_mask,
    Association, CollisionParams,
};
use suctionbench::seal::{seal_score, seal_score_posed};
use suctionbench::wrench::{center_of_mass, wrench_score};
use suctionbench::{
    CupModel, PointIndex, RigidTransform, SealParams, SealSurface, SuctionPose, Vec3,
    WrenchParams,
};

use common::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn main() {
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("1 seal flat-plate property", Some(Duration::from_secs(10)), flat_plate),
        ("2 seal curvature monotonicity", Some(Duration::from_secs(60)), curvature_monotonicity),
        ("3 rigid invariance", None, rigid_invariance),
        ("4 wrench ranking invariance", None, wrench_ranking),
        ("5 metric oracle equivalence", None, metric_oracle),
        ("6 NMS contract", None, nms_contract),
        ("7 brute-force geometry oracles", None, geometry_oracles),
        ("8 self-consistency end-to-end", Some(Duration::from_secs(300)), self_consistency),
        ("9 COM exactness", None, com_exactness),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = budget.map_or(true, |b| elapsed <= b);
        let passed = result.passed && in_time;
        let timing = match budget {
            Some(b) => format!("{:.2}s (budget {}s)", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        println!(
            "{} criterion {name}: {} [{timing}]",
            if passed { "PASS" } else { "FAIL" },
            result.detail
        );
        if !passed {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("acceptance: {failures} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}

/// Whether the ring polygon around `p` leaves the square `[-h, h]^2` of its face.
fn ring_overhangs(p: &Vec3, u: &Vec3, cup: &CupModel, half: f64) -> bool {
    let (e1, e2) = orthonormal_basis(u);
    (0..cup.vertices).any(|i| {
        let a = 2.0 * std::f64::consts::PI * i as f64 / cup.vertices as f64;
        let q = p + (e1 * a.cos() + e2 * a.sin()) * cup.radius;
        let inside = |v: f64, lim: f64| v.abs() <= lim + 1e-12;
        !(inside(q.x, half) && inside(q.y, half) && inside(q.z, 0.005))
    })
}

fn flat_plate() -> Outcome {
    let half = 0.05;
    let mesh = cuboid(0.1, 0.1, 0.01);
    let surface = SealSurface::new(mesh.clone(), SealParams::default().surface_spacing);
    let cup = CupModel::default();
    let params = SealParams::default();
    let candidates = voxel_sample_surface(&mesh, 0.005);
    let (mut interior, mut interior_good, mut overhang, mut overhang_zero) = (0, 0, 0, 0);
    for c in &candidates {
        let pose = SuctionPose::from_unnormalized(c.point, c.normal).unwrap();
        let s = seal_score(&surface, &pose, &cup, &params).seal;
        let on_cap = c.normal.z.abs() > 0.5;
        let edge_distance = half - c.point.x.abs().max(c.point.y.abs());
        if on_cap && edge_distance > cup.radius {
            interior += 1;
            interior_good += usize::from(s >= 0.95);
        }
        if ring_overhangs(&c.point, &c.normal, &cup, half) {
            overhang += 1;
            overhang_zero += usize::from(s == 0.0);
        }
    }
    let frac = interior_good as f64 / interior.max(1) as f64;
    outcome(
        interior > 0 && frac >= 0.99 && overhang > 0 && overhang_zero == overhang,
        format!(
            "{interior_good}/{interior} interior >= 0.95 ({:.2}%), {overhang_zero}/{overhang} overhanging == 0",
            100.0 * frac
        ),
    )
}

fn curvature_monotonicity() -> Outcome {
    let cup = CupModel::default();
    let params = SealParams::default();
    let means: Vec<f64> = [0.160, 0.080, 0.040, 0.020]
        .iter()
        .map(|&r| {
            let mesh = sphere(r, 5);
            let surface = SealSurface::new(mesh.clone(), params.surface_spacing);
            let ann = suctionbench::scene::annotate_object(&surface, 0.005, &cup, &params).unwrap();
            ann.candidates.iter().map(|c| c.seal).sum::<f64>() / ann.candidates.len() as f64
        })
        .collect();
    let monotone = means.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        monotone,
        format!(
            "mean S_seal at r = 160/80/40/20 mm: {}",
            means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(" / ")
        ),
    )
}

fn rigid_invariance() -> Outcome {
    let mut rng = rng(3);
    let cup = CupModel::default();
    let params = SealParams::default();
    let wrench = WrenchParams::default();
    let mesh = l_solid(0.04, 0.03);
    let com = center_of_mass(&mesh).unwrap();
    let surface = SealSurface::new(mesh.clone(), params.surface_spacing);
    let candidates = voxel_sample_surface(&mesh, 0.01);
    let (mut worst_seal, mut worst_wrench) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let t = random_transform(&mut rng, 0.5);
        let rotated = wrench.clone().with_gravity(t.apply_vector(&wrench.gravity));
        for c in candidates.iter().step_by(7) {
            let pose = SuctionPose::from_unnormalized(c.point, c.normal).unwrap();
            let moved = pose.transformed(&t);
            let s0 = seal_score(&surface, &pose, &cup, &params).seal;
            let s1 = seal_score_posed(&surface, &t, &moved, &cup, &params).seal;
            worst_seal = worst_seal.max((s0 - s1).abs());
            let w0 = wrench_score(&pose, &com, &wrench).score;
            let w1 = wrench_score(&moved, &t.apply_point(&com), &rotated).score;
            worst_wrench = worst_wrench.max((w0 - w1).abs());
        }
    }
    outcome(
        worst_seal <= 1e-6 && worst_wrench <= 1e-6,
        format!("max |dS_seal| = {worst_seal:.3e}, max |dS_wrench| = {worst_wrench:.3e}"),
    )
}

fn wrench_ranking() -> Outcome {
    let mut rng = rng(4);
    let com = Vec3::new(0.01, -0.02, 0.03);
    let poses: Vec<SuctionPose> = (0..1000)
        .map(|_| {
            let p = Vec3::new(
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
            );
            SuctionPose::new(p, unit_vector(&mut rng)).unwrap()
        })
        .collect();
    let ranking = |mass: f64| {
        let params = WrenchParams::default().with_mass(mass);
        let mags: Vec<f64> = poses.iter().map(|p| wrench_score(p, &com, &params).magnitude).collect();
        let mut order: Vec<usize> = (0..mags.len()).collect();
        order.sort_by(|&a, &b| mags[a].total_cmp(&mags[b]));
        order
    };
    let base = ranking(1.0);
    let same = [0.1, 10.0].iter().all(|&m| ranking(m) == base);
    outcome(same, "ordering of |tau_e| identical for m = 0.1, 1, 10 kg")
}

fn brute_ap(scores: &[f64], thresholds: &[f64], top_k: usize) -> (Vec<f64>, f64, f64) {
    let mut ap_s = Vec::new();
    let mut top1 = Vec::new();
    for &s in thresholds {
        let mut sum = 0.0;
        for k in 1..=top_k {
            let mut hits = 0usize;
            for i in 0..k {
                if i < scores.len() && scores[i] > s {
                    hits += 1;
                }
            }
            sum += hits as f64 / k as f64;
        }
        ap_s.push(sum / top_k as f64);
        let first = if !scores.is_empty() && scores[0] > s { 1.0 } else { 0.0 };
        top1.push(first);
    }
    let n = thresholds.len() as f64;
    let ap = ap_s.iter().sum::<f64>() / n;
    let ap_top1 = top1.iter().sum::<f64>() / n;
    (ap_s, ap, ap_top1)
}

fn metric_oracle() -> Outcome {
    let mut rng = rng(5);
    let config = EvalConfig::default();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..80);
        let scores: Vec<f64> = (0..n)
            .map(|_| match rng.gen_range(0..4) {
                0 => [0.2, 0.4, 0.6, 0.8][rng.gen_range(0..4)],
                1 => 0.0,
                _ => rng.gen_range(0.0..1.0),
            })
            .collect();
        let m = ap_metrics(&scores, &config);
        let (ap_s, ap, ap_top1) = brute_ap(&scores, &config.thresholds, config.top_k);
        if m.ap_s != ap_s || m.ap != ap || m.ap_top1 != ap_top1 {
            mismatches += 1;
        }
    }
    let hand = ap_metrics(
        &[0.9, 0.9, 0.1],
        &EvalConfig {
            thresholds: vec![0.4],
            top_k: 3,
            ..EvalConfig::default()
        },
    );
    let hand_ok = (hand.ap_s[0] - 8.0 / 9.0).abs() < 1e-15
        && precision_at_k(&[0.9, 0.9, 0.1], 3, 0.4) == 2.0 / 3.0;
    outcome(
        mismatches == 0 && hand_ok,
        format!("{mismatches}/1000 mismatches; AP_0.4([0.9,0.9,0.1], k<=3) = {}", hand.ap_s[0]),
    )
}

fn nms_contract() -> Outcome {
    let mut rng = rng(6);
    let config = EvalConfig::default();
    let mut violations = 0;
    for round in 0..50 {
        // clusters of exact and near duplicates spread over a few objects
        let mut preds = Vec::new();
        let mut assoc = Vec::new();
        let objects = 1 + round % 4;
        for _ in 0..rng.gen_range(20..200) {
            let object = rng.gen_range(0..objects) as u32;
            let base = Vec3::new(object as f64, 0.0, 0.0);
            let jitter = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..0.08) };
            let p = base + unit_vector(&mut rng) * jitter;
            let confidence = if rng.gen_bool(0.2) { 0.5 } else { rng.gen_range(0.0..1.0) };
            preds.push(Prediction {
                pose: SuctionPose::new(p, Vec3::z()).unwrap(),
                confidence,
            });
            assoc.push(Some(Association {
                instance: object as usize,
                object_id: object,
                distance: 0.0,
            }));
        }
        let kept = nms(&preds, &assoc, &config);
        let mut per_object: HashMap<u32, usize> = HashMap::new();
        for (a, &i) in kept.iter().enumerate() {
            *per_object.entry(assoc[i].unwrap().object_id).or_default() += 1;
            for &j in &kept[a + 1..] {
                if (preds[i].pose.point() - preds[j].pose.point()).norm() <= config.nms_radius {
                    violations += 1;
                }
            }
        }
        violations += per_object.values().filter(|&&c| c > config.per_object_cap).count();
    }
    let spaced: Vec<Prediction> = (0..15)
        .map(|i| Prediction {
            pose: SuctionPose::new(Vec3::new(0.03 * i as f64, 0.0, 0.0), Vec3::z()).unwrap(),
            confidence: 1.0 - 0.01 * i as f64,
        })
        .collect();
    let one = vec![Some(Association { instance: 0, object_id: 0, distance: 0.0 }); 15];
    let capped = nms(&spaced, &one, &config).len();
    outcome(
        violations == 0 && capped == 10,
        format!("{violations} violations over 50 adversarial sets; 15 spaced on one object -> {capped} kept"),
    )
}

fn geometry_oracles() -> Outcome {
    let mut rng = rng(7);
    let mut ray_mismatch = 0;
    let mut assoc_mismatch = 0;
    let mut collision_mismatch = 0;
    // ray casts
    for _ in 0..100 {
        let mesh = sphere(rng.gen_range(0.02..0.2), rng.gen_range(1..4))
            .transformed(&random_transform(&mut rng, 0.1));
        let index = MeshIndex::new(mesh.clone());
        let origin = unit_vector(&mut rng) * rng.gen_range(0.0..0.5);
        let dir = unit_vector(&mut rng);
        let mut best: Option<(f64, usize)> = None;
        for f in 0..mesh.faces().len() {
            let [a, b, c] = mesh.triangle(f);
            if let Some((t, _, _)) = intersect_triangle(&origin, &dir, &a, &b, &c) {
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, f));
                }
            }
        }
        let hit = index.ray_cast(&origin, &dir).map(|h| (h.t, h.face));
        if hit != best {
            ray_mismatch += 1;
        }
    }
    // association
    let fixture = build_scene(&smooth_objects(), 0.01);
    let model = &fixture.model;
    let world: Vec<_> = (0..model.len()).map(|i| model.world_mesh(i)).collect();
    for _ in 0..100 {
        let q = Vec3::new(
            rng.gen_range(-0.25..0.25),
            rng.gen_range(-0.25..0.25),
            rng.gen_range(0.0..0.15),
        );
        let mut best: Option<(f64, usize)> = None;
        for (i, mesh) in world.iter().enumerate() {
            for f in 0..mesh.faces().len() {
                let [a, b, c] = mesh.triangle(f);
                let (p, _) = suctionbench::geometry::closest_point_on_triangle(&q, &a, &b, &c);
                let d = (p - q).norm();
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
        }
        let (d, i) = best.unwrap();
        let expected = (d <= 0.05).then_some(i);
        let got = model.associate(&q, 0.05).map(|a| a.instance);
        if got != expected {
            assoc_mismatch += 1;
        }
    }
    // point-in-cylinder collision
    let points = &model.cloud().cloud().points;
    let params = CollisionParams::default();
    for _ in 0..100 {
        let i = rng.gen_range(0..points.len());
        let pose = SuctionPose::new(points[i], unit_vector(&mut rng)).unwrap();
        if check_collision(model.cloud(), &pose, &params) != check_collision_exhaustive(points, &pose, &params) {
            collision_mismatch += 1;
        }
    }
    outcome(
        ray_mismatch + assoc_mismatch + collision_mismatch == 0,
        format!(
            "mismatches: ray cast {ray_mismatch}/100, association {assoc_mismatch}/100, collision {collision_mismatch}/100"
        ),
    )
}

/// Highest-scoring collision-free labels that survive NMS unchanged.
fn top_labels(fixture: &Fixture, config: &EvalConfig) -> Vec<Prediction> {
    let ann = annotate_scene(
        &fixture.model,
        &fixture.annotations,
        &WrenchParams::default(),
        &CollisionParams::default(),
    )
    .unwrap();
    let mut records: Vec<_> = ann.collision_free().collect();
    records.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut chosen: Vec<&suctionbench::scene::SceneRecord> = Vec::new();
    let mut per_object: HashMap<u32, usize> = HashMap::new();
    for r in records {
        if chosen.len() == config.top_k {
            break;
        }
        let count = per_object.entry(r.object_id).or_default();
        if *count >= config.per_object_cap {
            continue;
        }
        if chosen
            .iter()
            .any(|c| (c.pose.point() - r.pose.point()).norm() <= config.nms_radius)
        {
            continue;
        }
        *count += 1;
        chosen.push(r);
    }
    chosen
        .iter()
        .map(|r| Prediction {
            pose: r.pose,
            confidence: r.score,
        })
        .collect()
}

fn baseline_ap(fixture: &Fixture, params: &ScoringParams, config: &EvalConfig) -> f64 {
    let intr = camera();
    let cam = *fixture.model.scene().camera_pose(0).unwrap();
    let render = render_depth_with_mask(&fixture.model, &intr, &cam);
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for (i, hit) in render.instances.iter().enumerate() {
        if hit.is_some() {
            let (u, v) = (i % intr.width, i / intr.width);
            x0 = x0.min(u);
            y0 = y0.min(v);
            x1 = x1.max(u + 1);
            y1 = y1.max(v + 1);
        }
    }
    let bbox = PixelRect { x0, y0, x1, y1 };
    let map = normal_std_heatmap(&render.depth, &intr, &bbox, &NormalStdParams::default()).unwrap();
    let pixels = grid_sample(&map, &SamplerConfig::default());
    let (cloud, _) = render.depth.to_cloud(&intr);
    let index = PointIndex::new(&cloud.points);
    let suctions = pixels_to_suctions(&pixels, &render.depth, &intr, &index, 16);
    let set = PredictionSet {
        frame: PredictionFrame::Camera(0),
        predictions: suctions.predictions,
    };
    evaluate_scene("baseline", &fixture.model, &set, params, config)
        .unwrap()
        .metrics
        .ap
}

fn self_consistency() -> Outcome {
    let config = EvalConfig::default();
    let params = ScoringParams::default();
    let smooth = build_scene(&smooth_objects(), 0.005);
    let labels = top_labels(&smooth, &config);
    let report = evaluate_scene("gt", &smooth.model, &PredictionSet::world(labels.clone()), &params, &config).unwrap();
    let ap_02 = report.metrics.ap_s[0];
    let bumpy = build_scene(&bumpy_objects(), 0.005);
    let smooth_ap = baseline_ap(&smooth, &params, &config);
    let bumpy_ap = baseline_ap(&bumpy, &params, &config);
    outcome(
        ap_02 >= 0.9 && smooth_ap > bumpy_ap,
        format!(
            "ground-truth top-{} AP_0.2 = {ap_02:.4}; Normal STD AP smooth {smooth_ap:.4} vs bumpy {bumpy_ap:.4}",
            labels.len()
        ),
    )
}

fn com_exactness() -> Outcome {
    let offset = Vec3::new(0.3, -0.2, 1.7);
    let cube = cuboid(1.0, 1.0, 1.0).transformed(&RigidTransform::from_translation(offset));
    let cube_err = (center_of_mass(&cube).unwrap() - offset).norm();

    let (s, h) = (0.05, 0.03);
    let l = l_solid(s, h);
    let com = center_of_mass(&l).unwrap();
    let mut rng = rng(9);
    let (mut sum, mut n) = (Vec3::zeros(), 0usize);
    for _ in 0..1_000_000 {
        let p = Vec3::new(rng.gen_range(0.0..2.0 * s), rng.gen_range(0.0..2.0 * s), rng.gen_range(0.0..h));
        if in_l_solid(&p, s, h) {
            sum += p;
            n += 1;
        }
    }
    let mc = sum / n as f64;
    let l_err = (com - mc).norm();
    outcome(
        cube_err <= 1e-9 && l_err <= 1e-3,
        format!("unit cube error {cube_err:.2e} m; L-solid vs Monte Carlo {l_err:.2e} m"),
    )
}
