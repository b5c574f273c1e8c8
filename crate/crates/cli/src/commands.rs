use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use suctionbench::baselines::{
    combine_heatmaps, grid_sample, normal_std_heatmap, pixels_to_suctions, render_label_heatmaps,
    Heatmap, PixelRect,
};
use suctionbench::eval::{evaluate_split, PredictionFrame, PredictionSet, SceneInput};
use suctionbench::geometry::obj;
use suctionbench::io::{
    read_object_annotation, read_predictions, read_scene_annotation, write_object_annotation,
    write_predictions, write_scene_annotation, SceneConfig, ToolkitConfig,
};
use suctionbench::scene::{
    annotate_object, annotate_scene, render_depth_with_mask, ObjectAnnotation, ObjectModel,
    ObjectRegistry, RenderOutput, SceneModel,
};
use suctionbench::{CameraIntrinsics, DepthImage, Error, PointIndex, Result, RigidTransform};

use crate::manifest::Recorder;
use crate::{
    AnnotateObjectArgs, AnnotateSceneArgs, BaselineArgs, Cli, Command, ConfigCommand, EvaluateArgs,
    RenderDepthArgs, RenderLabelsArgs, SampleArgs,
};

pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    let mut rec = Recorder::default();
    let config = match &cli.config {
        Some(path) => {
            rec.input(path);
            ToolkitConfig::load(path)?
        }
        None => ToolkitConfig::default(),
    };
    let ctx = Context { config, rec };
    let Context { config, rec } = match cli.command {
        Command::AnnotateObject(a) => annotate_object_cmd(ctx, a)?,
        Command::AnnotateScene(a) => annotate_scene_cmd(ctx, a)?,
        Command::Evaluate(a) => evaluate_cmd(ctx, a)?,
        Command::BaselineNormalStd(a) => baseline_cmd(ctx, a)?,
        Command::SampleFromHeatmap(a) => sample_cmd(ctx, a)?,
        Command::RenderLabels(a) => render_labels_cmd(ctx, a)?,
        Command::RenderDepth(a) => render_depth_cmd(ctx, a)?,
        Command::Config(ConfigCommand::Init { out }) => config_init_cmd(ctx, out)?,
    };
    for out in rec.outputs() {
        info!("wrote {}", out.display());
    }
    rec.finish(argv, &config)?;
    Ok(())
}

struct Context {
    config: ToolkitConfig,
    rec: Recorder,
}

impl Context {
    /// Relative outputs land under `output_dir` when the config sets one.
    fn out_path(&self, path: &Path) -> Result<PathBuf> {
        let path = match &self.config.output_dir {
            Some(dir) if path.is_relative() => Path::new(dir).join(path),
            _ => path.to_path_buf(),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        Ok(path)
    }

    fn write(&mut self, path: &Path, text: &str) -> Result<()> {
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.rec.output(path);
        Ok(())
    }
}

/// A scene file bound to its object models.
struct LoadedScene {
    config: SceneConfig,
    registry: ObjectRegistry,
    model: SceneModel,
}

fn load_scene(ctx: &mut Context, path: &Path) -> Result<LoadedScene> {
    ctx.rec.input(path);
    let config = SceneConfig::load(path)?;
    let seal = ctx.config.seal_params()?;
    let collision = ctx.config.collision_params()?;
    let mut registry = ObjectRegistry::new();
    for (id, mesh) in config.load_used_meshes()? {
        if let Some(m) = &config.object(id)?.mesh {
            ctx.rec.input(config.resolve(m));
        }
        registry.insert(id, Arc::new(ObjectModel::new(id, mesh, &seal, &collision)?));
    }
    let model = SceneModel::new(config.scene()?, &registry)?;
    Ok(LoadedScene {
        config,
        registry,
        model,
    })
}

fn annotate_object_cmd(mut ctx: Context, a: AnnotateObjectArgs) -> Result<Context> {
    let mesh = match (&a.mesh, &a.scene, a.object) {
        (Some(path), None, None) => {
            ctx.rec.input(path);
            obj::load_mesh(path, a.scale)?
        }
        (None, Some(scene), Some(id)) => {
            ctx.rec.input(scene);
            let cfg = SceneConfig::load(scene)?;
            let entry = cfg.object(id)?;
            if let Some(m) = &entry.mesh {
                ctx.rec.input(cfg.resolve(m));
            }
            cfg.load_mesh(entry)?
        }
        _ => return Err(Error::InvalidInput("give either --mesh or --scene with --object".into())),
    };
    let seal = ctx.config.seal_params()?;
    let surface = suctionbench::SealSurface::new(mesh, seal.surface_spacing);
    let ann = annotate_object(&surface, ctx.config.voxel()?, &ctx.config.cup()?, &seal)?;
    let mean = if ann.candidates.is_empty() {
        0.0
    } else {
        ann.candidates.iter().map(|c| c.seal).sum::<f64>() / ann.candidates.len() as f64
    };
    println!("{} candidates, mean seal score {mean:.4}", ann.candidates.len());
    let out = ctx.out_path(&a.out)?;
    write_object_annotation(&out, &ann)?;
    ctx.rec.output(out);
    Ok(ctx)
}

fn object_annotations(
    ctx: &mut Context,
    scene: &LoadedScene,
    annotate_missing: bool,
) -> Result<BTreeMap<u32, ObjectAnnotation>> {
    let mut out = BTreeMap::new();
    for (&id, model) in &scene.registry {
        let declared = scene.config.object(id)?.annotation.is_some();
        let ann = if declared {
            let path = scene.config.annotation_path(id)?;
            ctx.rec.input(&path);
            read_object_annotation(&path)?
        } else if annotate_missing {
            warn!("object {id} declares no annotation file; annotating it now");
            annotate_object(
                model.surface(),
                ctx.config.voxel()?,
                &ctx.config.cup()?,
                &ctx.config.seal_params()?,
            )?
        } else {
            return Err(Error::InvalidInput(format!(
                "object {id} has no annotation file (declare one or pass --annotate-missing)"
            )));
        };
        out.insert(id, ann);
    }
    Ok(out)
}

fn annotate_scene_cmd(mut ctx: Context, a: AnnotateSceneArgs) -> Result<Context> {
    let scene = load_scene(&mut ctx, &a.scene)?;
    if scene.model.is_empty() {
        return Err(Error::EmptyScene);
    }
    let annotations = object_annotations(&mut ctx, &scene, a.annotate_missing)?;
    let ann = annotate_scene(
        &scene.model,
        &annotations,
        &ctx.config.wrench_params()?,
        &ctx.config.collision_params()?,
    )?;
    let free = ann.collision_free().count();
    println!(
        "{} records, {} collision-free, {} warnings",
        ann.records.len(),
        free,
        ann.warnings.len()
    );
    let out = ctx.out_path(&a.out)?;
    write_scene_annotation(&out, &ann)?;
    ctx.rec.output(out);
    Ok(ctx)
}

fn evaluate_cmd(mut ctx: Context, a: EvaluateArgs) -> Result<Context> {
    if a.scene.len() != a.predictions.len() {
        return Err(Error::InvalidInput(format!(
            "{} scenes but {} prediction files",
            a.scene.len(),
            a.predictions.len()
        )));
    }
    let scenes: Vec<LoadedScene> = a
        .scene
        .iter()
        .map(|p| load_scene(&mut ctx, p))
        .collect::<Result<_>>()?;
    let inputs: Vec<SceneInput<'_>> = a
        .scene
        .iter()
        .zip(&a.predictions)
        .zip(&scenes)
        .map(|((scene_path, pred_path), s)| {
            let predictions = match read_predictions(pred_path) {
                Ok(set) => {
                    ctx.rec.input(pred_path);
                    Ok(set)
                }
                Err(e) => {
                    warn!("{e}");
                    Err(e.to_string())
                }
            };
            SceneInput {
                name: scene_path.display().to_string(),
                model: &s.model,
                predictions,
            }
        })
        .collect();
    let report = evaluate_split(&inputs, &ctx.config.scoring_params()?, &ctx.config.eval_config()?)?;
    let m = &report.aggregate;
    let per: Vec<String> = m
        .thresholds
        .iter()
        .zip(&m.ap_s)
        .map(|(s, v)| format!("AP_{s} {v:.4}"))
        .collect();
    println!(
        "{} scenes ({} failed): AP {:.4}, AP-top1 {:.4}; {}",
        report.scenes.len(),
        report.failed,
        m.ap,
        m.ap_top1,
        per.join(", ")
    );
    let dir = ctx.out_path(&a.out_dir.join("report.json"))?;
    ctx.write(&dir, &report.to_json())?;
    let csv = ctx.out_path(&a.out_dir.join("report.csv"))?;
    ctx.write(&csv, &report.to_csv())?;
    Ok(ctx)
}

struct View {
    intr: CameraIntrinsics,
    camera: RigidTransform,
}

fn view(scene: &LoadedScene, camera: usize) -> Result<View> {
    Ok(View {
        intr: scene.config.intrinsics()?,
        camera: *scene.model.scene().camera_pose(camera)?,
    })
}

fn depth_for(ctx: &mut Context, path: Option<&Path>, v: &View, render: &RenderOutput) -> Result<DepthImage> {
    match path {
        Some(p) => {
            ctx.rec.input(p);
            let d = DepthImage::load(p)?;
            if !d.matches(&v.intr) {
                return Err(Error::DimensionMismatch(format!(
                    "depth {}x{} vs camera {}x{}",
                    d.width(),
                    d.height(),
                    v.intr.width,
                    v.intr.height
                )));
            }
            Ok(d)
        }
        None => Ok(render.depth.clone()),
    }
}

/// Tight pixel box around every rendered object pixel.
fn mask_bbox(render: &RenderOutput, width: usize) -> Result<PixelRect> {
    let mut rect: Option<PixelRect> = None;
    for (i, hit) in render.instances.iter().enumerate() {
        if hit.is_none() {
            continue;
        }
        let (u, v) = (i % width, i / width);
        let r = rect.get_or_insert(PixelRect { x0: u, y0: v, x1: u + 1, y1: v + 1 });
        r.x0 = r.x0.min(u);
        r.y0 = r.y0.min(v);
        r.x1 = r.x1.max(u + 1);
        r.y1 = r.y1.max(v + 1);
    }
    rect.ok_or_else(|| Error::InvalidInput("no object is visible from this camera".into()))
}

/// Grid-samples `map` and writes camera-frame predictions.
fn write_suctions(
    ctx: &mut Context,
    map: &Heatmap,
    depth: &DepthImage,
    v: &View,
    camera: usize,
    out: &Path,
) -> Result<()> {
    let pixels = grid_sample(map, &ctx.config.sampler_config()?);
    let (cloud, _) = depth.to_cloud(&v.intr);
    let index = PointIndex::new(&cloud.points);
    let suctions = pixels_to_suctions(&pixels, depth, &v.intr, &index, ctx.config.baseline.normal_neighbors);
    println!(
        "{} suctions from {} sampled pixels ({} skipped)",
        suctions.predictions.len(),
        pixels.len(),
        suctions.skipped
    );
    let set = PredictionSet {
        frame: PredictionFrame::Camera(camera),
        predictions: suctions.predictions,
    };
    let out = ctx.out_path(out)?;
    write_predictions(&out, &set)?;
    ctx.rec.output(out);
    Ok(())
}

fn baseline_cmd(mut ctx: Context, a: BaselineArgs) -> Result<Context> {
    let scene = load_scene(&mut ctx, &a.scene)?;
    let v = view(&scene, a.camera)?;
    let render = render_depth_with_mask(&scene.model, &v.intr, &v.camera);
    let depth = depth_for(&mut ctx, a.depth.as_deref(), &v, &render)?;
    let bbox = match a.bbox {
        Some([x0, y0, x1, y1]) => PixelRect { x0, y0, x1, y1 },
        None => mask_bbox(&render, v.intr.width)?,
    };
    let map = normal_std_heatmap(&depth, &v.intr, &bbox, &ctx.config.normal_std_params()?)?;
    write_suctions(&mut ctx, &map, &depth, &v, a.camera, &a.out)?;
    if let Some(h) = &a.heatmap {
        let h = ctx.out_path(h)?;
        map.save(&h)?;
        ctx.rec.output(h);
    }
    Ok(ctx)
}

fn sample_cmd(mut ctx: Context, a: SampleArgs) -> Result<Context> {
    let scene = load_scene(&mut ctx, &a.scene)?;
    let v = view(&scene, a.camera)?;
    ctx.rec.input(&a.heatmap);
    let map = Heatmap::load(&a.heatmap)?;
    if !map.matches(&v.intr) {
        return Err(Error::DimensionMismatch("heatmap does not match the camera".into()));
    }
    let render = render_depth_with_mask(&scene.model, &v.intr, &v.camera);
    let depth = depth_for(&mut ctx, a.depth.as_deref(), &v, &render)?;
    write_suctions(&mut ctx, &map, &depth, &v, a.camera, &a.out)?;
    Ok(ctx)
}

fn render_labels_cmd(mut ctx: Context, a: RenderLabelsArgs) -> Result<Context> {
    let scene = load_scene(&mut ctx, &a.scene)?;
    let v = view(&scene, a.camera)?;
    ctx.rec.input(&a.annotation);
    let ann = read_scene_annotation(&a.annotation)?;
    let labels = render_label_heatmaps(
        &ann,
        &v.intr,
        &v.camera,
        a.sigma.unwrap_or(ctx.config.labels.sigma_px),
        a.center_sigma.unwrap_or(ctx.config.labels.center_sigma_px),
        ctx.config.eval.penalize_collisions,
    )?;
    if labels.skipped > 0 {
        warn!("{} labels fell outside the image or behind the camera", labels.skipped);
    }
    let combined = combine_heatmaps(&labels.seal, &labels.center)?;
    for (name, map) in [("seal.bin", &labels.seal), ("center.bin", &labels.center), ("combined.bin", &combined)] {
        let path = ctx.out_path(&a.out_dir.join(name))?;
        map.save(&path)?;
        ctx.rec.output(path);
    }
    println!("label heatmaps: seal max {:.4}, {} skipped", labels.seal.max(), labels.skipped);
    Ok(ctx)
}

fn render_depth_cmd(mut ctx: Context, a: RenderDepthArgs) -> Result<Context> {
    let scene = load_scene(&mut ctx, &a.scene)?;
    let v = view(&scene, a.camera)?;
    let render = render_depth_with_mask(&scene.model, &v.intr, &v.camera);
    let out = ctx.out_path(&a.out)?;
    render.depth.save(&out)?;
    ctx.rec.output(out);
    if let Some(p) = &a.png {
        let p = ctx.out_path(p)?;
        render.depth.save_png_mm(&p)?;
        ctx.rec.output(p);
    }
    Ok(ctx)
}

fn config_init_cmd(mut ctx: Context, out: Option<PathBuf>) -> Result<Context> {
    let text = ToolkitConfig::default_toml();
    match out {
        Some(path) => {
            let path = ctx.out_path(&path)?;
            ctx.write(&path, &text)?;
        }
        None => print!("{text}"),
    }
    Ok(ctx)
}
