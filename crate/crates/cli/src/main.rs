//! `suctionbench`: annotate objects and scenes, evaluate suction predictions,
//! and run the Normal STD baseline.
//!
//! Exit codes: 0 on success, 1 for bad input, 2 for an internal invariant
//! violation or a panic.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "suctionbench", version, about = "Analytic suction-grasp annotation and benchmarking")]
struct Cli {
    /// Toolkit configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Voxel-sample a mesh and seal-score every candidate.
    AnnotateObject(AnnotateObjectArgs),
    /// Project object annotations into a scene with wrench scores and collision flags.
    AnnotateScene(AnnotateSceneArgs),
    /// Score prediction files against their scenes and write AP reports.
    Evaluate(EvaluateArgs),
    /// Predict suctions with the Normal STD heuristic.
    BaselineNormalStd(BaselineArgs),
    /// Turn a heatmap into suction predictions by grid sampling.
    SampleFromHeatmap(SampleArgs),
    /// Rasterize scene labels into seal, center and combined heatmaps.
    RenderLabels(RenderLabelsArgs),
    /// Ray-cast a depth image of a scene.
    RenderDepth(RenderDepthArgs),
    /// Configuration helpers.
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Debug, Args)]
struct AnnotateObjectArgs {
    /// Wavefront OBJ mesh.
    #[arg(long, conflicts_with_all = ["scene", "object"])]
    mesh: Option<PathBuf>,
    /// Multiplier on OBJ coordinates (use 0.001 for millimeter meshes).
    #[arg(long, default_value_t = 1.0, requires = "mesh")]
    scale: f64,
    /// Scene file declaring the object (alternative to --mesh).
    #[arg(long, requires = "object")]
    scene: Option<PathBuf>,
    /// Object id within --scene.
    #[arg(long, requires = "scene")]
    object: Option<u32>,
    /// Output annotation file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnnotateSceneArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Output scene annotation file.
    #[arg(long)]
    out: PathBuf,
    /// Annotate objects that declare no annotation file instead of failing.
    #[arg(long)]
    annotate_missing: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Scene file; repeat once per scene, paired in order with --predictions.
    #[arg(long, required = true)]
    scene: Vec<PathBuf>,
    /// Prediction file for the scene at the same position.
    #[arg(long, required = true)]
    predictions: Vec<PathBuf>,
    /// Directory receiving report.json and report.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Camera index within the scene file.
    #[arg(long, default_value_t = 0)]
    camera: usize,
    /// Depth image (binary grid, meters); rendered from the scene when omitted.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Object bounding box in pixels, `x0,y0,x1,y1` (half-open); defaults to
    /// the rendered object mask.
    #[arg(long, value_parser = parse_bbox)]
    bbox: Option<[usize; 4]>,
    /// Output prediction file (camera frame).
    #[arg(long)]
    out: PathBuf,
    /// Also write the Normal STD heatmap here.
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, default_value_t = 0)]
    camera: usize,
    /// Heatmap (binary grid, values in [0, 1]).
    #[arg(long)]
    heatmap: PathBuf,
    /// Depth image; rendered from the scene when omitted.
    #[arg(long)]
    depth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RenderLabelsArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Scene annotation produced by annotate-scene.
    #[arg(long)]
    annotation: PathBuf,
    #[arg(long, default_value_t = 0)]
    camera: usize,
    /// Seal splat sigma in pixels; overrides the config.
    #[arg(long)]
    sigma: Option<f64>,
    /// Center splat sigma in pixels; overrides the config.
    #[arg(long)]
    center_sigma: Option<f64>,
    /// Directory receiving seal.bin, center.bin and combined.bin.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct RenderDepthArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, default_value_t = 0)]
    camera: usize,
    /// Output depth (binary grid, meters).
    #[arg(long)]
    out: PathBuf,
    /// Also write a 16-bit PNG in millimeters.
    #[arg(long)]
    png: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ConfigCommand {
    /// Print or write the default configuration with comments.
    Init {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_bbox(s: &str) -> Result<[usize; 4], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    <[usize; 4]>::try_from(parts).map_err(|_| "expected x0,y0,x1,y1".to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let argv: Vec<String> = std::env::args().collect();
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| commands::run(cli, &argv))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
        Err(_) => ExitCode::from(2),
    }
}
