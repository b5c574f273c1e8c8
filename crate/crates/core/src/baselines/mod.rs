//! Reference prediction pipeline pieces: pixel heatmaps, the Normal STD
//! heuristic, grid sampling of heatmaps into suctions, and label heatmaps
//! rasterized from scene annotations.

mod heatmap;
mod labels;
mod normal_std;
mod sampling;

pub use heatmap::{combine_heatmaps, Heatmap};
pub use labels::{render_label_heatmaps, LabelHeatmaps};
pub use normal_std::{normal_std_heatmap, pixel_normals, NormalStdParams, PixelRect};
pub use sampling::{grid_sample, pixels_to_suctions, SampledPixel, SamplerConfig, Suctions};
