//! File formats and configuration.
//!
//! Text formats use `#` comment lines and whitespace-separated columns. Floats
//! are written in shortest round-trip form, so rereading a file reproduces the
//! values exactly and identical inputs give byte-identical files.

mod annotation;
mod config;
pub mod grid;
mod predictions;
mod scene_file;

pub use annotation::{
    parse_object_annotation, parse_scene_annotation, read_object_annotation,
    read_scene_annotation, write_object_annotation, write_scene_annotation,
    format_object_annotation, format_scene_annotation,
};
pub use config::{
    AnnotationConfig, BaselineConfig, CollisionConfig, CupConfig, EvalConfigFile, LabelConfig,
    SealConfig, ToolkitConfig, WrenchConfig,
};
pub use predictions::{format_predictions, parse_predictions, read_predictions, write_predictions};
pub use scene_file::{InstanceEntry, ObjectEntry, SceneConfig};

use std::path::Path;

use crate::error::{Error, Result};

/// Splits a line into whitespace-separated numeric fields.
pub(crate) fn parse_numbers(path: &Path, line_no: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::parse(path, line_no, format!("invalid number `{f}`")))
        })
        .collect()
}
