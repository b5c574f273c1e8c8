//! Prediction files: a frame header, then one suction per row.
//!
//! ```text
//! frame camera 0
//! # x y z nx ny nz confidence
//! 0.01 -0.02 0.45 0 0 -1 0.93
//! ```
//!
//! The header is `frame world` or `frame camera <index>`. Directions are
//! normalized on read.

use std::fmt::Write;
use std::path::Path;

use super::grid::{read_text, write_text};
use super::parse_numbers;
use crate::error::{Error, Result};
use crate::eval::{Prediction, PredictionFrame, PredictionSet};
use crate::geometry::Vec3;
use crate::pose::SuctionPose;

pub fn format_predictions(set: &PredictionSet) -> String {
    let mut out = match set.frame {
        PredictionFrame::World => "frame world\n".to_string(),
        PredictionFrame::Camera(i) => format!("frame camera {i}\n"),
    };
    out.push_str("# x y z nx ny nz confidence\n");
    for p in &set.predictions {
        let (x, u) = (p.pose.point(), p.pose.direction());
        writeln!(out, "{} {} {} {} {} {} {}", x.x, x.y, x.z, u.x, u.y, u.z, p.confidence).unwrap();
    }
    out
}

pub fn parse_predictions(path: &Path, text: &str) -> Result<PredictionSet> {
    let mut frame = None;
    let mut predictions = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if frame.is_none() {
            frame = Some(match fields.as_slice() {
                ["frame", "world"] => PredictionFrame::World,
                ["frame", "camera", idx] => PredictionFrame::Camera(idx.parse().map_err(|_| {
                    Error::parse(path, line, format!("invalid camera index `{idx}`"))
                })?),
                _ => {
                    return Err(Error::parse(
                        path,
                        line,
                        "expected header `frame world` or `frame camera <index>`",
                    ))
                }
            });
            continue;
        }
        if fields.len() != 7 {
            return Err(Error::parse(path, line, format!("expected 7 columns, found {}", fields.len())));
        }
        let v = parse_numbers(path, line, &fields)?;
        let pose = SuctionPose::from_unnormalized(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        predictions.push(Prediction::new(pose, v[6]).map_err(|e| Error::parse(path, line, e.to_string()))?);
    }
    let frame = frame.ok_or_else(|| Error::parse(path, 1, "missing `frame` header"))?;
    Ok(PredictionSet { frame, predictions })
}

pub fn write_predictions(path: &Path, set: &PredictionSet) -> Result<()> {
    write_text(path, &format_predictions(set))
}

pub fn read_predictions(path: &Path) -> Result<PredictionSet> {
    parse_predictions(path, &read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let set = PredictionSet {
            frame: PredictionFrame::Camera(2),
            predictions: vec![Prediction::new(
                SuctionPose::new(Vec3::new(0.1, -0.2, 0.3), Vec3::new(0.0, 0.6, -0.8)).unwrap(),
                0.75,
            )
            .unwrap()],
        };
        let text = format_predictions(&set);
        assert_eq!(parse_predictions(Path::new("p"), &text).unwrap(), set);
    }

    #[test]
    fn header_only_is_empty() {
        let set = parse_predictions(Path::new("p"), "frame world\n").unwrap();
        assert!(set.predictions.is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_predictions(Path::new("p"), "frame world\n0 0 0 0 0 1\n").unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
        assert!(parse_predictions(Path::new("p"), "0 0 0 0 0 1 1\n").is_err());
        assert!(parse_predictions(Path::new("p"), "frame world\n0 0 0 0 0 0 1\n").is_err());
        assert!(parse_predictions(Path::new("p"), "frame world\n0 0 0 0 0 1 nan\n").is_err());
    }
}
