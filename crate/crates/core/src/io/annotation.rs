//! Object annotation:
//!
//! ```text
//! # object annotation: x y z nx ny nz s_seal s_deform s_fit
//! 0.01 0.02 0.005 0 0 1 0.98 1 0.98
//! ```
//!
//! Scene annotation: `com` lines give each instance's world center of mass,
//! followed by one row per candidate:
//!
//! ```text
//! # scene annotation: object_id instance candidate x y z nx ny nz s_seal s_wrench s collision_free
//! com 3 0 0.1 0.2 0.05
//! 3 0 0 0.1 0.2 0.1 0 0 1 0.97 0.9 0.873 1
//! ```

use std::fmt::Write;
use std::path::Path;

use super::grid::{read_text, write_text};
use super::parse_numbers;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::pose::SuctionPose;
use crate::scene::{CandidateRecord, ObjectAnnotation, SceneAnnotation, SceneRecord};

const OBJECT_HEADER: &str = "# object annotation: x y z nx ny nz s_seal s_deform s_fit";
const SCENE_HEADER: &str =
    "# scene annotation: object_id instance candidate x y z nx ny nz s_seal s_wrench s collision_free";

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn pose_from(path: &Path, line: usize, v: &[f64]) -> Result<SuctionPose> {
    SuctionPose::from_unnormalized(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
        .map_err(|e| Error::parse(path, line, e.to_string()))
}

fn score_in_range(path: &Path, line: usize, name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::parse(path, line, format!("{name} = {v} outside [0, 1]")))
    }
}

pub fn format_object_annotation(ann: &ObjectAnnotation) -> String {
    let mut out = String::from(OBJECT_HEADER);
    out.push('\n');
    for c in &ann.candidates {
        let (p, u) = (c.pose.point(), c.pose.direction());
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {}",
            p.x, p.y, p.z, u.x, u.y, u.z, c.seal, c.deform, c.fit
        )
        .unwrap();
    }
    out
}

pub fn parse_object_annotation(path: &Path, text: &str) -> Result<ObjectAnnotation> {
    let mut candidates = Vec::new();
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(Error::parse(path, line, format!("expected 9 columns, found {}", fields.len())));
        }
        let v = parse_numbers(path, line, &fields)?;
        candidates.push(CandidateRecord {
            pose: pose_from(path, line, &v)?,
            seal: score_in_range(path, line, "s_seal", v[6])?,
            deform: score_in_range(path, line, "s_deform", v[7])?,
            fit: score_in_range(path, line, "s_fit", v[8])?,
        });
    }
    Ok(ObjectAnnotation { candidates })
}

pub fn write_object_annotation(path: &Path, ann: &ObjectAnnotation) -> Result<()> {
    write_text(path, &format_object_annotation(ann))
}

pub fn read_object_annotation(path: &Path) -> Result<ObjectAnnotation> {
    parse_object_annotation(path, &read_text(path)?)
}

pub fn format_scene_annotation(ann: &SceneAnnotation) -> String {
    let mut out = String::from(SCENE_HEADER);
    out.push('\n');
    for w in &ann.warnings {
        writeln!(out, "# warning: {w}").unwrap();
    }
    for (i, (id, c)) in ann.coms.iter().enumerate() {
        writeln!(out, "com {id} {i} {} {} {}", c.x, c.y, c.z).unwrap();
    }
    for r in &ann.records {
        let (p, u) = (r.pose.point(), r.pose.direction());
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {} {} {} {}",
            r.object_id,
            r.instance,
            r.candidate,
            p.x,
            p.y,
            p.z,
            u.x,
            u.y,
            u.z,
            r.seal,
            r.wrench,
            r.score,
            u8::from(r.collision_free)
        )
        .unwrap();
    }
    out
}

pub fn parse_scene_annotation(path: &Path, text: &str) -> Result<SceneAnnotation> {
    let mut ann = SceneAnnotation::default();
    for (line, l) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if let Some(w) = l.strip_prefix("# warning: ") {
            ann.warnings.push(w.to_string());
        }
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields[0] == "com" {
            if fields.len() != 6 {
                return Err(Error::parse(path, line, "com line needs: com <object_id> <instance> x y z"));
            }
            let id = parse_index(path, line, fields[1])? as u32;
            let instance = parse_index(path, line, fields[2])?;
            if instance != ann.coms.len() {
                return Err(Error::parse(path, line, "com lines must list instances in order"));
            }
            let v = parse_numbers(path, line, &fields[3..])?;
            ann.coms.push((id, Vec3::new(v[0], v[1], v[2])));
            continue;
        }
        if fields.len() != 13 {
            return Err(Error::parse(path, line, format!("expected 13 columns, found {}", fields.len())));
        }
        let object_id = parse_index(path, line, fields[0])? as u32;
        let instance = parse_index(path, line, fields[1])?;
        let candidate = parse_index(path, line, fields[2])?;
        let v = parse_numbers(path, line, &fields[3..12])?;
        let collision_free = match fields[12] {
            "1" => true,
            "0" => false,
            other => return Err(Error::parse(path, line, format!("collision_free must be 0 or 1, got `{other}`"))),
        };
        ann.records.push(SceneRecord {
            object_id,
            instance,
            candidate,
            pose: pose_from(path, line, &v)?,
            seal: score_in_range(path, line, "s_seal", v[6])?,
            wrench: score_in_range(path, line, "s_wrench", v[7])?,
            score: score_in_range(path, line, "s", v[8])?,
            collision_free,
        });
    }
    Ok(ann)
}

fn parse_index(path: &Path, line: usize, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::parse(path, line, format!("invalid index `{s}`")))
}

pub fn write_scene_annotation(path: &Path, ann: &SceneAnnotation) -> Result<()> {
    write_text(path, &format_scene_annotation(ann))
}

pub fn read_scene_annotation(path: &Path) -> Result<SceneAnnotation> {
    parse_scene_annotation(path, &read_text(path)?)
}
