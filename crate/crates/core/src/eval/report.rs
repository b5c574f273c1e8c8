use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ap_metrics, ApMetrics};
use super::{associate_all, nms, score_prediction, EvalConfig, PredictionSet, ScoringParams};
use crate::error::Result;
use crate::scene::SceneModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneReport {
    pub name: String,
    pub metrics: ApMetrics,
    /// Predictions read from the file.
    pub total: usize,
    pub suppressed: usize,
    /// Kept predictions actually scored (at most `top_k`).
    pub evaluated: usize,
    /// Predictions with no object within the association distance.
    pub unassociated: usize,
    /// Evaluated predictions whose cup collides.
    pub collisions: usize,
    /// Scores of the evaluated predictions, in rank order.
    pub scores: Vec<f64>,
    /// Set when the scene could not be evaluated; metrics are then zero.
    pub error: Option<String>,
}

impl SceneReport {
    fn failed(name: &str, error: String, config: &EvalConfig) -> Self {
        SceneReport {
            name: name.to_string(),
            metrics: ApMetrics::zeros(&config.thresholds),
            total: 0,
            suppressed: 0,
            evaluated: 0,
            unassociated: 0,
            collisions: 0,
            scores: Vec::new(),
            error: Some(error),
        }
    }
}

/// Evaluates one scene's predictions.
pub fn evaluate_scene(
    name: &str,
    model: &SceneModel,
    set: &PredictionSet,
    params: &ScoringParams,
    config: &EvalConfig,
) -> Result<SceneReport> {
    config.validate()?;
    params.validate()?;
    let preds = set.to_world(model)?;
    let associations = associate_all(&preds, model, config);
    let kept = nms(&preds, &associations, config);
    let evaluated: Vec<usize> = kept.iter().copied().take(config.top_k).collect();
    let scored: Vec<_> = evaluated
        .par_iter()
        .map(|&i| score_prediction(&preds[i], associations[i].as_ref(), model, params, config))
        .collect();
    let scores: Vec<f64> = scored.iter().map(|s| s.score).collect();
    Ok(SceneReport {
        name: name.to_string(),
        metrics: ap_metrics(&scores, config),
        total: preds.len(),
        suppressed: preds.len() - kept.len(),
        evaluated: evaluated.len(),
        unassociated: associations.iter().filter(|a| a.is_none()).count(),
        collisions: scored.iter().filter(|s| !s.collision_free).count(),
        scores,
        error: None,
    })
}

/// One scene of a split. `predictions` carries the load error, if any.
pub struct SceneInput<'a> {
    pub name: String,
    pub model: &'a SceneModel,
    pub predictions: std::result::Result<PredictionSet, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub scenes: Vec<SceneReport>,
    /// Mean over scenes; failed scenes contribute zeros.
    pub aggregate: ApMetrics,
    pub failed: usize,
}

/// Evaluates every scene; a scene that fails is reported and scored as zero.
pub fn evaluate_split(
    scenes: &[SceneInput<'_>],
    params: &ScoringParams,
    config: &EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    params.validate()?;
    let reports: Vec<SceneReport> = scenes
        .par_iter()
        .map(|s| match &s.predictions {
            Ok(set) => evaluate_scene(&s.name, s.model, set, params, config)
                .unwrap_or_else(|e| SceneReport::failed(&s.name, e.to_string(), config)),
            Err(e) => SceneReport::failed(&s.name, e.clone(), config),
        })
        .collect();
    let metrics: Vec<ApMetrics> = reports.iter().map(|r| r.metrics.clone()).collect();
    Ok(EvalReport {
        config: config.clone(),
        aggregate: ApMetrics::mean(&metrics, &config.thresholds),
        failed: reports.iter().filter(|r| r.error.is_some()).count(),
        scenes: reports,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One row per scene plus an `aggregate` row.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["scene".to_string(), "status".into(), "ap".into(), "ap_top1".into()];
        for s in &self.config.thresholds {
            header.push(format!("ap_{s}"));
        }
        for s in &self.config.thresholds {
            header.push(format!("ap_top1_{s}"));
        }
        header.extend(["total", "suppressed", "evaluated", "unassociated", "collisions"].map(String::from));
        let mut out = header.join(",") + "\n";
        let row = |name: &str, status: &str, m: &ApMetrics, counts: [usize; 5]| {
            let mut cells = vec![name.to_string(), status.to_string(), m.ap.to_string(), m.ap_top1.to_string()];
            cells.extend(m.ap_s.iter().map(|v| v.to_string()));
            cells.extend(m.ap_s_top1.iter().map(|v| v.to_string()));
            cells.extend(counts.iter().map(|v| v.to_string()));
            cells.join(",") + "\n"
        };
        for r in &self.scenes {
            let status = if r.error.is_some() { "failed" } else { "ok" };
            out += &row(
                &r.name,
                status,
                &r.metrics,
                [r.total, r.suppressed, r.evaluated, r.unassociated, r.collisions],
            );
        }
        let sum = |f: fn(&SceneReport) -> usize| self.scenes.iter().map(f).sum::<usize>();
        out += &row(
            "aggregate",
            if self.failed == 0 { "ok" } else { "partial" },
            &self.aggregate,
            [
                sum(|r| r.total),
                sum(|r| r.suppressed),
                sum(|r| r.evaluated),
                sum(|r| r.unassociated),
                sum(|r| r.collisions),
            ],
        );
        out
    }
}
