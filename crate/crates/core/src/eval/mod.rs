//! Benchmark evaluation: associate predictions to objects, score them with the
//! analytic models, suppress duplicates, and compute Precision@k based AP.

mod metrics;
mod report;

pub use metrics::{ap_metrics, precision_at_k, ApMetrics};
pub use report::{evaluate_scene, evaluate_split, EvalReport, SceneInput, SceneReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::SuctionPose;
use crate::scene::{below_table, check_collision, Association, CollisionParams, SceneModel};
use crate::seal::{CupModel, SealParams};
use crate::wrench::{wrench_score, WrenchParams};

/// Frame the rows of a prediction file are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionFrame {
    World,
    /// Index into the scene's camera poses.
    Camera(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub pose: SuctionPose,
    pub confidence: f64,
}

impl Prediction {
    pub fn new(pose: SuctionPose, confidence: f64) -> Result<Self> {
        if !confidence.is_finite() {
            return Err(Error::InvalidInput(format!("confidence must be finite, got {confidence}")));
        }
        Ok(Prediction { pose, confidence })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub frame: PredictionFrame,
    pub predictions: Vec<Prediction>,
}

impl PredictionSet {
    pub fn world(predictions: Vec<Prediction>) -> Self {
        PredictionSet {
            frame: PredictionFrame::World,
            predictions,
        }
    }

    /// Predictions mapped into the world frame of `model`.
    pub fn to_world(&self, model: &SceneModel) -> Result<Vec<Prediction>> {
        match self.frame {
            PredictionFrame::World => Ok(self.predictions.clone()),
            PredictionFrame::Camera(i) => {
                let cam = model.scene().camera_pose(i)?;
                Ok(self
                    .predictions
                    .iter()
                    .map(|p| Prediction {
                        pose: p.pose.transformed(cam),
                        confidence: p.confidence,
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub thresholds: Vec<f64>,
    pub top_k: usize,
    pub per_object_cap: usize,
    pub nms_radius: f64,
    pub association_distance: f64,
    /// Score colliding predictions as 0.
    pub penalize_collisions: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            thresholds: vec![0.2, 0.4, 0.6, 0.8],
            top_k: 50,
            per_object_cap: 10,
            nms_radius: 0.02,
            association_distance: 0.05,
            penalize_collisions: true,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() {
            return Err(Error::InvalidInput("at least one threshold required".into()));
        }
        if self.thresholds.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
            return Err(Error::InvalidInput("thresholds must lie in (0, 1)".into()));
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("thresholds must be strictly increasing".into()));
        }
        if self.top_k == 0 || self.per_object_cap == 0 {
            return Err(Error::InvalidInput("top_k and per_object_cap must be positive".into()));
        }
        if !(self.nms_radius >= 0.0 && self.nms_radius.is_finite()) {
            return Err(Error::InvalidInput("nms_radius must be non-negative".into()));
        }
        if !(self.association_distance > 0.0 && self.association_distance.is_finite()) {
            return Err(Error::InvalidInput("association_distance must be positive".into()));
        }
        Ok(())
    }
}

/// Model parameters used to score predictions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoringParams {
    pub cup: CupModel,
    pub seal: SealParams,
    /// Gravity is taken from the scene.
    pub wrench: WrenchParams,
    pub collision: CollisionParams,
}

impl ScoringParams {
    pub fn validate(&self) -> Result<()> {
        self.cup.validate()?;
        self.seal.validate()?;
        self.wrench.validate()?;
        self.collision.validate()
    }
}

pub fn associate(pred: &Prediction, model: &SceneModel, config: &EvalConfig) -> Option<Association> {
    model.associate(pred.pose.point(), config.association_distance)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionScore {
    pub seal: f64,
    pub wrench: f64,
    pub collision_free: bool,
    /// `seal * wrench`, or 0 when unassociated or penalized for collision.
    pub score: f64,
}

impl PredictionScore {
    const ZERO: PredictionScore = PredictionScore {
        seal: 0.0,
        wrench: 0.0,
        collision_free: true,
        score: 0.0,
    };
}

/// Scores a world-frame prediction against its associated instance.
pub fn score_prediction(
    pred: &Prediction,
    association: Option<&Association>,
    model: &SceneModel,
    params: &ScoringParams,
    config: &EvalConfig,
) -> PredictionScore {
    let Some(a) = association else {
        return PredictionScore::ZERO;
    };
    let seal = model.seal_score(a.instance, &pred.pose, &params.cup, &params.seal).seal;
    let wrench_params = params.wrench.clone().with_gravity(*model.scene().gravity());
    let wrench = wrench_score(&pred.pose, &model.world_com(a.instance), &wrench_params).score;
    let collision_free = !(check_collision(model.cloud(), &pred.pose, &params.collision)
        || (params.collision.check_table && below_table(&pred.pose, &params.collision)));
    let mut score = seal * wrench;
    if config.penalize_collisions && !collision_free {
        score = 0.0;
    }
    PredictionScore {
        seal,
        wrench,
        collision_free,
        score,
    }
}

/// Indices sorted by confidence, highest first; ties keep input order.
pub fn rank_order(preds: &[Prediction]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));
    order
}

/// Greedy suppression in confidence order. Returns kept indices in rank order.
///
/// A prediction is dropped if it lies within `nms_radius` of an already kept
/// one, or if its associated object already holds `per_object_cap` kept
/// predictions. Unassociated predictions are never capped.
pub fn nms(preds: &[Prediction], associations: &[Option<Association>], config: &EvalConfig) -> Vec<usize> {
    assert_eq!(preds.len(), associations.len());
    let r2 = config.nms_radius * config.nms_radius;
    let mut kept: Vec<usize> = Vec::new();
    let mut per_object: std::collections::HashMap<u32, usize> = Default::default();
    for i in rank_order(preds) {
        let p = preds[i].pose.point();
        if kept
            .iter()
            .any(|&k| (preds[k].pose.point() - p).norm_squared() <= r2)
        {
            continue;
        }
        if let Some(a) = &associations[i] {
            let count = per_object.entry(a.object_id).or_insert(0);
            if *count >= config.per_object_cap {
                continue;
            }
            *count += 1;
        }
        kept.push(i);
    }
    kept
}

/// Associations of every prediction, computed in parallel.
pub fn associate_all(preds: &[Prediction], model: &SceneModel, config: &EvalConfig) -> Vec<Option<Association>> {
    preds.par_iter().map(|p| associate(p, model, config)).collect()
}
