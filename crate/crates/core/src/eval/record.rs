use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{
    action_success, dist_to_bbx, dist_to_center, route_success, ActionKind, RouteCriteria,
    DEFAULT_SLACK_M,
};
use super::parse::{parse_answer, parse_localize, Prediction, PredictionKind};
use super::truth::{letters_in, SceneTruth};
use super::EvalError;
use crate::geometry::{Aabb, InstanceId, Vec3};
use crate::prompt::{AnswerShape, PromptBundle, TaskKind};

/// The question a bundle asks, detached from its images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskQuery {
    pub kind: TaskKind,
    pub answer_shape: AnswerShape,
    pub slots: BTreeMap<String, String>,
}

impl TaskQuery {
    pub fn from_bundle(b: &PromptBundle) -> Self {
        Self {
            kind: b.template_kind,
            answer_shape: b.answer_shape,
            slots: b.slots.clone(),
        }
    }

    fn slot(&self, name: &str) -> Result<&str, EvalError> {
        self.slots
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| EvalError::MissingSlot(name.to_string()))
    }

    /// Single object letter held by a slot.
    pub fn letter(&self, name: &str) -> Result<char, EvalError> {
        letters_in(self.slot(name)?)
            .first()
            .copied()
            .ok_or_else(|| EvalError::MissingSlot(name.to_string()))
    }

    pub fn letters(&self, name: &str) -> Result<Vec<char>, EvalError> {
        Ok(letters_in(self.slot(name)?))
    }

    pub fn keypoint_names(&self) -> Result<Vec<String>, EvalError> {
        Ok(self
            .slot("names")?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalThresholds {
    pub route: RouteCriteria,
    pub slack: f64,
}

impl Default for EvalThresholds {
    fn default() -> Self {
        Self {
            route: RouteCriteria::default(),
            slack: DEFAULT_SLACK_M,
        }
    }
}

/// One scored object (or keypoint, or route) of one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub scene_id: String,
    pub instance_id: InstanceId,
    pub task: TaskKind,
    pub answer_shape: AnswerShape,
    pub prediction: Prediction,
    pub truth_center: Vec3,
    pub truth_box: Aabb,
    pub d_center: Option<f64>,
    pub d_bbx: Option<f64>,
    pub verdict: Option<bool>,
    pub iou: Option<f64>,
    pub parse_ok: bool,
    pub normalizer: f64,
}

impl EvalRecord {
    fn new(truth: &SceneTruth, id: InstanceId, q: &TaskQuery, pred: Prediction, b: Aabb) -> Self {
        let at = pred.location();
        Self {
            scene_id: truth.scene_id.clone(),
            instance_id: id,
            task: q.kind,
            answer_shape: q.answer_shape,
            parse_ok: pred.parse_ok,
            d_center: at.map(|p| dist_to_center(&p, &b.center())),
            d_bbx: at.map(|p| dist_to_bbx(&p, &b)),
            iou: pred.bbox.map(|p| p.iou(&b)),
            prediction: pred,
            truth_center: b.center(),
            truth_box: b,
            verdict: None,
            normalizer: truth.normalizer,
        }
    }

    /// Whether this record enters the normalized localization error.
    pub fn is_localization(&self) -> bool {
        self.task == TaskKind::Localize
    }
}

/// Parses `text` as the answer to `query` and scores it against `truth`.
pub fn score_response(
    query: &TaskQuery,
    text: &str,
    truth: &SceneTruth,
    th: &EvalThresholds,
) -> Result<Vec<EvalRecord>, EvalError> {
    match query.kind {
        TaskKind::Localize => {
            let letters = query.letters("objects")?;
            let kind = match query.answer_shape {
                AnswerShape::Point => PredictionKind::Point3d,
                AnswerShape::Box => PredictionKind::Box3d,
            };
            let mut preds = parse_localize(text, &letters, kind);
            letters
                .iter()
                .map(|l| {
                    let o = truth.object(*l)?;
                    let pred = preds.remove(l).unwrap_or_else(|| Prediction::failed(kind, text));
                    Ok(EvalRecord::new(truth, o.instance_id, query, pred, o.bbox))
                })
                .collect()
        }
        TaskKind::Grasp | TaskKind::Release => {
            let object = truth.object(query.letter("object")?)?;
            let (action, scored) = if query.kind == TaskKind::Grasp {
                (ActionKind::Grasp, object)
            } else {
                (ActionKind::Release, truth.object(query.letter("target")?)?)
            };
            let pred = parse_answer(text, PredictionKind::Point3d);
            let verdict = pred
                .point
                .is_some_and(|p| action_success(&p, action, &object.bbox, &scored.bbox, th.slack));
            let mut r = EvalRecord::new(truth, scored.instance_id, query, pred, scored.bbox);
            r.verdict = Some(verdict);
            Ok(vec![r])
        }
        TaskKind::RoutePlan => {
            let (s, g) = (query.letter("start")?, query.letter("goal")?);
            let (start, goal) = (truth.object(s)?, truth.object(g)?);
            let pred = parse_answer(text, PredictionKind::Path3d);
            let obstacles = truth.obstacles_except(&[s, g]);
            let verdict = pred.path.as_ref().is_some_and(|p| {
                route_success(p, &start.bbox, &goal.bbox, &obstacles, &th.route)
            });
            let end = pred.path.as_ref().and_then(|p| p.last().copied());
            let mut r = EvalRecord::new(truth, goal.instance_id, query, pred, goal.bbox);
            r.d_center = end.map(|p| dist_to_center(&p, &goal.bbox.center()));
            r.d_bbx = end.map(|p| dist_to_bbx(&p, &goal.bbox));
            r.verdict = Some(verdict);
            Ok(vec![r])
        }
        TaskKind::Keypoints => {
            let object = truth.object(query.letter("object")?)?;
            let names = query.keypoint_names()?;
            let pred = parse_answer(text, PredictionKind::Keypoints);
            let found: BTreeMap<String, Vec3> =
                pred.keypoints.clone().unwrap_or_default().into_iter().collect();
            names
                .iter()
                .map(|n| {
                    let kp = *truth
                        .keypoints
                        .get(n)
                        .ok_or_else(|| EvalError::UnknownKeypoint(n.clone()))?;
                    let at = found.get(n).copied();
                    let p = match at {
                        Some(p) => Prediction {
                            kind: PredictionKind::Keypoints,
                            keypoints: Some(vec![(n.clone(), p)]),
                            ..Prediction::from_point(p, text)
                        },
                        None => Prediction::failed(PredictionKind::Keypoints, text),
                    };
                    let b = Aabb::from_corners(kp, kp);
                    let mut r = EvalRecord::new(truth, object.instance_id, query, p, b);
                    r.d_center = at.map(|p| dist_to_center(&p, &kp));
                    r.d_bbx = r.d_center;
                    Ok(r)
                })
                .collect()
        }
    }
}
