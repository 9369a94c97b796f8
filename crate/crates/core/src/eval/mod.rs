//! Answer parsing and scoring: normalized localization error (to center and
//! to box), route, grasp and release success, box IoU accuracy, keypoint
//! skeletons, and run reports.

mod metrics;
mod parse;
mod record;
mod skeleton;
mod summary;
mod truth;

pub use metrics::{
    acc_at_iou, action_success, dist_to_bbx, dist_to_center, nrmse, route_success,
    segment_box_distance, ActionKind, RouteCriteria, SceneErrors, DEFAULT_CLEARANCE_M,
    DEFAULT_SLACK_M,
};
pub use parse::{parse_answer, parse_labeled, parse_localize, Prediction, PredictionKind};
pub use record::{score_response, EvalRecord, EvalThresholds, TaskQuery};
pub use skeleton::{build_skeleton, chair_template, LineSet, SkeletonTemplate};
pub use summary::{
    markdown_table, read_results_jsonl, summarize, summary_csv, write_report,
    write_results_jsonl, RunSummary,
};
pub use truth::{letters_in, scene_normalizer, NormalizerMode, ObjectTruth, SceneTruth};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no records to evaluate")]
    EmptyRun,
    #[error("normalizer {0} must be positive")]
    InvalidNormalizer(f64),
    #[error("{predictions} predictions for {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("unknown keypoint {0:?}")]
    UnknownKeypoint(String),
    #[error("no object lettered {0} in the ground truth")]
    UnknownObject(char),
    #[error("query has no {0:?} slot")]
    MissingSlot(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
