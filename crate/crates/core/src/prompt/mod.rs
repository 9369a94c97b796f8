//! Prompt assembly: marked views, optional coordinates-as-text, task wording
//! and the chain-of-thought prefix, packaged as a self-contained bundle.

mod bundle;
mod hint;
mod points_text;
mod template;

pub use bundle::{assemble_prompt, read_bundle, write_bundle, AssembleOptions, PromptBundle};
pub use hint::reference_point_hint;
pub use points_text::{
    parse_points_text, serialize_points_text, DEFAULT_POINTS_BUDGET, DEFAULT_POINTS_DECIMALS,
    POINTS_HEADER,
};
pub use template::{AnswerShape, TaskKind, TaskTemplate, COT_PREFIX};

use thiserror::Error;

use crate::geometry::InstanceId;

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("no views to assemble")]
    NoViews,
    #[error("template slot {{{0}}} has no value")]
    UnfilledSlot(String),
    #[error("task text is empty")]
    EmptyTask,
    #[error("points budget must be at least 1")]
    InvalidBudget,
    #[error("no instance other than {0} to reference")]
    NoOtherInstance(InstanceId),
    #[error("malformed bundle: {0}")]
    MalformedBundle(String),
    #[error("malformed points text at line {line}: {reason}")]
    MalformedPoints { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
