//! Pipeline driver behind the `axisprompt` binary: declarative config,
//! synthetic scenes, per-scene prompt generation, evaluation runs, ablation
//! sweeps and RGB-D conversion.

mod ablate;
mod commands;
mod config;
mod pipeline;
mod synth;

pub use ablate::{ablation_arms, cmd_ablate, AblationArm, Sweep, MARK_ARMS, VIEW_COUNTS};
pub use commands::{cmd_convert, cmd_eval, cmd_render, cmd_synth, run_eval, EvalMode, EvalOutcome};
pub use config::{
    apply_override, AxisConfig, EndpointConfig, EvalConfig, MarksConfig, MockConfig,
    PipelineConfig, PointsConfig, RigConfig, SceneAdapter, ScenesConfig, TaskConfig,
};
pub use pipeline::{build_template, load_scenes, prepare_scene, PreparedScene, SceneInput};
pub use synth::{synthetic_scene, synthetic_scene_id, SYNTH_LABELS};

use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use crate::client::ClientError;
use crate::eval::EvalError;
use crate::geometry::GeometryError;
use crate::marks::MarksError;
use crate::prompt::PromptError;
use crate::render::RenderError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scene {scene}: {source}")]
    Scene {
        scene: String,
        #[source]
        source: Box<CliError>,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Marks(#[from] MarksError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CliError {
    pub(crate) fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn in_scene(self, scene: &str) -> CliError {
        CliError::Scene {
            scene: scene.to_string(),
            source: Box::new(self),
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io { .. } => "io",
            Self::Scene { source, .. } => source.kind(),
            Self::Geometry(_) => "geometry",
            Self::Render(_) => "render",
            Self::Marks(_) => "marks",
            Self::Prompt(_) => "prompt",
            Self::Client(_) => "client",
            Self::Eval(_) => "eval",
        }
    }

    /// Error report written to stderr by the binary.
    pub fn to_json(&self) -> serde_json::Value {
        let scene = match self {
            Self::Scene { scene, .. } => Some(scene.as_str()),
            _ => None,
        };
        json!({ "error": self.kind(), "message": self.to_string(), "scene": scene })
    }
}
