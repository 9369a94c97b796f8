use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::client::{BackoffPolicy, ClientConfig, OracleConfig};
use crate::eval::{EvalThresholds, NormalizerMode, RouteCriteria, DEFAULT_CLEARANCE_M, DEFAULT_SLACK_M};
use crate::geometry::{Align, Rgb};
use crate::marks::{default_palette, MarkStyle, MarkVariant, DEFAULT_DILATION_PX};
use crate::prompt::{AnswerShape, TaskKind, DEFAULT_POINTS_BUDGET, DEFAULT_POINTS_DECIMALS};
use crate::render::{
    RenderSettings, RigSpec, DEFAULT_DISTANCE_SCALE, DEFAULT_ELEVATION_DEG, DEFAULT_IMAGE_SIZE,
    DEFAULT_SPLAT_PX, DEFAULT_VFOV_DEG,
};

/// How scene files are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneAdapter {
    /// PLY or XYZ with an optional `instance_id` vertex property.
    #[default]
    Generic,
    /// Generic reader plus a built-in table folding ScanNet raw category
    /// names onto common furniture classes.
    Scannet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenesConfig {
    pub paths: Vec<PathBuf>,
    pub adapter: SceneAdapter,
    pub align: Align,
    /// Extra label renames applied after the adapter's own table.
    pub label_map: BTreeMap<String, String>,
    /// Directory of externally produced masks, laid out as
    /// `<masks_dir>/<scene_id>/view{j}_inst{i}.png`.
    pub masks_dir: Option<PathBuf>,
    /// Number of generated scenes appended after the files.
    pub synthetic: usize,
}

impl Default for ScenesConfig {
    fn default() -> Self {
        Self {
            paths: Vec::new(),
            adapter: SceneAdapter::Generic,
            align: Align::Pca,
            label_map: BTreeMap::new(),
            masks_dir: None,
            synthetic: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigConfig {
    pub n_views: usize,
    pub elevation_deg: f64,
    pub distance_scale: f64,
    pub image_size: u32,
    pub vfov_deg: f64,
    pub splat_px: u32,
    /// Use orthographic top/front/side views instead of the orbit.
    pub triview: bool,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            n_views: 8,
            elevation_deg: DEFAULT_ELEVATION_DEG,
            distance_scale: DEFAULT_DISTANCE_SCALE,
            image_size: DEFAULT_IMAGE_SIZE,
            vfov_deg: DEFAULT_VFOV_DEG,
            splat_px: DEFAULT_SPLAT_PX,
            triview: false,
        }
    }
}

impl RigConfig {
    pub fn spec(&self) -> RigSpec {
        RigSpec {
            n_views: self.n_views,
            elevation_deg: self.elevation_deg,
            distance_scale: self.distance_scale,
            image_size: self.image_size,
            vfov_deg: self.vfov_deg,
        }
    }

    pub fn settings(&self) -> RenderSettings {
        RenderSettings {
            splat_px: self.splat_px,
            ..RenderSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisConfig {
    /// Meters between ticks; chosen from the scene size when absent.
    pub tick_interval: Option<f64>,
    pub show_ticks: bool,
    pub show_labels: bool,
}

impl Default for AxisConfig {
    fn default() -> Self {
        Self {
            tick_interval: None,
            show_ticks: true,
            show_labels: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarksConfig {
    /// When false objects are still lettered in the task, but nothing is
    /// drawn.
    pub enabled: bool,
    pub style: MarkVariant,
    pub palette: Vec<Rgb>,
    pub dilation_px: u32,
}

impl Default for MarksConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            style: MarkVariant::MarkPlusContour,
            palette: default_palette(),
            dilation_px: DEFAULT_DILATION_PX,
        }
    }
}

impl MarksConfig {
    pub fn mark_style(&self) -> MarkStyle {
        MarkStyle {
            variant: if self.enabled {
                self.style
            } else {
                MarkVariant::LetterMark
            },
            palette: self.palette.clone(),
            dilation_px: self.dilation_px,
        }
    }

    pub fn drawn_variant(&self) -> Option<MarkVariant> {
        self.enabled.then_some(self.style)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointsConfig {
    pub enabled: bool,
    pub budget: usize,
    pub decimals: usize,
}

impl Default for PointsConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            budget: DEFAULT_POINTS_BUDGET,
            decimals: DEFAULT_POINTS_DECIMALS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    pub answer_shape: AnswerShape,
    /// Slot values; letters default to `A` (and `B` for a second object),
    /// and localize defaults to every marked object.
    pub slots: BTreeMap<String, String>,
    pub cot: bool,
    pub context: Option<String>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            kind: TaskKind::Localize,
            answer_shape: AnswerShape::Point,
            slots: BTreeMap::new(),
            cot: false,
            context: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    pub api_key_env: String,
    pub max_in_flight: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    pub headers: BTreeMap<String, String>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        let c = ClientConfig::default();
        Self {
            url: "https://api.openai.com/v1/chat/completions".into(),
            model: c.model,
            api_key_env: "OPENAI_API_KEY".into(),
            max_in_flight: c.max_in_flight,
            temperature: c.temperature,
            max_tokens: c.max_tokens,
            timeout_secs: 120,
            headers: BTreeMap::new(),
        }
    }
}

impl EndpointConfig {
    pub fn client_config(&self) -> ClientConfig {
        ClientConfig {
            model: self.model.clone(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            max_in_flight: self.max_in_flight,
            backoff: BackoffPolicy::default(),
        }
    }
}

/// Offline oracle settings; its seed is the top-level `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockConfig {
    pub noise_sigma: f64,
    pub failure_rate: f64,
    pub view_gain: f64,
    pub planning_clearance: f64,
}

impl Default for MockConfig {
    fn default() -> Self {
        let o = OracleConfig::default();
        Self {
            noise_sigma: o.noise_sigma,
            failure_rate: o.failure_rate,
            view_gain: o.view_gain,
            planning_clearance: o.planning_clearance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub clearance: f64,
    pub arrival_tolerance: f64,
    pub check_collisions: bool,
    pub slack: f64,
    pub normalizer: NormalizerMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let r = RouteCriteria::default();
        Self {
            clearance: DEFAULT_CLEARANCE_M,
            arrival_tolerance: r.arrival_tolerance,
            check_collisions: r.check_collisions,
            slack: DEFAULT_SLACK_M,
            normalizer: NormalizerMode::MaxSide,
        }
    }
}

impl EvalConfig {
    pub fn thresholds(&self) -> EvalThresholds {
        EvalThresholds {
            route: RouteCriteria {
                clearance: self.clearance,
                arrival_tolerance: self.arrival_tolerance,
                check_collisions: self.check_collisions,
            },
            slack: self.slack,
        }
    }
}

/// Every knob of a run. Ablation arms are copies differing in one key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub scenes: ScenesConfig,
    pub rig: RigConfig,
    pub axis: AxisConfig,
    pub marks: MarksConfig,
    pub points: PointsConfig,
    pub task: TaskConfig,
    pub endpoint: EndpointConfig,
    pub mock: MockConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            scenes: ScenesConfig::default(),
            rig: RigConfig::default(),
            axis: AxisConfig::default(),
            marks: MarksConfig::default(),
            points: PointsConfig::default(),
            task: TaskConfig::default(),
            endpoint: EndpointConfig::default(),
            mock: MockConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

/// Parses an override value as a TOML value, falling back to a bare string
/// so `--set marks.style=obb3d` needs no quoting.
fn override_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `dotted.key=value` to a raw config table.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {assignment:?} is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key {key:?} is malformed")));
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key {key:?}: {p} is not a table")))?;
    }
    cur.insert(last.to_string(), override_value(raw.trim()));
    Ok(())
}

impl PipelineConfig {
    /// Parses TOML text, applies overrides and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path` (or the defaults when `None`) with overrides applied.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(CliError::io(p))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.rig.n_views == 0 {
            return bad("rig.n_views must be at least 1".into());
        }
        if self.rig.image_size < 16 {
            return bad(format!("rig.image_size {} is below 16 px", self.rig.image_size));
        }
        if self.rig.splat_px == 0 {
            return bad("rig.splat_px must be at least 1".into());
        }
        if let Some(t) = self.axis.tick_interval {
            if !(t > 0.0) {
                return bad(format!("axis.tick_interval {t} must be positive"));
            }
        }
        if self.marks.palette.is_empty() {
            return bad("marks.palette is empty".into());
        }
        if self.points.budget == 0 {
            return bad("points.budget must be positive".into());
        }
        if self.endpoint.max_in_flight == 0 {
            return bad("endpoint.max_in_flight must be at least 1".into());
        }
        self.oracle()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        for p in &self.scenes.paths {
            if !p.exists() {
                return bad(format!("scene file {} does not exist", p.display()));
            }
        }
        if let Some(d) = &self.scenes.masks_dir {
            if !d.is_dir() {
                return bad(format!("masks_dir {} is not a directory", d.display()));
            }
        }
        if self.scenes.paths.is_empty() && self.scenes.synthetic == 0 {
            return bad("no scenes: set scenes.paths or scenes.synthetic".into());
        }
        Ok(())
    }

    pub fn oracle(&self) -> OracleConfig {
        OracleConfig {
            noise_sigma: self.mock.noise_sigma,
            seed: self.seed,
            failure_rate: self.mock.failure_rate,
            view_gain: self.mock.view_gain,
            planning_clearance: self.mock.planning_clearance,
        }
    }
}
