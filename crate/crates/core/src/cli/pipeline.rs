use std::path::Path;

use rayon::prelude::*;

use super::config::{PipelineConfig, SceneAdapter};
use super::synth::{synthetic_scene, synthetic_scene_id};
use super::CliError;
use crate::eval::{letters_in, SceneTruth};
use crate::geometry::{normalize_scene, parse_point_file, PointCloud, PointFileFormat, SceneFrame};
use crate::marks::{
    embed_3d_marks, load_mask_png, mask_file_name, overlay_marks, plan_marks, project_plan_masks,
    InstanceMask, MarkPlan, MarksError,
};
use crate::prompt::{assemble_prompt, AssembleOptions, PromptBundle, TaskKind, TaskTemplate};
use crate::render::{
    build_axis, make_camera_rig_with, make_triview_sized, render_view_with, AxisSpec, RenderedView,
};

/// ScanNet raw category names folded onto common classes.
const SCANNET_LABELS: [(&str, &str); 12] = [
    ("office chair", "chair"),
    ("desk chair", "chair"),
    ("armchair", "chair"),
    ("couch", "sofa"),
    ("sofa chair", "sofa"),
    ("kitchen cabinet", "cabinet"),
    ("kitchen cabinets", "cabinet"),
    ("file cabinet", "cabinet"),
    ("coffee table", "table"),
    ("end table", "table"),
    ("desk", "table"),
    ("tv", "television"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SceneInput {
    pub id: String,
    pub cloud: PointCloud,
}

fn remap_labels(cloud: &mut PointCloud, cfg: &PipelineConfig) {
    for name in cloud.semantic_labels.values_mut() {
        if cfg.scenes.adapter == SceneAdapter::Scannet {
            let lower = name.to_ascii_lowercase().replace('_', " ");
            if let Some((_, to)) = SCANNET_LABELS.iter().find(|(from, _)| *from == lower) {
                *name = to.to_string();
            }
        }
        if let Some(to) = cfg.scenes.label_map.get(name.as_str()) {
            *name = to.clone();
        }
    }
}

fn load_file(path: &Path) -> Result<SceneInput, CliError> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    let format = PointFileFormat::detect(path, &bytes).ok_or_else(|| {
        CliError::Config(format!("{}: unrecognized point file format", path.display()))
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into());
    let cloud = parse_point_file(&bytes, format).map_err(|e| CliError::from(e).in_scene(&id))?;
    Ok(SceneInput { id, cloud })
}

/// Scene files in config order followed by the generated scenes.
pub fn load_scenes(cfg: &PipelineConfig) -> Result<Vec<SceneInput>, CliError> {
    let mut out = Vec::new();
    for p in &cfg.scenes.paths {
        out.push(load_file(p)?);
    }
    for i in 0..cfg.scenes.synthetic {
        out.push(SceneInput {
            id: synthetic_scene_id(i),
            cloud: synthetic_scene(i, cfg.seed),
        });
    }
    for s in &mut out {
        remap_labels(&mut s.cloud, cfg);
    }
    let mut ids: Vec<&str> = out.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!("duplicate scene id {}", w[0])));
    }
    Ok(out)
}

fn letter_slot(cfg: &PipelineConfig, plan: &MarkPlan, name: &str, default: char) -> Result<char, CliError> {
    let letter = match cfg.task.slots.get(name) {
        Some(v) => {
            let l = letters_in(v);
            if l.len() != 1 {
                return Err(CliError::Config(format!("task slot {name}={v:?} must be one letter")));
            }
            l[0]
        }
        None => default,
    };
    if plan.instance_of(letter).is_none() {
        return Err(CliError::Config(format!("task slot {name}: no object lettered {letter}")));
    }
    Ok(letter)
}

/// The task for one scene, with letters checked against its mark plan.
pub fn build_template(cfg: &PipelineConfig, plan: &MarkPlan) -> Result<TaskTemplate, CliError> {
    let t = &cfg.task;
    let template = match t.kind {
        TaskKind::Localize => {
            let letters: Vec<char> = match t.slots.get("objects") {
                Some(v) => letters_in(v),
                None => plan.entries.iter().map(|e| e.letter).collect(),
            };
            if letters.is_empty() {
                return Err(CliError::Config("localize task has no objects".into()));
            }
            if let Some(l) = letters.iter().find(|l| plan.instance_of(**l).is_none()) {
                return Err(CliError::Config(format!("no object lettered {l}")));
            }
            TaskTemplate::localize(&letters, t.answer_shape)
        }
        TaskKind::RoutePlan => TaskTemplate::route_plan(
            letter_slot(cfg, plan, "start", 'A')?,
            letter_slot(cfg, plan, "goal", 'B')?,
        ),
        TaskKind::Grasp => TaskTemplate::grasp(letter_slot(cfg, plan, "object", 'A')?),
        TaskKind::Release => TaskTemplate::release(
            letter_slot(cfg, plan, "object", 'A')?,
            letter_slot(cfg, plan, "target", 'B')?,
        ),
        TaskKind::Keypoints => {
            let names = t
                .slots
                .get("names")
                .ok_or_else(|| CliError::Config("keypoints task needs slot names".into()))?;
            let names: Vec<&str> = names.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            TaskTemplate::keypoints(letter_slot(cfg, plan, "object", 'A')?, &names)
        }
    };
    Ok(match &t.context {
        Some(c) => template.with_context(c.clone()),
        None => template,
    })
}

/// Everything derived from one scene for one config.
#[derive(Debug, Clone)]
pub struct PreparedScene {
    pub id: String,
    pub frame: SceneFrame,
    pub plan: MarkPlan,
    pub views: Vec<RenderedView>,
    pub bundle: PromptBundle,
    pub truth: SceneTruth,
}

fn imported_masks(
    dir: &Path,
    scene: &str,
    view_index: usize,
    view: &RenderedView,
    plan: &MarkPlan,
) -> Result<Vec<InstanceMask>, CliError> {
    plan.entries
        .iter()
        .map(|e| {
            let path = dir.join(scene).join(mask_file_name(view_index, e.instance_id));
            let bytes = std::fs::read(&path).map_err(|_| MarksError::MissingMask(e.instance_id))?;
            Ok(load_mask_png(&bytes, e.instance_id, (view.width(), view.height()))?)
        })
        .collect()
}

/// Normalizes, marks, renders and assembles the prompt for one scene.
pub fn prepare_scene(cfg: &PipelineConfig, input: &SceneInput) -> Result<PreparedScene, CliError> {
    let run = || -> Result<PreparedScene, CliError> {
        let frame = normalize_scene(&input.cloud, cfg.scenes.align)?;
        let style = cfg.marks.mark_style();
        let plan = plan_marks(&frame.cloud, &style, None)?;
        let template = build_template(cfg, &plan)?;

        let mut spec = AxisSpec::for_scene(&frame, cfg.axis.tick_interval);
        spec.show_ticks = cfg.axis.show_ticks;
        spec.show_labels = cfg.axis.show_labels;
        let mut overlay = build_axis(&frame, &spec)?;
        let drawn = cfg.marks.drawn_variant();
        if drawn.is_some_and(|v| v.is_3d()) {
            overlay.extend(embed_3d_marks(&frame, &plan)?);
        }

        let cameras = if cfg.rig.triview {
            make_triview_sized(&frame, cfg.rig.image_size)
        } else {
            make_camera_rig_with(&frame, &cfg.rig.spec())
        };
        let settings = cfg.rig.settings();
        let mut views: Vec<RenderedView> = cameras
            .par_iter()
            .map(|cam| render_view_with(&frame, &overlay, cam, &settings))
            .collect();

        if drawn.is_some_and(|v| v.is_2d()) {
            views = views
                .iter()
                .enumerate()
                .map(|(j, view)| {
                    let masks = match &cfg.scenes.masks_dir {
                        Some(dir) => imported_masks(dir, &input.id, j, view, &plan)?,
                        None => project_plan_masks(view, &frame, &plan)?,
                    };
                    Ok(overlay_marks(view, &masks, &plan)?)
                })
                .collect::<Result<_, CliError>>()?;
        }

        let opts = AssembleOptions {
            scene_id: input.id.clone(),
            include_points: cfg.points.enabled,
            cot: cfg.task.cot,
            points_budget: cfg.points.budget,
            points_decimals: cfg.points.decimals,
            mark_style: drawn,
        };
        let bundle = assemble_prompt(&views, &frame, &template, &opts)?;
        let truth = SceneTruth::from_scene(&input.id, &frame, &plan, cfg.eval.normalizer)?;
        Ok(PreparedScene {
            id: input.id.clone(),
            frame,
            plan,
            views,
            bundle,
            truth,
        })
    };
    run().map_err(|e| match e {
        e @ CliError::Scene { .. } => e,
        e => e.in_scene(&input.id),
    })
}
