use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::points_text::{
    parse_points_text, serialize_points_text, DEFAULT_POINTS_BUDGET, DEFAULT_POINTS_DECIMALS,
};
use super::template::{AnswerShape, TaskKind, TaskTemplate};
use super::PromptError;
use crate::geometry::SceneFrame;
use crate::marks::MarkVariant;
use crate::render::RenderedView;

/// Everything sent for one scene, ready for the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub scene_id: String,
    /// PNG payloads in rig order.
    pub images: Vec<Vec<u8>>,
    pub points_text: Option<String>,
    pub task_text: String,
    pub cot: bool,
    pub template_kind: TaskKind,
    pub answer_shape: AnswerShape,
    pub slots: BTreeMap<String, String>,
    pub mark_style: Option<MarkVariant>,
}

#[derive(Debug, Clone)]
pub struct AssembleOptions {
    pub scene_id: String,
    pub include_points: bool,
    pub cot: bool,
    pub points_budget: usize,
    pub points_decimals: usize,
    pub mark_style: Option<MarkVariant>,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            scene_id: String::new(),
            include_points: false,
            cot: false,
            points_budget: DEFAULT_POINTS_BUDGET,
            points_decimals: DEFAULT_POINTS_DECIMALS,
            mark_style: None,
        }
    }
}

pub fn assemble_prompt(
    views: &[RenderedView],
    scene: &SceneFrame,
    template: &TaskTemplate,
    opts: &AssembleOptions,
) -> Result<PromptBundle, PromptError> {
    if views.is_empty() {
        return Err(PromptError::NoViews);
    }
    let task_text = template.render(opts.cot)?;
    let points_text = if opts.include_points {
        Some(serialize_points_text(scene, opts.points_budget, opts.points_decimals)?)
    } else {
        None
    };
    Ok(PromptBundle {
        scene_id: opts.scene_id.clone(),
        images: views.iter().map(RenderedView::png_bytes).collect(),
        points_text,
        task_text,
        cot: opts.cot,
        template_kind: template.kind,
        answer_shape: template.answer_shape,
        slots: template.slots.clone(),
        mark_style: opts.mark_style,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleMeta {
    scene_id: String,
    template_kind: TaskKind,
    cot: bool,
    mark_style: Option<MarkVariant>,
    answer_shape: AnswerShape,
    slots: BTreeMap<String, String>,
    n_images: usize,
    has_points: bool,
}

const POINTS_FILE: &str = "points.txt";
const TASK_FILE: &str = "task.txt";
const META_FILE: &str = "meta.json";

fn view_file(j: usize) -> String {
    format!("view_{j}.png")
}

/// Writes `view_{j}.png`, `task.txt`, `meta.json` and, when present,
/// `points.txt` into `dir`.
pub fn write_bundle(bundle: &PromptBundle, dir: &Path) -> Result<(), PromptError> {
    fs::create_dir_all(dir)?;
    for (j, png) in bundle.images.iter().enumerate() {
        fs::write(dir.join(view_file(j)), png)?;
    }
    if let Some(points) = &bundle.points_text {
        fs::write(dir.join(POINTS_FILE), points)?;
    }
    fs::write(dir.join(TASK_FILE), &bundle.task_text)?;
    let meta = BundleMeta {
        scene_id: bundle.scene_id.clone(),
        template_kind: bundle.template_kind,
        cot: bundle.cot,
        mark_style: bundle.mark_style,
        answer_shape: bundle.answer_shape,
        slots: bundle.slots.clone(),
        n_images: bundle.images.len(),
        has_points: bundle.points_text.is_some(),
    };
    fs::write(dir.join(META_FILE), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_bundle(dir: &Path) -> Result<PromptBundle, PromptError> {
    let meta: BundleMeta = serde_json::from_slice(&fs::read(dir.join(META_FILE))?)?;
    if meta.n_images == 0 {
        return Err(PromptError::MalformedBundle("bundle has no images".into()));
    }
    let images = (0..meta.n_images)
        .map(|j| fs::read(dir.join(view_file(j))))
        .collect::<Result<Vec<_>, _>>()?;
    let points_text = if meta.has_points {
        let text = fs::read_to_string(dir.join(POINTS_FILE))?;
        parse_points_text(&text)?;
        Some(text)
    } else {
        None
    };
    let task_text = fs::read_to_string(dir.join(TASK_FILE))?;
    if task_text.trim().is_empty() {
        return Err(PromptError::EmptyTask);
    }
    Ok(PromptBundle {
        scene_id: meta.scene_id,
        images,
        points_text,
        task_text,
        cot: meta.cot,
        template_kind: meta.template_kind,
        answer_shape: meta.answer_shape,
        slots: meta.slots,
        mark_style: meta.mark_style,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PointCloud, Vec3};
    use crate::prompt::template::COT_PREFIX;
    use crate::render::{make_camera_rig_with, render_view, Overlay3d, RigSpec};

    fn fixture(n_views: usize) -> (SceneFrame, Vec<RenderedView>) {
        let pts = (0..50)
            .map(|i| Vec3::new(i as f64 * 0.04, (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.2))
            .collect();
        let scene = SceneFrame::identity(PointCloud::from_positions(pts));
        let spec = RigSpec {
            n_views,
            image_size: 48,
            ..RigSpec::default()
        };
        let views = make_camera_rig_with(&scene, &spec)
            .iter()
            .map(|c| render_view(&scene, &Overlay3d::default(), c, 1))
            .collect();
        (scene, views)
    }

    #[test]
    fn images_follow_rig_order() {
        let (scene, views) = fixture(8);
        let b = assemble_prompt(
            &views,
            &scene,
            &TaskTemplate::grasp('A'),
            &AssembleOptions::default(),
        )
        .unwrap();
        assert_eq!(b.images.len(), 8);
        for (img, v) in b.images.iter().zip(&views) {
            assert_eq!(img, &v.png_bytes());
        }
        assert!(b.points_text.is_none());
        assert!(!b.task_text.starts_with(COT_PREFIX));
    }

    #[test]
    fn directory_round_trip_is_lossless() {
        let (scene, views) = fixture(2);
        let opts = AssembleOptions {
            scene_id: "scene_7".into(),
            include_points: true,
            cot: true,
            mark_style: Some(MarkVariant::MarkPlusContour),
            ..AssembleOptions::default()
        };
        let b = assemble_prompt(&views, &scene, &TaskTemplate::route_plan('A', 'B'), &opts)
            .unwrap();
        assert!(b.task_text.starts_with(COT_PREFIX));
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&b, dir.path()).unwrap();
        for f in ["view_0.png", "view_1.png", "points.txt", "task.txt", "meta.json"] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        assert_eq!(read_bundle(dir.path()).unwrap(), b);
    }

    #[test]
    fn no_views_rejected() {
        let (scene, _) = fixture(1);
        let r = assemble_prompt(&[], &scene, &TaskTemplate::grasp('A'), &AssembleOptions::default());
        assert!(matches!(r, Err(PromptError::NoViews)));
    }
}
