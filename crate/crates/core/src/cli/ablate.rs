use std::fs;

use serde::{Deserialize, Serialize};

use super::commands::{run_eval, EvalMode};
use super::config::PipelineConfig;
use super::CliError;
use crate::eval::{markdown_table, summary_csv, RunSummary};
use crate::marks::MarkVariant;
use crate::render::AxisElements;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Views,
    AxisElements,
    MarkStyle,
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Self::Views => "views",
            Self::AxisElements => "axis_elements",
            Self::MarkStyle => "mark_style",
        }
    }
}

pub const VIEW_COUNTS: [usize; 4] = [1, 2, 4, 8];

/// The mark arms compared against each other: (arm name, drawn mark or
/// `None` for the bare axis, chain-of-thought prefix).
pub const MARK_ARMS: [(&str, Option<MarkVariant>, bool); 9] = [
    ("no_elements", None, false),
    ("mark", Some(MarkVariant::LetterMark), false),
    ("mark_obb", Some(MarkVariant::Obb3d), false),
    ("aabb_red", Some(MarkVariant::Aabb3dRed), false),
    ("aabb_colors", Some(MarkVariant::Aabb3dColored), false),
    ("mark_edge_points", Some(MarkVariant::MarkPlusEdgePoints), false),
    ("contour_colors", Some(MarkVariant::ContourOnly), false),
    ("mark_contour", Some(MarkVariant::MarkPlusContour), false),
    ("mark_contour_cot", Some(MarkVariant::MarkPlusContour), true),
];

#[derive(Debug, Clone, PartialEq)]
pub struct AblationArm {
    pub name: String,
    pub config: PipelineConfig,
}

/// Copies of `base` that differ only in the swept knob.
pub fn ablation_arms(base: &PipelineConfig, sweep: Sweep) -> Vec<AblationArm> {
    let arm = |name: String, f: &dyn Fn(&mut PipelineConfig)| {
        let mut config = base.clone();
        f(&mut config);
        AblationArm { name, config }
    };
    match sweep {
        Sweep::Views => VIEW_COUNTS
            .iter()
            .map(|&n| arm(format!("views_{n}"), &|c| c.rig.n_views = n))
            .collect(),
        Sweep::AxisElements => AxisElements::ALL
            .iter()
            .map(|&el| {
                arm(el.name().to_string(), &|c| {
                    (c.axis.show_ticks, c.axis.show_labels) = el.flags()
                })
            })
            .collect(),
        Sweep::MarkStyle => MARK_ARMS
            .iter()
            .map(|&(name, variant, cot)| {
                arm(name.to_string(), &|c| {
                    c.marks.enabled = variant.is_some();
                    if let Some(v) = variant {
                        c.marks.style = v;
                    }
                    c.task.cot = cot;
                })
            })
            .collect(),
    }
}

/// Runs every arm of `sweep` into `<output_dir>/ablate/<sweep>/<arm>` and
/// writes the comparison table next to them.
pub fn cmd_ablate(
    cfg: &PipelineConfig,
    sweep: Sweep,
    mode: EvalMode,
) -> Result<Vec<(String, RunSummary)>, CliError> {
    let root = cfg.output_dir.join("ablate").join(sweep.name());
    let mut rows = Vec::new();
    for arm in ablation_arms(cfg, sweep) {
        log::info!("ablation {}: arm {}", sweep.name(), arm.name);
        let out = run_eval(&arm.config, mode, &root.join(&arm.name), &arm.name)?;
        rows.push((arm.name, out.summary));
    }
    let csv_path = root.join("summary.csv");
    fs::write(&csv_path, summary_csv(&rows)?).map_err(CliError::io(&csv_path))?;
    let md_path = root.join("report.md");
    fs::write(&md_path, markdown_table(&rows)).map_err(CliError::io(&md_path))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PipelineConfig {
        PipelineConfig::from_toml_str("[scenes]\nsynthetic = 1\n", &[]).unwrap()
    }

    #[test]
    fn arm_sets_have_the_expected_sizes() {
        let b = base();
        assert_eq!(ablation_arms(&b, Sweep::Views).len(), 4);
        assert_eq!(ablation_arms(&b, Sweep::AxisElements).len(), 4);
        assert_eq!(ablation_arms(&b, Sweep::MarkStyle).len(), 9);
    }

    #[test]
    fn arms_differ_only_in_the_swept_key() {
        let b = base();
        for a in ablation_arms(&b, Sweep::Views) {
            let mut c = a.config.clone();
            c.rig.n_views = b.rig.n_views;
            assert_eq!(c, b);
        }
        for a in ablation_arms(&b, Sweep::AxisElements) {
            let mut c = a.config.clone();
            c.axis = b.axis.clone();
            assert_eq!(c, b, "{}", a.name);
        }
        for a in ablation_arms(&b, Sweep::MarkStyle) {
            let mut c = a.config.clone();
            c.marks = b.marks.clone();
            c.task.cot = b.task.cot;
            assert_eq!(c, b, "{}", a.name);
        }
    }
}
