use serde::{Deserialize, Serialize};

use super::primitives::{Label3, Line3, Overlay3d, PrimitiveRole};
use super::RenderError;
use crate::geometry::{Rgb, SceneFrame, Vec3};

pub const INDOOR_TICK_M: f64 = 0.5;
pub const OUTDOOR_TICK_M: f64 = 5.0;
/// Scenes whose largest side exceeds this are treated as outdoor.
const OUTDOOR_EXTENT_M: f64 = 40.0;
pub const LABEL_OFFSET_PX: i32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub origin: Vec3,
    pub axis_lengths: Vec3,
    pub tick_interval: f64,
    pub tick_size: f64,
    pub show_ticks: bool,
    pub show_labels: bool,
    pub label_decimals: usize,
    pub axis_colors: [Rgb; 3],
}

/// Ablation arms over the axis decorations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisElements {
    Full,
    NoTicks,
    NoLabels,
    None,
}

impl AxisElements {
    pub const ALL: [AxisElements; 4] = [Self::Full, Self::NoTicks, Self::NoLabels, Self::None];

    pub fn flags(self) -> (bool, bool) {
        match self {
            Self::Full => (true, true),
            Self::NoTicks => (false, true),
            Self::NoLabels => (true, false),
            Self::None => (false, false),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::NoTicks => "no_ticks",
            Self::NoLabels => "no_labels",
            Self::None => "none",
        }
    }
}

impl AxisSpec {
    /// Axis rooted at the frame origin with lengths rounded up to whole
    /// ticks, so every axis covers the scene extent.
    pub fn for_scene(scene: &SceneFrame, tick_interval: Option<f64>) -> Self {
        let extent = scene.aabb().max;
        let largest = extent.max();
        let tick = tick_interval.unwrap_or(if largest > OUTDOOR_EXTENT_M {
            OUTDOOR_TICK_M
        } else {
            INDOOR_TICK_M
        });
        let lengths = extent.map(|e| ((e / tick - 1e-9).ceil().max(1.0)) * tick);
        Self {
            origin: Vec3::zeros(),
            axis_lengths: lengths,
            tick_interval: tick,
            tick_size: (tick * 0.2).min(0.25 * largest.max(tick)),
            show_ticks: true,
            show_labels: true,
            label_decimals: decimals_for(tick),
            axis_colors: [[220, 30, 30], [30, 170, 30], [30, 60, 220]],
        }
    }

    pub fn with_elements(mut self, elements: AxisElements) -> Self {
        (self.show_ticks, self.show_labels) = elements.flags();
        self
    }

    pub fn validate(&self, scene: &SceneFrame) -> Result<(), RenderError> {
        if !(self.tick_interval > 0.0) {
            return Err(RenderError::InvalidAxis(format!(
                "tick interval {} must be positive",
                self.tick_interval
            )));
        }
        let needed = scene.aabb().max - self.origin;
        for i in 0..3 {
            if self.axis_lengths[i] + 1e-9 < needed[i] {
                return Err(RenderError::InvalidAxis(format!(
                    "axis {} length {} shorter than scene extent {}",
                    i, self.axis_lengths[i], needed[i]
                )));
            }
        }
        Ok(())
    }
}

/// Smallest number of decimals that prints every tick exactly.
fn decimals_for(tick: f64) -> usize {
    (0..6)
        .find(|&d| {
            let scaled = tick * 10f64.powi(d as i32);
            (scaled - scaled.round()).abs() < 1e-9
        })
        .unwrap_or(3)
}

/// Tick positions (meters along the axis) from 0 up to `length` inclusive.
pub fn tick_positions(length: f64, interval: f64) -> Vec<f64> {
    let n = (length / interval + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * interval).collect()
}

/// Three axis polylines with optional ticks, numeric tick labels and
/// `X`/`Y`/`Z` names at the axis ends.
pub fn build_axis(scene: &SceneFrame, spec: &AxisSpec) -> Result<Overlay3d, RenderError> {
    spec.validate(scene)?;
    let dirs = [Vec3::x(), Vec3::y(), Vec3::z()];
    // ticks are drawn across each axis along this companion direction
    let tick_dirs = [Vec3::z(), Vec3::z(), Vec3::x()];
    let names = ["X", "Y", "Z"];
    let mut out = Overlay3d::default();
    for axis in 0..3 {
        let dir = dirs[axis];
        let color = spec.axis_colors[axis];
        let len = spec.axis_lengths[axis];
        out.lines.push(Line3 {
            a: spec.origin,
            b: spec.origin + dir * len,
            color,
            width_px: 3,
            role: PrimitiveRole::AxisLine,
        });
        if spec.show_ticks {
            for t in tick_positions(len, spec.tick_interval) {
                let at = spec.origin + dir * t;
                let half = tick_dirs[axis] * (spec.tick_size * 0.5);
                out.lines.push(Line3 {
                    a: at - half,
                    b: at + half,
                    color,
                    width_px: 2,
                    role: PrimitiveRole::Tick,
                });
                if spec.show_labels {
                    out.labels.push(Label3 {
                        anchor: at,
                        text: format!("{:.*}", spec.label_decimals, t),
                        color,
                        disc: None,
                        offset_px: (LABEL_OFFSET_PX, LABEL_OFFSET_PX),
                        role: PrimitiveRole::TickLabel,
                    });
                }
            }
        }
        if spec.show_labels {
            out.labels.push(Label3 {
                anchor: spec.origin + dir * (len + spec.tick_size.max(spec.tick_interval * 0.3)),
                text: names[axis].to_string(),
                color,
                disc: None,
                offset_px: (LABEL_OFFSET_PX, LABEL_OFFSET_PX),
                role: PrimitiveRole::AxisName,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;

    fn scene(max: Vec3) -> SceneFrame {
        SceneFrame::identity(PointCloud::from_positions(vec![Vec3::zeros(), max]))
    }

    fn spec_4m() -> (SceneFrame, AxisSpec) {
        let s = scene(Vec3::new(4.0, 4.0, 4.0));
        let spec = AxisSpec::for_scene(&s, Some(1.0));
        (s, spec)
    }

    #[test]
    fn five_labels_per_four_meter_axis() {
        let (s, spec) = spec_4m();
        assert_eq!(spec.axis_lengths, Vec3::repeat(4.0));
        let o = build_axis(&s, &spec).unwrap();
        let labels: Vec<&str> = o
            .labels
            .iter()
            .filter(|l| l.role == PrimitiveRole::TickLabel)
            .map(|l| l.text.as_str())
            .collect();
        assert_eq!(labels.len(), 15);
        assert_eq!(&labels[..5], &["0", "1", "2", "3", "4"]);
        assert_eq!(o.count_labels(PrimitiveRole::AxisName), 3);
    }

    #[test]
    fn no_ticks_arm_emits_no_tick_primitives() {
        let (s, spec) = spec_4m();
        let o = build_axis(&s, &spec.with_elements(AxisElements::NoTicks)).unwrap();
        assert_eq!(o.count_lines(PrimitiveRole::Tick), 0);
        assert_eq!(o.count_labels(PrimitiveRole::TickLabel), 0);
        assert_eq!(o.count_lines(PrimitiveRole::AxisLine), 3);
    }

    #[test]
    fn no_labels_arm_keeps_ticks_without_text() {
        let (s, spec) = spec_4m();
        let o = build_axis(&s, &spec.with_elements(AxisElements::NoLabels)).unwrap();
        assert_eq!(o.count_lines(PrimitiveRole::Tick), 15);
        assert!(o.labels.is_empty());
    }

    #[test]
    fn default_tick_and_decimals() {
        let s = scene(Vec3::new(6.3, 4.1, 2.6));
        let spec = AxisSpec::for_scene(&s, None);
        assert_eq!(spec.tick_interval, INDOOR_TICK_M);
        assert_eq!(spec.label_decimals, 1);
        assert_eq!(spec.axis_lengths, Vec3::new(6.5, 4.5, 3.0));
        let outdoor = AxisSpec::for_scene(&scene(Vec3::new(80.0, 60.0, 10.0)), None);
        assert_eq!(outdoor.tick_interval, OUTDOOR_TICK_M);
        assert_eq!(outdoor.label_decimals, 0);
    }

    #[test]
    fn short_axis_is_rejected() {
        let (s, mut spec) = spec_4m();
        spec.axis_lengths.x = 3.0;
        assert!(build_axis(&s, &spec).is_err());
        spec.axis_lengths.x = 4.0;
        spec.tick_interval = 0.0;
        assert!(build_axis(&s, &spec).is_err());
    }

    #[test]
    fn tick_labels_are_numeric() {
        let (s, spec) = spec_4m();
        for l in build_axis(&s, &spec).unwrap().labels {
            if l.role == PrimitiveRole::TickLabel {
                assert!(l.text.chars().all(|c| c.is_ascii_digit() || c == '.'));
            }
        }
    }
}
