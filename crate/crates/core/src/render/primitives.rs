use std::collections::BTreeMap;

use crate::geometry::{Rgb, Vec3};

/// What a primitive depicts; lets ablations and audits select by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimitiveRole {
    AxisLine,
    Tick,
    TickLabel,
    AxisName,
    MarkBox,
    MarkLetter,
    Skeleton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line3 {
    pub a: Vec3,
    pub b: Vec3,
    pub color: Rgb,
    pub width_px: u32,
    pub role: PrimitiveRole,
}

/// Screen-space text anchored at a 3D point. The label is drawn only if its
/// anchor passes the depth test.
#[derive(Debug, Clone, PartialEq)]
pub struct Label3 {
    pub anchor: Vec3,
    pub text: String,
    pub color: Rgb,
    /// Filled disc drawn behind the text, centered on the anchor.
    pub disc: Option<Rgb>,
    /// Offset in pixels from the projected anchor to the text's top-left
    /// corner; ignored for disc labels, which are centered.
    pub offset_px: (i32, i32),
    pub role: PrimitiveRole,
}

/// Everything drawn on top of the scene points in one render.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overlay3d {
    pub lines: Vec<Line3>,
    pub labels: Vec<Label3>,
    /// Per-point color overrides, keyed by point index.
    pub recolor: BTreeMap<usize, Rgb>,
}

impl Overlay3d {
    pub fn extend(&mut self, other: Overlay3d) {
        self.lines.extend(other.lines);
        self.labels.extend(other.labels);
        self.recolor.extend(other.recolor);
    }

    pub fn merged<'a>(parts: impl IntoIterator<Item = &'a Overlay3d>) -> Overlay3d {
        let mut out = Overlay3d::default();
        for p in parts {
            out.extend(p.clone());
        }
        out
    }

    pub fn count_lines(&self, role: PrimitiveRole) -> usize {
        self.lines.iter().filter(|l| l.role == role).count()
    }

    pub fn count_labels(&self, role: PrimitiveRole) -> usize {
        self.labels.iter().filter(|l| l.role == role).count()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty() && self.labels.is_empty() && self.recolor.is_empty()
    }
}
