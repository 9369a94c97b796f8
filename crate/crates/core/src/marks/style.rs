use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MarksError;
use crate::geometry::{InstanceId, PointCloud, Rgb};

pub const DEFAULT_DILATION_PX: u32 = 4;
pub const AABB_RED: Rgb = [255, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkVariant {
    LetterMark,
    MarkPlusContour,
    ContourOnly,
    MaskFill,
    Bbox2d,
    Point2d,
    Polygon2d,
    Aabb3dRed,
    Aabb3dColored,
    Obb3d,
    #[serde(rename = "edge_points_3d")]
    EdgePoints3d,
    MarkPlusEdgePoints,
}

impl MarkVariant {
    pub const ALL: [MarkVariant; 12] = [
        Self::LetterMark,
        Self::MarkPlusContour,
        Self::ContourOnly,
        Self::MaskFill,
        Self::Bbox2d,
        Self::Point2d,
        Self::Polygon2d,
        Self::Aabb3dRed,
        Self::Aabb3dColored,
        Self::Obb3d,
        Self::EdgePoints3d,
        Self::MarkPlusEdgePoints,
    ];

    /// Drawn on the rendered image from an instance mask.
    pub fn is_2d(self) -> bool {
        matches!(
            self,
            Self::LetterMark
                | Self::MarkPlusContour
                | Self::ContourOnly
                | Self::MaskFill
                | Self::Bbox2d
                | Self::Point2d
                | Self::Polygon2d
        )
    }

    pub fn is_3d(self) -> bool {
        !self.is_2d()
    }

    /// Whether the letter is drawn as a 2D overlay at the mask centroid.
    pub fn has_2d_letter(self) -> bool {
        self.is_2d() && self != Self::ContourOnly
    }

    /// Whether the letter is embedded as a 3D label at the box top.
    pub fn has_3d_letter(self) -> bool {
        matches!(
            self,
            Self::Aabb3dRed | Self::Aabb3dColored | Self::Obb3d | Self::MarkPlusEdgePoints
        )
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkStyle {
    pub variant: MarkVariant,
    pub palette: Vec<Rgb>,
    pub dilation_px: u32,
}

impl MarkStyle {
    pub fn new(variant: MarkVariant) -> Self {
        Self {
            variant,
            palette: default_palette(),
            dilation_px: DEFAULT_DILATION_PX,
        }
    }

    pub fn validate(&self) -> Result<(), MarksError> {
        if self.palette.is_empty() {
            return Err(MarksError::InvalidStyle("palette is empty".into()));
        }
        Ok(())
    }
}

/// Twelve fully saturated hues, 30 degrees apart.
pub fn default_palette() -> Vec<Rgb> {
    (0..12).map(|i| hue_to_rgb(i as f64 * 30.0)).collect()
}

fn hue_to_rgb(hue_deg: f64) -> Rgb {
    let h = hue_deg.rem_euclid(360.0) / 60.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c: f64| (c * 255.0).round() as u8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkEntry {
    pub instance_id: InstanceId,
    pub letter: char,
    pub style: MarkStyle,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MarkPlan {
    pub entries: Vec<MarkEntry>,
}

impl MarkPlan {
    pub fn validate(&self) -> Result<(), MarksError> {
        let mut letters = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for e in &self.entries {
            if !e.letter.is_ascii_uppercase() {
                return Err(MarksError::InvalidPlan(format!("letter {:?}", e.letter)));
            }
            if !letters.insert(e.letter) {
                return Err(MarksError::InvalidPlan(format!("duplicate letter {}", e.letter)));
            }
            if !ids.insert(e.instance_id) {
                return Err(MarksError::InvalidPlan(format!(
                    "instance {} marked twice",
                    e.instance_id
                )));
            }
            e.style.validate()?;
        }
        Ok(())
    }

    pub fn letter_of(&self, id: InstanceId) -> Option<char> {
        self.entries.iter().find(|e| e.instance_id == id).map(|e| e.letter)
    }

    pub fn instance_of(&self, letter: char) -> Option<InstanceId> {
        self.entries.iter().find(|e| e.letter == letter).map(|e| e.instance_id)
    }
}

/// Letters `A`, `B`, ... go to instances in descending point count (ties by
/// ascending id); colors cycle through the palette in the same order.
/// `only` restricts the plan to the listed instances; at most 26 entries.
pub fn plan_marks(
    cloud: &PointCloud,
    style: &MarkStyle,
    only: Option<&BTreeSet<InstanceId>>,
) -> Result<MarkPlan, MarksError> {
    style.validate()?;
    let mut ranked: Vec<(InstanceId, usize)> = cloud
        .instance_point_counts()
        .into_iter()
        .filter(|(id, _)| only.is_none_or(|set| set.contains(id)))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    if ranked.len() > 26 {
        return Err(MarksError::InvalidPlan(format!(
            "{} instances exceed the 26 available letters",
            ranked.len()
        )));
    }
    let entries = ranked
        .iter()
        .enumerate()
        .map(|(i, (id, _))| MarkEntry {
            instance_id: *id,
            letter: (b'A' + i as u8) as char,
            style: style.clone(),
            color: if style.variant == MarkVariant::Aabb3dRed {
                AABB_RED
            } else {
                style.palette[i % style.palette.len()]
            },
        })
        .collect();
    Ok(MarkPlan { entries })
}
