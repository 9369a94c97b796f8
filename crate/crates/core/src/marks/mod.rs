//! Object marks: letters, contours, fills and 2D boxes drawn on rendered
//! views from instance masks, plus 3D boxes and edge points embedded in the
//! scene before rendering.

mod bitmap;
mod embed;
mod mask;
mod overlay;
mod style;

pub use bitmap::Bitmap;
pub use embed::{embed_3d_marks, letter_anchor};
pub use mask::{
    contour_from_mask, load_mask_png, mask_file_name, project_instance_mask, project_plan_masks,
    InstanceMask,
};
pub use overlay::{letter_position, overlay_marks, POINT_MARK_OFFSET_PX};
pub use style::{
    default_palette, plan_marks, MarkEntry, MarkPlan, MarkStyle, MarkVariant, AABB_RED,
    DEFAULT_DILATION_PX,
};

use thiserror::Error;

use crate::geometry::{GeometryError, InstanceId};

#[derive(Debug, Error)]
pub enum MarksError {
    #[error("scene has no instance labels")]
    MissingInstanceLabels,
    #[error("mask for instance {0} is empty")]
    EmptyMask(InstanceId),
    #[error("no mask supplied for instance {0}")]
    MissingMask(InstanceId),
    #[error("mask is {got:?}, view is {expected:?}")]
    DimensionMismatch { expected: (u32, u32), got: (u32, u32) },
    #[error("invalid mark style: {0}")]
    InvalidStyle(String),
    #[error("invalid mark plan: {0}")]
    InvalidPlan(String),
    #[error("mask image: {0}")]
    Image(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
