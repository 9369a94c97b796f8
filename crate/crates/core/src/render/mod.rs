//! Deterministic CPU rasterizer for point-cloud scenes with an embedded,
//! labeled coordinate axis.
//!
//! Points are drawn as z-buffered square splats; lines (axis, ticks, boxes)
//! and screen-space text are depth-tested against the point buffer but never
//! write to it, so the depth and index buffers always describe points only.

mod axis;
mod camera;
pub mod font;
mod primitives;
mod raster;

pub use axis::{build_axis, tick_positions, AxisElements, AxisSpec, INDOOR_TICK_M, OUTDOOR_TICK_M};
pub use camera::{
    make_camera_rig, make_camera_rig_with, make_triview, make_triview_sized, rig_azimuth_deg,
    Camera, Projected, Projection, RigSpec, DEFAULT_DISTANCE_SCALE, DEFAULT_ELEVATION_DEG,
    DEFAULT_IMAGE_SIZE, DEFAULT_VFOV_DEG,
};
pub use primitives::{Label3, Line3, Overlay3d, PrimitiveRole};
pub use raster::{
    depth_to_gray, draw_letter_disc, encode_gray_png, encode_pgm, encode_png, fill_disc,
    render_depth_view, render_view, render_view_with, splat_span, RenderSettings, RenderedView,
    DEFAULT_SPLAT_PX, LETTER_DISC_RADIUS_PX,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid axis spec: {0}")]
    InvalidAxis(String),
}
