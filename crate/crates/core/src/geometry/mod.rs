//! Point-cloud containers, file I/O, bounding volumes, normals, edge points
//! and RGB-D unprojection.
//!
//! Every operation here is a pure function of its inputs: clouds are passed by
//! reference and new clouds are returned, so callers can fan work out across
//! threads without coordination.

mod bbox;
mod cloud;
mod frame;
mod io;
mod knn;
mod normals;
mod rgbd;
mod voxel;

pub use bbox::{compute_aabb, compute_obb, principal_axes, Aabb, Obb};
pub use cloud::{InstanceId, PointCloud, Rgb};
pub use frame::{normalize_scene, Align, SceneFrame};
pub use io::{parse_point_file, write_ply, write_xyz, PointFileFormat};
pub use knn::NeighborIndex;
pub use normals::{
    estimate_normals, extract_edge_points, DEFAULT_EDGE_ANGLE_DEG, DEFAULT_EDGE_NEIGHBORS,
};
pub use rgbd::{unproject_rgbd, CameraIntrinsics, DepthImage};
pub use voxel::voxel_downsample;

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("malformed point file: {0}")]
    MalformedFile(String),
    #[error("unsupported property: {0}")]
    UnsupportedProperty(String),
    #[error("selection is empty")]
    EmptySelection,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("too few points: need {needed}, have {available}")]
    TooFewPoints { needed: usize, available: usize },
    #[error("point cloud has no normals")]
    MissingNormals,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
