use serde::{Deserialize, Serialize};

use super::{principal_axes, Aabb, GeometryError, Mat3, PointCloud, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Align {
    #[default]
    Pca,
    None,
}

/// A scene moved into the prompt frame: principal axes on x/y/z and the
/// bounding-box minimum at the origin, so every coordinate is non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFrame {
    pub cloud: PointCloud,
    /// Maps source coordinates into the frame together with `translation`:
    /// `p_frame = rotation * p_source + translation`.
    pub rotation: Mat3,
    pub translation: Vec3,
    /// Bounding-box size of the source cloud before any transform.
    pub source_extent: Vec3,
}

impl SceneFrame {
    pub fn to_frame(&self, source: &Vec3) -> Vec3 {
        self.rotation * source + self.translation
    }

    pub fn to_source(&self, frame: &Vec3) -> Vec3 {
        self.rotation.transpose() * (frame - self.translation)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.cloud.positions)
            .unwrap_or(Aabb {
                min: Vec3::zeros(),
                max: Vec3::zeros(),
            })
    }

    /// Wraps an already-normalized cloud with an identity transform.
    pub fn identity(cloud: PointCloud) -> Self {
        let extent = Aabb::from_points(&cloud.positions).map_or(Vec3::zeros(), |b| b.extent());
        Self {
            cloud,
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
            source_extent: extent,
        }
    }
}

/// Rotation whose rows are the scene's principal directions.
///
/// With a declared up axis only the yaw is estimated: the dominant horizontal
/// direction goes to x and up goes to z. Without one, the full covariance is
/// used and the third axis is flipped toward world +z.
fn pca_rotation(cloud: &PointCloud) -> Result<Mat3> {
    let (_, axes) = principal_axes(&cloud.positions)?;
    let (x, z) = match cloud.up_axis {
        Some(up) if up.norm() > 0.0 => {
            let up = up.normalize();
            let flat: Vec<Vec3> = cloud
                .positions
                .iter()
                .map(|p| p - up * up.dot(p))
                .collect();
            let (_, flat_axes) = principal_axes(&flat).map_err(|_| {
                GeometryError::DegenerateGeometry("no horizontal spread around the up axis".into())
            })?;
            // the leading in-plane direction is orthogonal to `up` by construction
            let x = (flat_axes[0] - up * up.dot(&flat_axes[0])).normalize();
            (x, up)
        }
        _ => {
            let z = if axes[2].z < 0.0 { -axes[2] } else { axes[2] };
            (axes[0], z)
        }
    };
    let y = z.cross(&x);
    Ok(Mat3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]))
}

pub fn normalize_scene(cloud: &PointCloud, align: Align) -> Result<SceneFrame> {
    let source_box = Aabb::from_points(&cloud.positions);
    let rotation = match align {
        Align::None => Mat3::identity(),
        Align::Pca => pca_rotation(cloud)?,
    };
    let rotated: Vec<Vec3> = cloud.positions.iter().map(|p| rotation * p).collect();
    let translation = Aabb::from_points(&rotated).map_or(Vec3::zeros(), |b| -b.min);
    let mut normalized = cloud.transformed(&rotation, &translation);
    // pin the exact minimum to zero so round-off never yields tiny negatives
    for p in &mut normalized.positions {
        for i in 0..3 {
            if p[i] < 0.0 {
                p[i] = 0.0;
            }
        }
    }
    Ok(SceneFrame {
        cloud: normalized,
        rotation,
        translation,
        source_extent: source_box.map_or(Vec3::zeros(), |b| b.extent()),
    })
}
