use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{GeometryError, InstanceId, Mat3, PointCloud, Result, Vec3};

/// Corner index pairs of the 12 edges of a box whose corners are enumerated
/// with bit 0 = x, bit 1 = y, bit 2 = z.
const BOX_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        if (0..3).all(|i| min[i] <= max[i]) {
            Ok(Self { min, max })
        } else {
            Err(GeometryError::InvalidArgument(format!(
                "box min {min:?} exceeds max {max:?}"
            )))
        }
    }

    /// Box with componentwise sorted corners.
    pub fn from_corners(a: Vec3, b: Vec3) -> Self {
        Self {
            min: a.inf(&b),
            max: a.sup(&b),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        Some(Self { min, max })
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Euclidean distance from `p` to the closest point of the box (0 inside).
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        let clamped = p.sup(&self.min).inf(&self.max);
        (p - clamped).norm()
    }

    pub fn inflated(&self, margin: f64) -> Self {
        let m = Vec3::repeat(margin);
        Self {
            min: self.min - m,
            max: self.max + m,
        }
    }

    pub fn intersection_volume(&self, other: &Aabb) -> f64 {
        let lo = self.min.sup(&other.min);
        let hi = self.max.inf(&other.max);
        (0..3).map(|i| (hi[i] - lo[i]).max(0.0)).product()
    }

    /// Axis-aligned 3D intersection over union; 0 when the union is empty.
    pub fn iou(&self, other: &Aabb) -> f64 {
        let inter = self.intersection_volume(other);
        let union = self.volume() + other.volume() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    pub fn corners(&self) -> [Vec3; 8] {
        std::array::from_fn(|i| {
            Vec3::new(
                if i & 1 == 0 { self.min.x } else { self.max.x },
                if i & 2 == 0 { self.min.y } else { self.max.y },
                if i & 4 == 0 { self.min.z } else { self.max.z },
            )
        })
    }

    pub fn edges(&self) -> [(Vec3, Vec3); 12] {
        let c = self.corners();
        BOX_EDGES.map(|(a, b)| (c[a], c[b]))
    }
}

/// Oriented box: `center + sum_k s_k * half_extents[k] * axes[k]` for
/// `s_k in [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obb {
    pub center: Vec3,
    pub axes: [Vec3; 3],
    pub half_extents: Vec3,
}

impl Obb {
    pub fn corners(&self) -> [Vec3; 8] {
        std::array::from_fn(|i| {
            let s = |bit: usize| if i & bit == 0 { -1.0 } else { 1.0 };
            self.center
                + self.axes[0] * (s(1) * self.half_extents.x)
                + self.axes[1] * (s(2) * self.half_extents.y)
                + self.axes[2] * (s(4) * self.half_extents.z)
        })
    }

    pub fn edges(&self) -> [(Vec3, Vec3); 12] {
        let c = self.corners();
        BOX_EDGES.map(|(a, b)| (c[a], c[b]))
    }
}

fn selected_points(cloud: &PointCloud, instance: Option<InstanceId>) -> Vec<Vec3> {
    match instance {
        None => cloud.positions.clone(),
        Some(id) => cloud
            .instance_indices(id)
            .into_iter()
            .map(|i| cloud.positions[i])
            .collect(),
    }
}

pub fn compute_aabb(cloud: &PointCloud, instance: Option<InstanceId>) -> Result<Aabb> {
    let points = selected_points(cloud, instance);
    Aabb::from_points(&points).ok_or(GeometryError::EmptySelection)
}

/// Eigen-decomposition of the covariance of `points`.
///
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors, the first two sign-fixed so their dot product with
/// `(1, 1, 1)` is non-negative and the third set to their cross product.
/// Fails when the covariance has rank below 2.
pub fn principal_axes(points: &[Vec3]) -> Result<(Vec3, [Vec3; 3])> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateGeometry(format!(
            "{} points cannot span a plane",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let cov = points.iter().fold(Mat3::zeros(), |acc, p| {
        let d = p - mean;
        acc + d * d.transpose()
    }) / n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = Vec3::new(
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    let scale = values[0].abs().max(f64::MIN_POSITIVE);
    if values[0] <= 0.0 || values[1] <= 1e-12 * scale {
        return Err(GeometryError::DegenerateGeometry(
            "covariance rank is below 2".into(),
        ));
    }
    let ones = Vec3::repeat(1.0);
    let fix = |v: Vec3| if v.dot(&ones) < 0.0 { -v } else { v };
    let e0 = fix(eig.eigenvectors.column(order[0]).into_owned().normalize());
    let e1 = fix(eig.eigenvectors.column(order[1]).into_owned().normalize());
    // re-orthogonalize against round-off before closing the frame
    let e1 = (e1 - e0 * e0.dot(&e1)).normalize();
    Ok((values, [e0, e1, e0.cross(&e1)]))
}

pub fn compute_obb(cloud: &PointCloud, instance: InstanceId) -> Result<Obb> {
    let points = selected_points(cloud, Some(instance));
    if points.is_empty() {
        return Err(GeometryError::EmptySelection);
    }
    let (_, axes) = principal_axes(&points)?;
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in &points {
        let local = Vec3::new(axes[0].dot(p), axes[1].dot(p), axes[2].dot(p));
        lo = lo.inf(&local);
        hi = hi.sup(&local);
    }
    let mid = (lo + hi) * 0.5;
    Ok(Obb {
        center: axes[0] * mid.x + axes[1] * mid.y + axes[2] * mid.z,
        axes,
        half_extents: (hi - lo) * 0.5,
    })
}
