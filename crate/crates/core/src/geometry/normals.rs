use std::collections::BTreeSet;

use nalgebra::SymmetricEigen;

use super::{GeometryError, Mat3, NeighborIndex, PointCloud, Result, Vec3};

pub const DEFAULT_EDGE_NEIGHBORS: usize = 16;
pub const DEFAULT_EDGE_ANGLE_DEG: f64 = 35.0;

/// Returns a copy of `cloud` whose normals are the least-variance directions
/// of each point's `k`-neighborhood, oriented away from the cloud centroid.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    if k < 3 {
        return Err(GeometryError::InvalidArgument(format!(
            "k = {k}, need at least 3 neighbors"
        )));
    }
    if cloud.len() < k {
        return Err(GeometryError::TooFewPoints {
            needed: k,
            available: cloud.len(),
        });
    }
    let centroid = cloud.centroid().unwrap_or_else(Vec3::zeros);
    let index = NeighborIndex::new(&cloud.positions);
    let normals = cloud
        .positions
        .iter()
        .map(|p| {
            let nbrs = index.nearest(p, k);
            let mean = nbrs
                .iter()
                .fold(Vec3::zeros(), |a, &i| a + cloud.positions[i])
                / nbrs.len() as f64;
            let cov = nbrs.iter().fold(Mat3::zeros(), |acc, &i| {
                let d = cloud.positions[i] - mean;
                acc + d * d.transpose()
            });
            let eig = SymmetricEigen::new(cov);
            let smallest = eig.eigenvalues.imin();
            let n = eig.eigenvectors.column(smallest).into_owned().normalize();
            if n.dot(&(p - centroid)) < 0.0 {
                -n
            } else {
                n
            }
        })
        .collect();
    Ok(PointCloud {
        normals: Some(normals),
        ..cloud.clone()
    })
}

/// Unoriented angle between two unit normals, in degrees (0..=90).
fn line_angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    a.dot(b).abs().min(1.0).acos().to_degrees()
}

/// Indices of points whose `k`-neighborhood (the point included) contains a
/// pair of normals at least `angle_threshold_deg` apart.
pub fn extract_edge_points(
    cloud: &PointCloud,
    k: usize,
    angle_threshold_deg: f64,
) -> Result<BTreeSet<usize>> {
    let normals = cloud.normals.as_ref().ok_or(GeometryError::MissingNormals)?;
    let index = NeighborIndex::new(&cloud.positions);
    let mut edges = BTreeSet::new();
    for (i, p) in cloud.positions.iter().enumerate() {
        let nbrs = index.nearest(p, k);
        let max_angle = nbrs
            .iter()
            .enumerate()
            .flat_map(|(a, &ia)| nbrs[a + 1..].iter().map(move |&ib| (ia, ib)))
            .map(|(ia, ib)| line_angle_deg(&normals[ia], &normals[ib]))
            .fold(0.0, f64::max);
        if max_angle >= angle_threshold_deg {
            edges.insert(i);
        }
    }
    Ok(edges)
}
