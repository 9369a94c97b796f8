use std::collections::HashMap;

use super::{GeometryError, PointCloud, Result, Vec3};

/// Keeps one point per occupied voxel: the one nearest the centroid of the
/// voxel's points (lowest index on ties). Output preserves input order.
pub fn voxel_downsample(cloud: &PointCloud, voxel: f64) -> Result<PointCloud> {
    if !(voxel > 0.0) || !voxel.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "voxel size {voxel} must be positive"
        )));
    }
    let mut groups: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in cloud.positions.iter().enumerate() {
        let k = (p / voxel).map(f64::floor);
        groups
            .entry((k.x as i64, k.y as i64, k.z as i64))
            .or_default()
            .push(i);
    }
    let mut keep: Vec<usize> = groups
        .values()
        .map(|members| {
            let centroid = members
                .iter()
                .fold(Vec3::zeros(), |a, &i| a + cloud.positions[i])
                / members.len() as f64;
            // members are in ascending index order, so min_by keeps the first tie
            *members
                .iter()
                .min_by(|&&a, &&b| {
                    let da = (cloud.positions[a] - centroid).norm_squared();
                    let db = (cloud.positions[b] - centroid).norm_squared();
                    da.total_cmp(&db)
                })
                .expect("voxel groups are non-empty")
        })
        .collect();
    keep.sort_unstable();
    Ok(cloud.select(&keep))
}
