use std::collections::BTreeMap;

use super::{GeometryError, Mat3, Result, Vec3};

pub type Rgb = [u8; 3];
pub type InstanceId = u32;

/// A point cloud in meters with optional per-point attributes.
///
/// Attribute vectors, when present, are parallel to `positions`.
/// `semantic_labels` maps instance ids to free-form category names and
/// `up_axis` records the gravity direction when the source declares one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub positions: Vec<Vec3>,
    pub colors: Option<Vec<Rgb>>,
    pub normals: Option<Vec<Vec3>>,
    pub instance_ids: Option<Vec<Option<InstanceId>>>,
    pub semantic_labels: BTreeMap<InstanceId, String>,
    pub up_axis: Option<Vec3>,
}

impl PointCloud {
    pub fn from_positions(positions: Vec<Vec3>) -> Self {
        Self {
            positions,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Checks the structural invariants: parallel arrays, unit normals and
    /// labels that only name ids carried by at least one point.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let check = |name: &str, len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(GeometryError::DimensionMismatch(format!(
                    "{name} has {len} entries for {n} points"
                )))
            }
        };
        if let Some(c) = &self.colors {
            check("colors", c.len())?;
        }
        if let Some(normals) = &self.normals {
            check("normals", normals.len())?;
            if let Some(i) = normals.iter().position(|v| (v.norm() - 1.0).abs() > 1e-6) {
                return Err(GeometryError::InvalidArgument(format!(
                    "normal {i} is not unit length"
                )));
            }
        }
        if let Some(ids) = &self.instance_ids {
            check("instance_ids", ids.len())?;
        }
        let counts = self.instance_point_counts();
        if let Some(id) = self.semantic_labels.keys().find(|id| !counts.contains_key(id)) {
            return Err(GeometryError::InvalidArgument(format!(
                "label for instance {id} which has no points"
            )));
        }
        Ok(())
    }

    pub fn instance_of(&self, index: usize) -> Option<InstanceId> {
        self.instance_ids.as_ref().and_then(|ids| ids[index])
    }

    pub fn has_instances(&self) -> bool {
        self.instance_ids
            .as_ref()
            .is_some_and(|ids| ids.iter().any(Option::is_some))
    }

    /// Point counts per instance id, ordered by id.
    pub fn instance_point_counts(&self) -> BTreeMap<InstanceId, usize> {
        let mut counts = BTreeMap::new();
        if let Some(ids) = &self.instance_ids {
            for id in ids.iter().flatten() {
                *counts.entry(*id).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn instance_indices(&self, id: InstanceId) -> Vec<usize> {
        match &self.instance_ids {
            Some(ids) => ids
                .iter()
                .enumerate()
                .filter_map(|(i, v)| (*v == Some(id)).then_some(i))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Copies the given points (in the given order) with all attributes.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let pick = |v: &Vec<Vec3>| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let instance_ids = self
            .instance_ids
            .as_ref()
            .map(|ids| indices.iter().map(|&i| ids[i]).collect::<Vec<_>>());
        let kept: std::collections::BTreeSet<InstanceId> =
            instance_ids.iter().flatten().flatten().copied().collect();
        PointCloud {
            positions: pick(&self.positions),
            colors: self
                .colors
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            normals: self.normals.as_ref().map(pick),
            instance_ids,
            semantic_labels: self
                .semantic_labels
                .iter()
                .filter(|(id, _)| kept.contains(id))
                .map(|(id, l)| (*id, l.clone()))
                .collect(),
            up_axis: self.up_axis,
        }
    }

    /// Applies `p -> rotation * p + translation`; normals and the up axis are
    /// rotated only.
    pub fn transformed(&self, rotation: &Mat3, translation: &Vec3) -> PointCloud {
        PointCloud {
            positions: self
                .positions
                .iter()
                .map(|p| rotation * p + translation)
                .collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| rotation * n).collect()),
            up_axis: self.up_axis.map(|u| rotation * u),
            ..self.clone()
        }
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.is_empty() {
            return None;
        }
        let sum = self.positions.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        Some(sum / self.len() as f64)
    }

    pub fn color_of(&self, index: usize) -> Rgb {
        self.colors
            .as_ref()
            .map_or([160, 160, 160], |colors| colors[index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled() -> PointCloud {
        PointCloud {
            positions: vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            instance_ids: Some(vec![Some(2), None, Some(2)]),
            semantic_labels: [(2, "chair".to_string())].into(),
            ..PointCloud::default()
        }
    }

    #[test]
    fn counts_and_indices() {
        let c = labeled();
        assert_eq!(c.instance_point_counts(), [(2, 2)].into());
        assert_eq!(c.instance_indices(2), vec![0, 2]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn label_without_points_is_rejected() {
        let mut c = labeled();
        c.semantic_labels.insert(9, "ghost".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn mismatched_colors_are_rejected() {
        let mut c = labeled();
        c.colors = Some(vec![[0, 0, 0]]);
        assert!(matches!(
            c.validate(),
            Err(GeometryError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn select_drops_unreferenced_labels() {
        let c = labeled().select(&[1]);
        assert_eq!(c.len(), 1);
        assert!(c.semantic_labels.is_empty());
    }
}
