use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::geometry::{Aabb, Vec3};

pub const DEFAULT_CLEARANCE_M: f64 = 0.15;
pub const DEFAULT_SLACK_M: f64 = 0.05;

pub fn dist_to_center(pred: &Vec3, truth_center: &Vec3) -> f64 {
    (pred - truth_center).norm()
}

/// Zero inside the box, else the length of the clamp residual.
pub fn dist_to_bbx(pred: &Vec3, b: &Aabb) -> f64 {
    b.distance_to(pred)
}

/// Per-scene group of distances for the normalized error. `None` marks an
/// unparsed answer and contributes the maximal normalized error 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneErrors {
    pub distances: Vec<Option<f64>>,
    pub normalizer: f64,
}

/// Mean over scenes of the per-scene mean normalized distance.
pub fn nrmse(groups: &[SceneErrors]) -> Result<f64, EvalError> {
    if groups.is_empty() {
        return Err(EvalError::EmptyRun);
    }
    let mut total = 0.0;
    for g in groups {
        if g.distances.is_empty() {
            return Err(EvalError::EmptyRun);
        }
        if !(g.normalizer > 0.0) || !g.normalizer.is_finite() {
            return Err(EvalError::InvalidNormalizer(g.normalizer));
        }
        let sum: f64 = g
            .distances
            .iter()
            .map(|d| d.map_or(1.0, |d| d / g.normalizer))
            .sum();
        total += sum / g.distances.len() as f64;
    }
    Ok(total / groups.len() as f64)
}

/// Thresholds for judging a planned route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteCriteria {
    /// Minimum distance every segment keeps from each obstacle box.
    pub clearance: f64,
    /// How far the first/last waypoint may sit outside the start/goal box.
    pub arrival_tolerance: f64,
    pub check_collisions: bool,
}

impl Default for RouteCriteria {
    fn default() -> Self {
        Self {
            clearance: DEFAULT_CLEARANCE_M,
            arrival_tolerance: DEFAULT_CLEARANCE_M,
            check_collisions: true,
        }
    }
}

impl RouteCriteria {
    pub fn with_clearance(clearance: f64) -> Self {
        Self {
            clearance,
            ..Self::default()
        }
    }
}

/// Minimum distance from segment `a`-`b` to the box. The distance along
/// the segment is convex, so a ternary search finds the minimum.
pub fn segment_box_distance(a: &Vec3, b: &Vec3, bx: &Aabb) -> f64 {
    let f = |t: f64| bx.distance_to(&(a + (b - a) * t));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
}

/// Success iff the path starts at the start region, ends at the goal region
/// and (when enabled) keeps `clearance` from every obstacle. `obstacles`
/// must not include the start or goal boxes.
pub fn route_success(
    path: &[Vec3],
    start_region: &Aabb,
    goal_region: &Aabb,
    obstacles: &[Aabb],
    criteria: &RouteCriteria,
) -> bool {
    let (Some(first), Some(last)) = (path.first(), path.last()) else {
        return false;
    };
    if start_region.distance_to(first) > criteria.arrival_tolerance
        || goal_region.distance_to(last) > criteria.arrival_tolerance
    {
        return false;
    }
    if !criteria.check_collisions {
        return true;
    }
    let segments: Vec<(Vec3, Vec3)> = if path.len() == 1 {
        vec![(path[0], path[0])]
    } else {
        path.windows(2).map(|w| (w[0], w[1])).collect()
    };
    segments.iter().all(|(a, b)| {
        obstacles
            .iter()
            .all(|o| segment_box_distance(a, b, o) >= criteria.clearance)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Grasp,
    Release,
}

/// Grasp succeeds near the object box, release near the target region;
/// the threshold is closed.
pub fn action_success(
    pred: &Vec3,
    kind: ActionKind,
    object_box: &Aabb,
    target_region: &Aabb,
    slack: f64,
) -> bool {
    let region = match kind {
        ActionKind::Grasp => object_box,
        ActionKind::Release => target_region,
    };
    dist_to_bbx(pred, region) <= slack
}

/// Fraction of queries whose predicted box reaches `threshold` IoU with the
/// truth; unparsed predictions are misses.
pub fn acc_at_iou(
    pred_boxes: &[Option<Aabb>],
    truth_boxes: &[Aabb],
    threshold: f64,
) -> Result<f64, EvalError> {
    if pred_boxes.len() != truth_boxes.len() {
        return Err(EvalError::LengthMismatch {
            predictions: pred_boxes.len(),
            truths: truth_boxes.len(),
        });
    }
    if truth_boxes.is_empty() {
        return Err(EvalError::EmptyRun);
    }
    let hits = pred_boxes
        .iter()
        .zip(truth_boxes)
        .filter(|(p, t)| p.is_some_and(|p| p.iou(t) >= threshold))
        .count();
    Ok(hits as f64 / truth_boxes.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Aabb {
        Aabb::from_corners(Vec3::zeros(), Vec3::repeat(1.0))
    }

    #[test]
    fn distances() {
        assert_eq!(dist_to_center(&Vec3::new(3.0, 4.0, 0.0), &Vec3::zeros()), 5.0);
        assert_eq!(dist_to_bbx(&Vec3::new(2.0, 0.5, 0.5), &unit()), 1.0);
        assert_eq!(dist_to_bbx(&Vec3::repeat(0.5), &unit()), 0.0);
    }

    #[test]
    fn nrmse_hand_cases() {
        let one = SceneErrors {
            distances: vec![Some(1.0)],
            normalizer: 4.0,
        };
        assert_eq!(nrmse(&[one]).unwrap(), 0.25);
        let a = SceneErrors {
            distances: vec![Some(0.2), Some(0.2)],
            normalizer: 1.0,
        };
        let b = SceneErrors {
            distances: vec![Some(0.8)],
            normalizer: 2.0,
        };
        assert!((nrmse(&[a, b]).unwrap() - 0.3).abs() < 1e-15);
        let failed = SceneErrors {
            distances: vec![None],
            normalizer: 3.0,
        };
        assert_eq!(nrmse(&[failed]).unwrap(), 1.0);
        assert!(matches!(nrmse(&[]), Err(EvalError::EmptyRun)));
    }

    #[test]
    fn half_overlap_iou_is_one_third() {
        let shifted = Aabb::from_corners(Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.5, 1.0, 1.0));
        assert_eq!(unit().iou(&shifted), 1.0 / 3.0);
        let p = [Some(shifted)];
        let t = [unit()];
        assert_eq!(acc_at_iou(&p, &t, 0.25).unwrap(), 1.0);
        assert_eq!(acc_at_iou(&p, &t, 0.5).unwrap(), 0.0);
        assert_eq!(acc_at_iou(&[None], &t, 0.25).unwrap(), 0.0);
        assert!(acc_at_iou(&p, &[], 0.25).is_err());
    }

    #[test]
    fn route_grazing_flips_at_clearance() {
        let start = Aabb::from_corners(Vec3::new(-0.2, -0.2, 0.0), Vec3::new(0.2, 0.2, 0.4));
        let goal = Aabb::from_corners(Vec3::new(3.8, -0.2, 0.0), Vec3::new(4.2, 0.2, 0.4));
        // obstacle face at y = 0.5, path along y = 0 at z = 0.2
        let obstacle = Aabb::from_corners(Vec3::new(1.5, 0.5, 0.0), Vec3::new(2.5, 1.5, 1.0));
        let path = [Vec3::new(0.0, 0.0, 0.2), Vec3::new(4.0, 0.0, 0.2)];
        let eps = 1e-9;
        let at = |c: f64| route_success(&path, &start, &goal, &[obstacle], &RouteCriteria::with_clearance(c));
        assert!(at(0.5 - eps));
        assert!(!at(0.5 + eps));
        assert!(at(0.5));
    }

    #[test]
    fn route_through_obstacle_fails_and_arrival_checked() {
        let start = Aabb::from_corners(Vec3::zeros(), Vec3::repeat(0.2));
        let goal = Aabb::from_corners(Vec3::new(3.0, 0.0, 0.0), Vec3::new(3.2, 0.2, 0.2));
        let wall = Aabb::from_corners(Vec3::new(1.5, -1.0, 0.0), Vec3::new(1.6, 1.0, 1.0));
        let path = [Vec3::repeat(0.1), Vec3::new(3.1, 0.1, 0.1)];
        let c = RouteCriteria::default();
        assert!(route_success(&path, &start, &goal, &[], &c));
        assert!(!route_success(&path, &start, &goal, &[wall], &c));
        let no_check = RouteCriteria {
            check_collisions: false,
            ..c
        };
        assert!(route_success(&path, &start, &goal, &[wall], &no_check));
        assert!(!route_success(&path[..1], &start, &goal, &[], &c));
    }

    #[test]
    fn action_threshold_is_closed() {
        let obj = unit();
        let target = Aabb::from_corners(Vec3::new(5.0, 5.0, 0.0), Vec3::new(5.1, 5.1, 0.1));
        assert!(action_success(&Vec3::repeat(0.5), ActionKind::Grasp, &obj, &target, 0.02));
        assert!(!action_success(&Vec3::new(6.1, 5.05, 0.05), ActionKind::Release, &obj, &target, 0.02));
        assert!(action_success(&Vec3::new(1.25, 0.5, 0.5), ActionKind::Grasp, &obj, &target, 0.25));
    }
}
