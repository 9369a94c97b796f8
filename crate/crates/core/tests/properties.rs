use proptest::prelude::*;

use axisprompt::cli::apply_override;
use axisprompt::client::{format_coord, BackoffPolicy};
use axisprompt::eval::{dist_to_bbx, dist_to_center};
use axisprompt::geometry::{compute_aabb, Aabb, PointCloud, SceneFrame, Vec3};
use axisprompt::marks::{contour_from_mask, Bitmap, InstanceMask};
use axisprompt::prompt::{parse_points_text, serialize_points_text};

fn vec3(range: std::ops::Range<f64>) -> impl Strategy<Value = Vec3> {
    (range.clone(), range.clone(), range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn aabb() -> impl Strategy<Value = Aabb> {
    (vec3(-10.0..10.0), vec3(0.01..5.0)).prop_map(|(lo, size)| Aabb::from_corners(lo, lo + size))
}

proptest! {
    #[test]
    fn aabb_contains_every_point(pts in prop::collection::vec(vec3(-100.0..100.0), 1..64)) {
        let b = compute_aabb(&PointCloud::from_positions(pts.clone()), None).unwrap();
        for p in &pts {
            prop_assert!(b.contains(p));
        }
    }

    #[test]
    fn box_distance_never_exceeds_center_distance(p in vec3(-20.0..20.0), b in aabb()) {
        prop_assert!(dist_to_bbx(&p, &b) <= dist_to_center(&p, &b.center()));
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in aabb(), b in aabb()) {
        let (ab, ba) = (a.iou(&b), b.iou(&a));
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((a.iou(&a) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ring_is_disjoint_and_within_reach(
        cells in prop::collection::vec((0u32..24, 0u32..24), 1..40),
        d in 1u32..6,
    ) {
        let bitmap = Bitmap::from_fn(40, 40, |u, v| cells.iter().any(|&(a, b)| a + 8 == u && b + 8 == v));
        let mask = InstanceMask { instance_id: 1, bitmap: bitmap.clone() };
        let ring = contour_from_mask(&mask, d).unwrap();
        prop_assert!(ring.and(&bitmap).is_empty());
        for (u, v) in ring.iter_set() {
            let near = bitmap.iter_set().any(|(a, b)| a.abs_diff(u).max(b.abs_diff(v)) <= d);
            prop_assert!(near, "ring pixel ({u},{v}) farther than {d}");
        }
    }

    #[test]
    fn points_text_round_trips_within_rounding(
        pts in prop::collection::vec(vec3(-50.0..50.0), 1..50),
        decimals in 0usize..5,
    ) {
        let frame = SceneFrame::identity(PointCloud::from_positions(pts.clone()));
        let text = serialize_points_text(&frame, pts.len(), decimals).unwrap();
        let back = parse_points_text(&text).unwrap();
        prop_assert_eq!(back.len(), pts.len());
        let tol = 0.5 * 10f64.powi(-(decimals as i32)) + 1e-9;
        for (a, b) in back.iter().zip(&pts) {
            prop_assert!((a - b).amax() <= tol);
        }
    }

    #[test]
    fn backoff_is_monotone(base in 0.01f64..5.0, factor in 1.0f64..4.0, attempts in 1u32..10) {
        let p = BackoffPolicy { base_secs: base, factor, max_attempts: attempts };
        let s = p.schedule();
        prop_assert_eq!(s.len(), attempts as usize - 1);
        prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn formatted_coords_parse_back_exactly(v in -1e6f64..1e6) {
        prop_assert_eq!(format_coord(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn override_sets_the_key(n in 1i64..64, name in "[a-z]{1,8}") {
        let mut t = toml::Table::new();
        apply_override(&mut t, &format!("rig.n_views={n}")).unwrap();
        apply_override(&mut t, &format!("endpoint.model={name}")).unwrap();
        prop_assert_eq!(t["rig"]["n_views"].as_integer(), Some(n));
        prop_assert_eq!(t["endpoint"]["model"].as_str(), Some(name.as_str()));
    }
}
