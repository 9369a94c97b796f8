use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Aabb, InstanceId, PointCloud, Rgb, Vec3};

pub const SYNTH_LABELS: [&str; 6] = ["chair", "table", "cabinet", "sofa", "bed", "box"];

const FLOOR_SPACING_M: f64 = 0.05;
const SURFACE_SPACING_M: f64 = 0.04;
const GAP_M: f64 = 0.4;
const WALL_MARGIN_M: f64 = 0.2;

pub fn synthetic_scene_id(index: usize) -> String {
    format!("synth_{index:03}")
}

fn steps(len: f64, spacing: f64) -> Vec<f64> {
    let n = (len / spacing).ceil().max(1.0) as usize;
    (0..=n).map(|i| len * i as f64 / n as f64).collect()
}

/// Points on the five visible faces of `b` (no bottom).
fn box_surface(b: &Aabb) -> Vec<Vec3> {
    let e = b.extent();
    let (xs, ys, zs) = (
        steps(e.x, SURFACE_SPACING_M),
        steps(e.y, SURFACE_SPACING_M),
        steps(e.z, SURFACE_SPACING_M),
    );
    let mut out = Vec::new();
    for &x in &xs {
        for &y in &ys {
            out.push(b.min + Vec3::new(x, y, e.z));
        }
    }
    for &z in &zs[..zs.len() - 1] {
        for &x in &xs {
            out.push(b.min + Vec3::new(x, 0.0, z));
            out.push(b.min + Vec3::new(x, e.y, z));
        }
        for &y in &ys[1..ys.len() - 1] {
            out.push(b.min + Vec3::new(0.0, y, z));
            out.push(b.min + Vec3::new(e.x, y, z));
        }
    }
    out
}

/// A room floor without instance labels plus 3 to 5 labeled boxes that
/// keep at least 0.4 m from each other. Deterministic in `(index, seed)`.
pub fn synthetic_scene(index: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_add(1),
    );
    let room = Vec3::new(rng.random_range(3.5..6.0), rng.random_range(3.0..5.0), 0.0);

    let mut positions = Vec::new();
    let mut colors: Vec<Rgb> = Vec::new();
    let mut ids = Vec::new();
    for x in steps(room.x, FLOOR_SPACING_M) {
        for y in steps(room.y, FLOOR_SPACING_M) {
            positions.push(Vec3::new(x, y, 0.0));
            let checker = ((x * 2.0).floor() as i64 + (y * 2.0).floor() as i64) % 2 == 0;
            colors.push(if checker { [175, 175, 170] } else { [150, 150, 145] });
            ids.push(None);
        }
    }

    let mut cloud = PointCloud::default();
    let want = rng.random_range(3..=5usize);
    let mut boxes: Vec<Aabb> = Vec::new();
    for _ in 0..500 {
        if boxes.len() == want {
            break;
        }
        let size = Vec3::new(
            rng.random_range(0.3..1.0),
            rng.random_range(0.3..1.0),
            rng.random_range(0.3..1.2),
        );
        let lo = Vec3::new(
            rng.random_range(WALL_MARGIN_M..(room.x - size.x - WALL_MARGIN_M)),
            rng.random_range(WALL_MARGIN_M..(room.y - size.y - WALL_MARGIN_M)),
            0.0,
        );
        let b = Aabb::from_corners(lo, lo + size);
        let inflated = b.inflated(GAP_M);
        if boxes.iter().all(|o| o.intersection_volume(&inflated) == 0.0) {
            boxes.push(b);
        }
    }
    let offset = rng.random_range(0..SYNTH_LABELS.len());
    for (k, b) in boxes.iter().enumerate() {
        let id = (k + 1) as InstanceId;
        let color: Rgb = [
            rng.random_range(40..220u8),
            rng.random_range(40..220u8),
            rng.random_range(40..220u8),
        ];
        for p in box_surface(b) {
            positions.push(p);
            colors.push(color);
            ids.push(Some(id));
        }
        cloud
            .semantic_labels
            .insert(id, SYNTH_LABELS[(offset + k) % SYNTH_LABELS.len()].to_string());
    }
    cloud.positions = positions;
    cloud.colors = Some(colors);
    cloud.instance_ids = Some(ids);
    cloud.up_axis = Some(Vec3::z());
    cloud
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::compute_aabb;

    #[test]
    fn scenes_are_valid_and_deterministic() {
        for i in 0..5 {
            let c = synthetic_scene(i, 7);
            c.validate().unwrap();
            assert_eq!(c, synthetic_scene(i, 7));
            let counts = c.instance_point_counts();
            assert!((3..=5).contains(&counts.len()));
            assert_eq!(c.semantic_labels.len(), counts.len());
        }
        assert_ne!(synthetic_scene(0, 7), synthetic_scene(1, 7));
        assert_ne!(synthetic_scene(0, 7), synthetic_scene(0, 8));
    }

    #[test]
    fn objects_keep_their_distance() {
        let c = synthetic_scene(3, 1);
        let ids: Vec<_> = c.instance_point_counts().into_keys().collect();
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                let ba = compute_aabb(&c, Some(*a)).unwrap();
                let bb = compute_aabb(&c, Some(*b)).unwrap();
                assert_eq!(ba.inflated(GAP_M - 1e-9).intersection_volume(&bb), 0.0);
            }
        }
    }
}
