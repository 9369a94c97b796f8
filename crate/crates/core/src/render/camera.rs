use serde::{Deserialize, Serialize};

use crate::geometry::{CameraIntrinsics, Mat3, SceneFrame, Vec3};

pub const DEFAULT_IMAGE_SIZE: u32 = 1024;
pub const DEFAULT_ELEVATION_DEG: f64 = 35.0;
pub const DEFAULT_DISTANCE_SCALE: f64 = 1.2;
pub const DEFAULT_VFOV_DEG: f64 = 60.0;
const NEAR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Perspective,
    /// Parallel projection; `fx`/`fy` are pixels per meter.
    OrthographicTop,
}

/// A camera with an OpenCV-style frame: x right, y down, z forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub intr: CameraIntrinsics,
    /// World-to-camera rotation.
    pub rotation: Mat3,
    /// World-to-camera translation: `p_cam = rotation * p_world + translation`.
    pub translation: Vec3,
    pub projection: Projection,
}

/// Continuous pixel coordinates plus camera-space depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl Camera {
    /// Camera at `eye` looking at `target`, with `up` pointing up in the image.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        intr: CameraIntrinsics,
        projection: Projection,
    ) -> Self {
        let forward = (target - eye).normalize();
        let mut right = forward.cross(&up);
        if right.norm() < 1e-9 {
            // looking straight along `up`: fall back to world y for the roll
            right = forward.cross(&Vec3::y());
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let rotation = Mat3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        Self {
            intr,
            rotation,
            translation: -(rotation * eye),
            projection,
        }
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn position(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// World-space viewing direction (camera +z).
    pub fn view_direction(&self) -> Vec3 {
        self.rotation.row(2).transpose()
    }

    pub fn project(&self, p: &Vec3) -> Option<Projected> {
        let c = self.to_camera(p);
        if c.z <= NEAR {
            return None;
        }
        let (u, v) = match self.projection {
            Projection::Perspective => (
                self.intr.fx * c.x / c.z + self.intr.cx,
                self.intr.fy * c.y / c.z + self.intr.cy,
            ),
            Projection::OrthographicTop => (
                self.intr.fx * c.x + self.intr.cx,
                self.intr.fy * c.y + self.intr.cy,
            ),
        };
        Some(Projected { u, v, depth: c.z })
    }

    /// World point seen at pixel `(u, v)` with camera-space depth `depth`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        let c = match self.projection {
            Projection::Perspective => Vec3::new(
                (u - self.intr.cx) * depth / self.intr.fx,
                (v - self.intr.cy) * depth / self.intr.fy,
                depth,
            ),
            Projection::OrthographicTop => Vec3::new(
                (u - self.intr.cx) / self.intr.fx,
                (v - self.intr.cy) / self.intr.fy,
                depth,
            ),
        };
        self.rotation.transpose() * (c - self.translation)
    }

    pub fn width(&self) -> u32 {
        self.intr.width
    }

    pub fn height(&self) -> u32 {
        self.intr.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigSpec {
    pub n_views: usize,
    pub elevation_deg: f64,
    pub distance_scale: f64,
    pub image_size: u32,
    pub vfov_deg: f64,
}

impl Default for RigSpec {
    fn default() -> Self {
        Self {
            n_views: 8,
            elevation_deg: DEFAULT_ELEVATION_DEG,
            distance_scale: DEFAULT_DISTANCE_SCALE,
            image_size: DEFAULT_IMAGE_SIZE,
            vfov_deg: DEFAULT_VFOV_DEG,
        }
    }
}

fn scene_centroid(scene: &SceneFrame) -> Vec3 {
    scene
        .cloud
        .centroid()
        .unwrap_or_else(|| scene.aabb().center())
}

/// Perspective cameras evenly spaced in azimuth (starting at 0, i.e. +x,
/// counter-clockwise about +z) on a circle around the scene centroid.
pub fn make_camera_rig(
    scene: &SceneFrame,
    n_views: usize,
    elevation_deg: f64,
    distance_scale: f64,
) -> Vec<Camera> {
    make_camera_rig_with(
        scene,
        &RigSpec {
            n_views,
            elevation_deg,
            distance_scale,
            ..RigSpec::default()
        },
    )
}

pub fn make_camera_rig_with(scene: &SceneFrame, spec: &RigSpec) -> Vec<Camera> {
    let target = scene_centroid(scene);
    let radius = spec.distance_scale * scene.aabb().diagonal().max(1e-3);
    let intr = CameraIntrinsics::from_fov(spec.image_size, spec.image_size, spec.vfov_deg);
    let el = spec.elevation_deg.to_radians();
    (0..spec.n_views.max(1))
        .map(|i| {
            let az = std::f64::consts::TAU * i as f64 / spec.n_views.max(1) as f64;
            let offset = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()) * radius;
            Camera::look_at(target + offset, target, Vec3::z(), intr, Projection::Perspective)
        })
        .collect()
}

/// Azimuth in degrees of camera `i` of an `n`-view rig.
pub fn rig_azimuth_deg(i: usize, n_views: usize) -> f64 {
    360.0 * i as f64 / n_views.max(1) as f64
}

/// Orthographic top (-z), front (-y) and side (-x) cameras framing the scene
/// bounding box with a 5% margin.
pub fn make_triview(scene: &SceneFrame) -> Vec<Camera> {
    make_triview_sized(scene, DEFAULT_IMAGE_SIZE)
}

pub fn make_triview_sized(scene: &SceneFrame, size: u32) -> Vec<Camera> {
    let b = scene.aabb();
    let c = b.center();
    let e = b.extent();
    let lift = e.norm() + 1.0;
    // (view direction, image-up direction, the two visible extents)
    let views = [
        (-Vec3::z(), Vec3::y(), e.x.max(e.y)),
        (-Vec3::y(), Vec3::z(), e.x.max(e.z)),
        (-Vec3::x(), Vec3::z(), e.y.max(e.z)),
    ];
    views
        .into_iter()
        .map(|(dir, up, span)| {
            let span = span.max(1e-6) * 1.1;
            let ppm = size as f64 / span;
            let half = (size as f64 - 1.0) * 0.5;
            let intr = CameraIntrinsics {
                fx: ppm,
                fy: ppm,
                cx: half,
                cy: half,
                width: size,
                height: size,
            };
            let eye = c - dir * lift;
            Camera::look_at(eye, c, up, intr, Projection::OrthographicTop)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;

    fn cube_scene() -> SceneFrame {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Vec3::new(
                (i & 1) as f64,
                ((i >> 1) & 1) as f64,
                ((i >> 2) & 1) as f64,
            ));
        }
        SceneFrame::identity(PointCloud::from_positions(pts))
    }

    #[test]
    fn single_view_at_azimuth_zero() {
        let rig = make_camera_rig(&cube_scene(), 1, 35.0, 1.2);
        assert_eq!(rig.len(), 1);
        let p = rig[0].position() - Vec3::repeat(0.5);
        assert!(p.y.abs() < 1e-9 && p.x > 0.0);
    }

    #[test]
    fn eight_views_are_45_degrees_apart() {
        let rig = make_camera_rig(&cube_scene(), 8, 35.0, 1.2);
        for (i, cam) in rig.iter().enumerate() {
            let p = cam.position() - Vec3::repeat(0.5);
            let az = p.y.atan2(p.x).to_degrees().rem_euclid(360.0);
            assert!((az - 45.0 * i as f64).abs() < 1e-9, "{i}: {az}");
        }
    }

    #[test]
    fn rig_looks_at_centroid() {
        let scene = cube_scene();
        let target = scene.cloud.centroid().unwrap();
        for cam in make_camera_rig(&scene, 4, 35.0, 1.2) {
            let to_target = target - cam.position();
            let miss = to_target - cam.view_direction() * cam.view_direction().dot(&to_target);
            assert!(miss.norm() < 1e-6);
            let px = cam.project(&target).unwrap();
            assert!((px.u - cam.intr.cx).abs() < 1e-6 && (px.v - cam.intr.cy).abs() < 1e-6);
        }
    }

    #[test]
    fn rotation_is_proper() {
        for cam in make_camera_rig(&cube_scene(), 5, 80.0, 2.0) {
            let r = cam.rotation;
            assert!((r * r.transpose() - Mat3::identity()).norm() < 1e-9);
            assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn triview_frames_unit_cube() {
        let views = make_triview(&cube_scene());
        let top = &views[0];
        let lo = top.unproject(-0.5, top.intr.height as f64 - 0.5, 1.0);
        let hi = top.unproject(top.intr.width as f64 - 0.5, -0.5, 1.0);
        assert!((lo.x + 0.05).abs() < 1e-9 && (lo.y + 0.05).abs() < 1e-9, "{lo:?}");
        assert!((hi.x - 1.05).abs() < 1e-9 && (hi.y - 1.05).abs() < 1e-9, "{hi:?}");
        for a in 0..3 {
            for b in a + 1..3 {
                assert!(views[a].view_direction().dot(&views[b].view_direction()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triview_top_center_projection() {
        let top = make_triview(&cube_scene())[0];
        let p = top.project(&Vec3::new(0.5, 0.5, 1.0)).unwrap();
        let half = (top.intr.width as f64 - 1.0) / 2.0;
        assert!((p.u - half).abs() <= 0.5 && (p.v - half).abs() <= 0.5);
    }
}
