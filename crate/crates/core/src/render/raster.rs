use image::{GrayImage, RgbImage};

use super::camera::Camera;
use super::font::{draw_text, text_size};
use super::primitives::{Overlay3d, PrimitiveRole};
use crate::geometry::{Rgb, SceneFrame, Vec3};

pub const DEFAULT_SPLAT_PX: u32 = 2;
pub const LETTER_DISC_RADIUS_PX: i64 = 12;
const LETTER_SCALE: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSettings {
    pub splat_px: u32,
    pub background: Rgb,
    pub label_scale: u32,
    /// Lines stay visible when at most this far (m) behind the point surface,
    /// so axes lying on a floor are not z-fought away.
    pub line_depth_slack: f64,
    pub label_depth_slack: f64,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            splat_px: DEFAULT_SPLAT_PX,
            background: [255, 255, 255],
            label_scale: 2,
            line_depth_slack: 0.05,
            label_depth_slack: 0.15,
        }
    }
}

/// One rasterized observation: colors plus the depth and source-point index
/// of the point that won each pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedView {
    pub image: RgbImage,
    /// Camera-space depth per pixel, `f64::INFINITY` where no point landed.
    pub depth: Vec<f64>,
    pub point_index: Vec<Option<u32>>,
    pub camera: Camera,
    /// Text actually drawn (after the anchor depth test), for audits.
    pub drawn_labels: Vec<(PrimitiveRole, String)>,
}

impl RenderedView {
    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    fn offset(&self, u: u32, v: u32) -> usize {
        v as usize * self.width() as usize + u as usize
    }

    pub fn depth_at(&self, u: u32, v: u32) -> f64 {
        self.depth[self.offset(u, v)]
    }

    pub fn index_at(&self, u: u32, v: u32) -> Option<u32> {
        self.point_index[self.offset(u, v)]
    }

    pub fn filled_pixels(&self) -> usize {
        self.point_index.iter().filter(|i| i.is_some()).count()
    }

    pub fn png_bytes(&self) -> Vec<u8> {
        encode_png(&self.image)
    }
}

pub fn encode_png(img: &RgbImage) -> Vec<u8> {
    let mut out = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut out), image::ImageFormat::Png)
        .expect("PNG encoding into memory cannot fail");
    out
}

pub fn encode_gray_png(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut out), image::ImageFormat::Png)
        .expect("PNG encoding into memory cannot fail");
    out
}

/// Binary PGM (P5) encoding.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

/// Pixel columns/rows covered by a square splat of radius `r` around a
/// continuous coordinate: `2r - 1` pixels centered on the containing pixel.
pub fn splat_span(coord: f64, r: u32) -> (i64, i64) {
    let c = coord.round() as i64;
    let half = r.max(1) as i64 - 1;
    (c - half, c + half)
}

pub fn render_view(
    scene: &SceneFrame,
    overlay: &Overlay3d,
    cam: &Camera,
    splat_px: u32,
) -> RenderedView {
    render_view_with(
        scene,
        overlay,
        cam,
        &RenderSettings {
            splat_px,
            ..RenderSettings::default()
        },
    )
}

pub fn render_view_with(
    scene: &SceneFrame,
    overlay: &Overlay3d,
    cam: &Camera,
    settings: &RenderSettings,
) -> RenderedView {
    let (w, h) = (cam.width(), cam.height());
    let mut view = splat_points(scene, cam, settings.splat_px);
    for (px, idx) in view.image.pixels_mut().zip(&view.point_index) {
        px.0 = match idx {
            Some(i) => overlay
                .recolor
                .get(&(*i as usize))
                .copied()
                .unwrap_or_else(|| scene.cloud.color_of(*i as usize)),
            None => settings.background,
        };
    }

    for line in &overlay.lines {
        draw_line(&mut view, cam, &line.a, &line.b, line.color, line.width_px, settings);
    }

    for label in &overlay.labels {
        let Some(p) = cam.project(&label.anchor) else { continue };
        let (u, v) = (p.u.round() as i64, p.v.round() as i64);
        if u < 0 || v < 0 || u >= w as i64 || v >= h as i64 {
            continue;
        }
        let surface = view.depth_at(u as u32, v as u32);
        if p.depth > surface + settings.label_depth_slack {
            continue;
        }
        match label.disc {
            Some(disc) => draw_letter_disc(
                &mut view.image,
                u + label.offset_px.0 as i64,
                v + label.offset_px.1 as i64,
                &label.text,
                disc,
            ),
            None => draw_text(
                &mut view.image,
                u + label.offset_px.0 as i64,
                v + label.offset_px.1 as i64,
                &label.text,
                settings.label_scale,
                label.color,
            ),
        }
        view.drawn_labels.push((label.role, label.text.clone()));
    }
    view
}

/// Z-buffered square splats; fills depth and index buffers, leaves the image
/// black.
fn splat_points(scene: &SceneFrame, cam: &Camera, splat_px: u32) -> RenderedView {
    let (w, h) = (cam.width(), cam.height());
    let n = w as usize * h as usize;
    let mut depth = vec![f64::INFINITY; n];
    let mut index = vec![None; n];
    for (i, p) in scene.cloud.positions.iter().enumerate() {
        let Some(q) = cam.project(p) else { continue };
        let (u0, u1) = splat_span(q.u, splat_px);
        let (v0, v1) = splat_span(q.v, splat_px);
        for v in v0.max(0)..=v1.min(h as i64 - 1) {
            for u in u0.max(0)..=u1.min(w as i64 - 1) {
                let k = v as usize * w as usize + u as usize;
                if q.depth < depth[k] {
                    depth[k] = q.depth;
                    index[k] = Some(i as u32);
                }
            }
        }
    }
    RenderedView {
        image: RgbImage::new(w, h),
        depth,
        point_index: index,
        camera: *cam,
        drawn_labels: Vec::new(),
    }
}

fn clip_to_camera(cam: &Camera, a: &Vec3, b: &Vec3) -> Option<(Vec3, Vec3)> {
    const NEAR: f64 = 1e-2;
    let (ca, cb) = (cam.to_camera(a), cam.to_camera(b));
    if ca.z <= NEAR && cb.z <= NEAR {
        return None;
    }
    let lerp = |t: f64| a + (b - a) * t;
    if ca.z <= NEAR {
        let t = (NEAR - ca.z) / (cb.z - ca.z);
        Some((lerp(t), *b))
    } else if cb.z <= NEAR {
        let t = (NEAR - ca.z) / (cb.z - ca.z);
        Some((*a, lerp(t)))
    } else {
        Some((*a, *b))
    }
}

fn draw_line(
    view: &mut RenderedView,
    cam: &Camera,
    a: &Vec3,
    b: &Vec3,
    color: Rgb,
    width_px: u32,
    settings: &RenderSettings,
) {
    let Some((a, b)) = clip_to_camera(cam, a, b) else { return };
    let (Some(pa), Some(pb)) = (cam.project(&a), cam.project(&b)) else {
        return;
    };
    let span = (pb.u - pa.u).abs().max((pb.v - pa.v).abs());
    let steps = (span * 2.0).ceil().clamp(1.0, 20_000.0) as usize;
    let (w, h) = (view.width() as i64, view.height() as i64);
    let lo = -((width_px.max(1) as i64 - 1) / 2);
    let hi = width_px.max(1) as i64 / 2;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let p = a + (b - a) * t;
        let Some(q) = cam.project(&p) else { continue };
        let (cu, cv) = (q.u.round() as i64, q.v.round() as i64);
        for dv in lo..=hi {
            for du in lo..=hi {
                let (u, v) = (cu + du, cv + dv);
                if u < 0 || v < 0 || u >= w || v >= h {
                    continue;
                }
                if q.depth <= view.depth_at(u as u32, v as u32) + settings.line_depth_slack {
                    view.image.put_pixel(u as u32, v as u32, image::Rgb(color));
                }
            }
        }
    }
}

/// Filled disc of `radius` pixels: pixel centers within Euclidean distance
/// `radius` of `(cx, cy)`.
pub fn fill_disc(img: &mut RgbImage, cx: i64, cy: i64, radius: i64, color: Rgb) {
    for v in (cy - radius).max(0)..=(cy + radius).min(img.height() as i64 - 1) {
        for u in (cx - radius).max(0)..=(cx + radius).min(img.width() as i64 - 1) {
            let (du, dv) = (u - cx, v - cy);
            if du * du + dv * dv <= radius * radius {
                img.put_pixel(u as u32, v as u32, image::Rgb(color));
            }
        }
    }
}

/// White text centered on a filled disc of the given color.
pub fn draw_letter_disc(img: &mut RgbImage, cx: i64, cy: i64, text: &str, color: Rgb) {
    fill_disc(img, cx, cy, LETTER_DISC_RADIUS_PX, color);
    let (tw, th) = text_size(text, LETTER_SCALE);
    draw_text(
        img,
        cx - tw as i64 / 2,
        cy - th as i64 / 2,
        text,
        LETTER_SCALE,
        [255, 255, 255],
    );
}

/// Grayscale depth image: nearest filled depth maps to 255, farthest to 0,
/// linearly in between; empty pixels are black.
pub fn render_depth_view(scene: &SceneFrame, cam: &Camera) -> GrayImage {
    let view = splat_points(scene, cam, DEFAULT_SPLAT_PX);
    depth_to_gray(&view)
}

pub fn depth_to_gray(view: &RenderedView) -> GrayImage {
    let filled = view.depth.iter().copied().filter(|d| d.is_finite());
    let (near, far) = filled.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
        (lo.min(d), hi.max(d))
    });
    let range = far - near;
    let data = view
        .depth
        .iter()
        .map(|&d| {
            if !d.is_finite() {
                0
            } else if range <= 0.0 {
                255
            } else {
                (255.0 * (far - d) / range).round() as u8
            }
        })
        .collect();
    GrayImage::from_raw(view.width(), view.height(), data).expect("buffer matches dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraIntrinsics, PointCloud};
    use crate::render::camera::Projection;

    fn camera() -> Camera {
        Camera::look_at(
            Vec3::new(0.0, 0.0, -5.0),
            Vec3::zeros(),
            -Vec3::y(),
            CameraIntrinsics::from_fov(64, 64, 60.0),
            Projection::Perspective,
        )
    }

    fn scene(points: Vec<Vec3>, colors: Vec<Rgb>) -> SceneFrame {
        let mut c = PointCloud::from_positions(points);
        c.colors = Some(colors);
        SceneFrame::identity(c)
    }

    #[test]
    fn nearer_point_wins() {
        let s = scene(
            vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)],
            vec![[255, 0, 0], [0, 0, 255]],
        );
        let cam = camera();
        let view = render_view(&s, &Overlay3d::default(), &cam, 2);
        let p = cam.project(&Vec3::zeros()).unwrap();
        let (u, v) = (p.u.round() as u32, p.v.round() as u32);
        assert_eq!(view.index_at(u, v), Some(1));
        assert_eq!(view.image.get_pixel(u, v).0, [0, 0, 255]);
        assert!((view.depth_at(u, v) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn empty_scene_is_background() {
        let s = scene(vec![], vec![]);
        let view = render_view(&s, &Overlay3d::default(), &camera(), 2);
        assert!(view.image.pixels().all(|p| p.0 == [255, 255, 255]));
        assert!(view.depth.iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn splat_radius_one_is_single_pixel() {
        let s = scene(vec![Vec3::zeros()], vec![[1, 2, 3]]);
        let view = render_view(&s, &Overlay3d::default(), &camera(), 1);
        assert_eq!(view.filled_pixels(), 1);
        let view = render_view(&s, &Overlay3d::default(), &camera(), 2);
        assert_eq!(view.filled_pixels(), 9);
    }

    #[test]
    fn constant_depth_is_constant_gray() {
        let pts = (0..5)
            .flat_map(|i| (0..5).map(move |j| Vec3::new(i as f64 * 0.1, j as f64 * 0.1, 0.0)))
            .collect::<Vec<_>>();
        let n = pts.len();
        let s = scene(pts, vec![[0, 0, 0]; n]);
        let cam = Camera::look_at(
            Vec3::new(0.2, 0.2, -3.0),
            Vec3::new(0.2, 0.2, 0.0),
            -Vec3::y(),
            CameraIntrinsics::from_fov(64, 64, 60.0),
            Projection::OrthographicTop,
        );
        let gray = render_depth_view(&s, &cam);
        let levels: std::collections::BTreeSet<u8> = gray.pixels().map(|p| p.0[0]).collect();
        assert_eq!(levels, [0u8, 255].into());
    }

    #[test]
    fn pgm_header() {
        let g = GrayImage::new(3, 2);
        let bytes = encode_pgm(&g);
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 6);
    }
}
