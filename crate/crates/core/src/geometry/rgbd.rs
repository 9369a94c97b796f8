use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::{GeometryError, PointCloud, Result, Vec3};

/// Pinhole intrinsics. Pixel `(u, v)` has its center at integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let intr = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        intr.validate()?;
        Ok(intr)
    }

    /// Square-pixel intrinsics with the given vertical field of view and the
    /// principal point at the image center.
    pub fn from_fov(width: u32, height: u32, vfov_deg: f64) -> Self {
        let f = (height as f64 * 0.5) / (vfov_deg.to_radians() * 0.5).tan();
        Self {
            fx: f,
            fy: f,
            cx: (width as f64 - 1.0) * 0.5,
            cy: (height as f64 - 1.0) * 0.5,
            width,
            height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cx < self.width as f64
            && self.cy >= 0.0
            && self.cy < self.height as f64;
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidArgument(format!(
                "invalid intrinsics {self:?}"
            )))
        }
    }
}

/// Per-pixel depth in meters; 0 marks a missing measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn get(&self, u: u32, v: u32) -> f32 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, d: f32) {
        self.data[v as usize * self.width as usize + u as usize] = d;
    }

    /// Decodes a 16-bit (or 8-bit) grayscale PNG where each value divided by
    /// `scale` gives meters (1000 for millimeter depth maps).
    pub fn from_png(bytes: &[u8], scale: f64) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| GeometryError::MalformedFile(format!("depth PNG: {e}")))?
            .into_luma16();
        Ok(Self {
            width: img.width(),
            height: img.height(),
            data: img.pixels().map(|p| (p.0[0] as f64 / scale) as f32).collect(),
        })
    }
}

/// Back-projects every `stride`-th pixel with a positive depth.
pub fn unproject_rgbd(
    color: &RgbImage,
    depth: &DepthImage,
    intr: &CameraIntrinsics,
    stride: u32,
) -> Result<PointCloud> {
    if color.dimensions() != (intr.width, intr.height)
        || (depth.width, depth.height) != (intr.width, intr.height)
    {
        return Err(GeometryError::DimensionMismatch(format!(
            "color {:?}, depth {}x{}, intrinsics {}x{}",
            color.dimensions(),
            depth.width,
            depth.height,
            intr.width,
            intr.height
        )));
    }
    if stride == 0 {
        return Err(GeometryError::InvalidArgument("stride must be >= 1".into()));
    }
    let mut positions = Vec::new();
    let mut colors = Vec::new();
    for v in (0..intr.height).step_by(stride as usize) {
        for u in (0..intr.width).step_by(stride as usize) {
            let d = depth.get(u, v) as f64;
            if !(d > 0.0) || !d.is_finite() {
                continue;
            }
            positions.push(Vec3::new(
                (u as f64 - intr.cx) * d / intr.fx,
                (v as f64 - intr.cy) * d / intr.fy,
                d,
            ));
            colors.push(color.get_pixel(u, v).0);
        }
    }
    Ok(PointCloud {
        positions,
        colors: Some(colors),
        ..PointCloud::default()
    })
}
