use image::RgbImage;

use super::bitmap::Bitmap;
use super::mask::{contour_from_mask, InstanceMask};
use super::style::{MarkEntry, MarkPlan, MarkVariant};
use super::MarksError;
use crate::geometry::Rgb;
use crate::render::{draw_letter_disc, PrimitiveRole, RenderedView};

const FILL_ALPHA: f64 = 0.4;
const BOX_STROKE_PX: u32 = 2;
/// For `point2d` the letter disc sits diagonally off the dot so the dot
/// stays visible.
pub const POINT_MARK_OFFSET_PX: i64 = 16;

/// Letter position for a mask: the rounded centroid, or the nearest mask
/// pixel when the centroid falls outside the mask.
pub fn letter_position(mask: &Bitmap) -> Option<(i64, i64)> {
    let (cu, cv) = mask.centroid()?;
    let (ru, rv) = (cu.round() as i64, cv.round() as i64);
    if mask.get_signed(ru, rv) {
        return Some((ru, rv));
    }
    mask.nearest_set(cu, cv).map(|(u, v)| (u as i64, v as i64))
}

fn put(img: &mut RgbImage, u: u32, v: u32, color: Rgb) {
    img.put_pixel(u, v, image::Rgb(color));
}

fn paint(img: &mut RgbImage, pixels: &Bitmap, color: Rgb) {
    for (u, v) in pixels.iter_set() {
        put(img, u, v, color);
    }
}

/// Tight bounding rectangle of the mask, stroked inward.
fn box_stroke(mask: &Bitmap) -> Bitmap {
    let Some((u0, v0, u1, v1)) = mask.bounds() else {
        return Bitmap::new(mask.width(), mask.height());
    };
    let s = BOX_STROKE_PX - 1;
    Bitmap::from_fn(mask.width(), mask.height(), |u, v| {
        let inside = (u0..=u1).contains(&u) && (v0..=v1).contains(&v);
        inside && (u <= u0 + s || u + s >= u1 || v <= v0 + s || v + s >= v1)
    })
}

fn dot(mask: &Bitmap) -> Bitmap {
    let (cu, cv) = mask.centroid().unwrap_or_default();
    let (cu, cv) = (cu.round() as i64, cv.round() as i64);
    Bitmap::from_fn(mask.width(), mask.height(), |u, v| {
        (u as i64 - cu).abs() <= 1 && (v as i64 - cv).abs() <= 1
    })
}

/// Draws the 2D marks of `plan` over a copy of `view`. Entries with 3D
/// variants are left to [`super::embed_3d_marks`]; entries whose mask is
/// empty in this view are skipped. Order: fills, contours, strokes, letters.
pub fn overlay_marks(
    view: &RenderedView,
    masks: &[InstanceMask],
    plan: &MarkPlan,
) -> Result<RenderedView, MarksError> {
    plan.validate()?;
    let dims = (view.width(), view.height());
    let mut active: Vec<(&MarkEntry, &Bitmap)> = Vec::new();
    for entry in plan.entries.iter().filter(|e| e.style.variant.is_2d()) {
        let mask = masks
            .iter()
            .find(|m| m.instance_id == entry.instance_id)
            .ok_or(MarksError::MissingMask(entry.instance_id))?;
        if mask.bitmap.dimensions() != dims {
            return Err(MarksError::DimensionMismatch {
                expected: dims,
                got: mask.bitmap.dimensions(),
            });
        }
        if !mask.is_empty() {
            active.push((entry, &mask.bitmap));
        }
    }

    let mut out = view.clone();
    let img = &mut out.image;
    for (e, m) in &active {
        if e.style.variant == MarkVariant::MaskFill {
            for (u, v) in m.iter_set() {
                let px = img.get_pixel(u, v).0;
                let blended: Rgb = std::array::from_fn(|c| {
                    (FILL_ALPHA * e.color[c] as f64 + (1.0 - FILL_ALPHA) * px[c] as f64).round()
                        as u8
                });
                put(img, u, v, blended);
            }
        }
    }
    for (e, m) in &active {
        if matches!(
            e.style.variant,
            MarkVariant::MarkPlusContour | MarkVariant::ContourOnly
        ) {
            let mask = InstanceMask {
                instance_id: e.instance_id,
                bitmap: (*m).clone(),
            };
            paint(img, &contour_from_mask(&mask, e.style.dilation_px)?, e.color);
        }
    }
    for (e, m) in &active {
        match e.style.variant {
            MarkVariant::Bbox2d => paint(img, &box_stroke(m), e.color),
            MarkVariant::Point2d => paint(img, &dot(m), e.color),
            MarkVariant::Polygon2d => paint(img, &m.outer_boundary(), e.color),
            _ => {}
        }
    }
    for (e, m) in &active {
        if !e.style.variant.has_2d_letter() {
            continue;
        }
        let Some((mut u, mut v)) = letter_position(m) else { continue };
        if e.style.variant == MarkVariant::Point2d {
            u += POINT_MARK_OFFSET_PX;
            v -= POINT_MARK_OFFSET_PX;
        }
        draw_letter_disc(img, u, v, &e.letter.to_string(), e.color);
        out.drawn_labels
            .push((PrimitiveRole::MarkLetter, e.letter.to_string()));
    }
    Ok(out)
}
