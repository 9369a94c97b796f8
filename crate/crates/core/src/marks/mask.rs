use super::bitmap::Bitmap;
use super::style::MarkPlan;
use super::MarksError;
use crate::geometry::{InstanceId, SceneFrame};
use crate::render::RenderedView;

/// Per-pixel membership of one instance in one rendered view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMask {
    pub instance_id: InstanceId,
    pub bitmap: Bitmap,
}

impl InstanceMask {
    pub fn is_empty(&self) -> bool {
        self.bitmap.is_empty()
    }
}

/// Pixels whose winning point belongs to `instance`, closed once with a 3x3
/// square to seal gaps between splats.
pub fn project_instance_mask(
    view: &RenderedView,
    scene: &SceneFrame,
    instance: InstanceId,
) -> Result<InstanceMask, MarksError> {
    if !scene.cloud.has_instances() {
        return Err(MarksError::MissingInstanceLabels);
    }
    let w = view.width();
    let raw = Bitmap::from_fn(w, view.height(), |u, v| {
        view.index_at(u, v)
            .is_some_and(|i| scene.cloud.instance_of(i as usize) == Some(instance))
    });
    Ok(InstanceMask {
        instance_id: instance,
        bitmap: raw.close3(),
    })
}

/// One mask per plan entry, in plan order.
pub fn project_plan_masks(
    view: &RenderedView,
    scene: &SceneFrame,
    plan: &MarkPlan,
) -> Result<Vec<InstanceMask>, MarksError> {
    plan.entries
        .iter()
        .map(|e| project_instance_mask(view, scene, e.instance_id))
        .collect()
}

/// `dilate(mask, dilation_px) \ mask` with a square structuring element.
pub fn contour_from_mask(mask: &InstanceMask, dilation_px: u32) -> Result<Bitmap, MarksError> {
    if dilation_px == 0 {
        return Err(MarksError::InvalidStyle("dilation must be at least 1 px".into()));
    }
    if mask.is_empty() {
        return Err(MarksError::EmptyMask(mask.instance_id));
    }
    Ok(mask.bitmap.dilate(dilation_px).and_not(&mask.bitmap))
}

/// File name of an externally produced mask for view `j`, instance `i`.
pub fn mask_file_name(view: usize, instance: InstanceId) -> String {
    format!("view{view}_inst{instance}.png")
}

/// Decodes a mask PNG (any channel layout); non-zero luma marks membership.
pub fn load_mask_png(
    bytes: &[u8],
    instance: InstanceId,
    expected: (u32, u32),
) -> Result<InstanceMask, MarksError> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| MarksError::Image(e.to_string()))?
        .into_luma8();
    if img.dimensions() != expected {
        return Err(MarksError::DimensionMismatch {
            expected,
            got: img.dimensions(),
        });
    }
    let bitmap = Bitmap::from_fn(expected.0, expected.1, |u, v| img.get_pixel(u, v).0[0] != 0);
    Ok(InstanceMask {
        instance_id: instance,
        bitmap,
    })
}
