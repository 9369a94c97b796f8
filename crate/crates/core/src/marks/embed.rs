use super::style::{MarkEntry, MarkPlan, MarkVariant};
use super::MarksError;
use crate::geometry::{
    compute_aabb, compute_obb, estimate_normals, extract_edge_points, InstanceId, SceneFrame,
    Vec3, DEFAULT_EDGE_ANGLE_DEG, DEFAULT_EDGE_NEIGHBORS,
};
use crate::render::{Label3, Line3, Overlay3d, PrimitiveRole, LETTER_DISC_RADIUS_PX};

const BOX_LINE_PX: u32 = 2;

/// Top-center of the instance's axis-aligned box, where 3D letters go.
pub fn letter_anchor(scene: &SceneFrame, instance: InstanceId) -> Result<Vec3, MarksError> {
    let b = compute_aabb(&scene.cloud, Some(instance))?;
    let c = b.center();
    Ok(Vec3::new(c.x, c.y, b.max.z))
}

fn box_lines(edges: &[(Vec3, Vec3)], entry: &MarkEntry) -> Vec<Line3> {
    edges
        .iter()
        .map(|(a, b)| Line3 {
            a: *a,
            b: *b,
            color: entry.color,
            width_px: BOX_LINE_PX,
            role: PrimitiveRole::MarkBox,
        })
        .collect()
}

/// Scene indices of the instance's crease points. Normals come from the
/// cloud when present, otherwise they are estimated on the instance alone.
fn instance_edge_points(scene: &SceneFrame, id: InstanceId) -> Result<Vec<usize>, MarksError> {
    let indices = scene.cloud.instance_indices(id);
    if indices.len() < 3 {
        return Ok(Vec::new());
    }
    let k = DEFAULT_EDGE_NEIGHBORS.min(indices.len());
    let mut sub = scene.cloud.select(&indices);
    if sub.normals.is_none() {
        sub = estimate_normals(&sub, k)?;
    }
    let local = extract_edge_points(&sub, k, DEFAULT_EDGE_ANGLE_DEG)?;
    Ok(local.into_iter().map(|i| indices[i]).collect())
}

/// Renderable geometry for every 3D-variant entry of `plan`: box edges,
/// recolored edge points and disc letters above each box.
pub fn embed_3d_marks(scene: &SceneFrame, plan: &MarkPlan) -> Result<Overlay3d, MarksError> {
    plan.validate()?;
    let mut out = Overlay3d::default();
    let entries: Vec<&MarkEntry> =
        plan.entries.iter().filter(|e| e.style.variant.is_3d()).collect();
    if entries.is_empty() {
        return Ok(out);
    }
    if !scene.cloud.has_instances() {
        return Err(MarksError::MissingInstanceLabels);
    }
    for e in entries {
        let id = e.instance_id;
        match e.style.variant {
            MarkVariant::Aabb3dRed | MarkVariant::Aabb3dColored => {
                let b = compute_aabb(&scene.cloud, Some(id))?;
                out.lines.extend(box_lines(&b.edges(), e));
            }
            MarkVariant::Obb3d => {
                let b = compute_obb(&scene.cloud, id)?;
                out.lines.extend(box_lines(&b.edges(), e));
            }
            MarkVariant::EdgePoints3d | MarkVariant::MarkPlusEdgePoints => {
                for i in instance_edge_points(scene, id)? {
                    out.recolor.insert(i, e.color);
                }
            }
            _ => {}
        }
        if e.style.variant.has_3d_letter() {
            out.labels.push(Label3 {
                anchor: letter_anchor(scene, id)?,
                text: e.letter.to_string(),
                color: [255, 255, 255],
                disc: Some(e.color),
                offset_px: (0, -(LETTER_DISC_RADIUS_PX as i32 + 2)),
                role: PrimitiveRole::MarkLetter,
            });
        }
    }
    Ok(out)
}
