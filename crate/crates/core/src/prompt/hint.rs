use super::PromptError;
use crate::geometry::{compute_aabb, InstanceId, SceneFrame};
use crate::marks::MarkPlan;

/// One sentence giving the box center of the instance nearest to `target`
/// (center to center, lowest id on ties). The neighbor is named by its plan
/// letter, else its semantic label, else its id.
pub fn reference_point_hint(
    scene: &SceneFrame,
    target: InstanceId,
    plan: &MarkPlan,
) -> Result<String, PromptError> {
    let center = |id| compute_aabb(&scene.cloud, Some(id)).map(|b| b.center());
    let Ok(origin) = center(target) else {
        return Err(PromptError::NoOtherInstance(target));
    };
    let mut best = None;
    for id in scene.cloud.instance_point_counts().into_keys() {
        if id == target {
            continue;
        }
        let Ok(c) = center(id) else { continue };
        let d = (c - origin).norm();
        if best.is_none_or(|(_, bd, _)| d < bd) {
            best = Some((id, d, c));
        }
    }
    let (id, _, c) = best.ok_or(PromptError::NoOtherInstance(target))?;
    let name = match plan.letter_of(id) {
        Some(letter) => format!("object {letter}"),
        None => match scene.cloud.semantic_labels.get(&id) {
            Some(label) => format!("the {label}"),
            None => format!("object {id}"),
        },
    };
    Ok(format!(
        "For reference, {name} is centered at ({:.2}, {:.2}, {:.2}).",
        c.x, c.y, c.z
    ))
}
