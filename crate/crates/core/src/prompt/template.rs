use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::PromptError;

/// Sent verbatim in front of the task text when chain-of-thought is on.
pub const COT_PREFIX: &str = "Let's think step by step.\n";

static SLOT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Localize,
    RoutePlan,
    Grasp,
    Release,
    Keypoints,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Localize => "localize",
            Self::RoutePlan => "route_plan",
            Self::Grasp => "grasp",
            Self::Release => "release",
            Self::Keypoints => "keypoints",
        }
    }
}

/// What a localize answer carries per object: a center or a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerShape {
    #[default]
    Point,
    Box,
}

/// Task wording with `{slot}` placeholders and a fixed answer contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTemplate {
    pub kind: TaskKind,
    pub body: String,
    pub slots: BTreeMap<String, String>,
    pub answer_format_instruction: String,
    #[serde(default)]
    pub answer_shape: AnswerShape,
    /// Extra sentence placed before the answer instruction, e.g. a
    /// reference-point hint.
    #[serde(default)]
    pub context: Option<String>,
}

fn slots<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn letter_list(letters: &[char]) -> String {
    let names: Vec<String> = letters.iter().map(|c| c.to_string()).collect();
    match names.len() {
        0 => String::new(),
        1 => names[0].clone(),
        n => format!("{} and {}", names[..n - 1].join(", "), names[n - 1]),
    }
}

impl TaskTemplate {
    /// Asks for the center (or box) of every lettered object in one answer.
    pub fn localize(letters: &[char], shape: AnswerShape) -> Self {
        let example = letters.first().copied().unwrap_or('A');
        let (body, answer) = match shape {
            AnswerShape::Point => (
                "The images show one scene from several viewpoints with a 3D coordinate axis \
                 whose ticks are labeled in meters. Using the axis, estimate the 3D center \
                 position of each marked object: {objects}.",
                format!(
                    "Answer with one line per object in the form {example}: (x, y, z), \
                     coordinates in meters."
                ),
            ),
            AnswerShape::Box => (
                "The images show one scene from several viewpoints with a 3D coordinate axis \
                 whose ticks are labeled in meters. Using the axis, estimate the axis-aligned \
                 3D bounding box of each marked object: {objects}.",
                format!(
                    "Answer with one line per object in the form \
                     {example}: (xmin, ymin, zmin, xmax, ymax, zmax), coordinates in meters."
                ),
            ),
        };
        Self {
            kind: TaskKind::Localize,
            body: body.to_string(),
            slots: slots([("objects", letter_list(letters))]),
            answer_format_instruction: answer,
            answer_shape: shape,
            context: None,
        }
    }

    pub fn route_plan(start: char, goal: char) -> Self {
        Self {
            kind: TaskKind::RoutePlan,
            body: "The images show a scene with a 3D coordinate axis labeled in meters. \
                   Plan a collision-free route for a ground robot from object {start} to \
                   object {goal}, keeping clear of every other object."
                .into(),
            slots: slots([("start", start.to_string()), ("goal", goal.to_string())]),
            answer_format_instruction: "Answer with the ordered waypoints as \
                [(x, y, z), (x, y, z), ...] in meters, starting at {start} and ending at {goal}."
                .into(),
            answer_shape: AnswerShape::Point,
            context: None,
        }
    }

    pub fn grasp(object: char) -> Self {
        Self {
            kind: TaskKind::Grasp,
            body: "The images show a robot workspace with a 3D coordinate axis labeled in \
                   meters. Where should the gripper move to grasp object {object}?"
                .into(),
            slots: slots([("object", object.to_string())]),
            answer_format_instruction: "Answer with a single position (x, y, z) in meters.".into(),
            answer_shape: AnswerShape::Point,
            context: None,
        }
    }

    pub fn release(object: char, target: char) -> Self {
        Self {
            kind: TaskKind::Release,
            body: "The images show a robot workspace with a 3D coordinate axis labeled in \
                   meters. The gripper holds object {object}. Where should it release the \
                   object so that it lands on object {target}?"
                .into(),
            slots: slots([("object", object.to_string()), ("target", target.to_string())]),
            answer_format_instruction: "Answer with a single position (x, y, z) in meters.".into(),
            answer_shape: AnswerShape::Point,
            context: None,
        }
    }

    pub fn keypoints(object: char, names: &[&str]) -> Self {
        Self {
            kind: TaskKind::Keypoints,
            body: "The images show object {object} with a 3D coordinate axis labeled in \
                   meters. Estimate the 3D positions of these keypoints: {names}."
                .into(),
            slots: slots([("object", object.to_string()), ("names", names.join(", "))]),
            answer_format_instruction: "Answer with one line per keypoint in the form \
                name: (x, y, z), coordinates in meters."
                .into(),
            answer_shape: AnswerShape::Point,
            context: None,
        }
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = Some(context.into());
        self
    }

    /// Slot names referenced anywhere in the body or answer instruction.
    pub fn referenced_slots(&self) -> Vec<String> {
        let mut names: Vec<String> = SLOT
            .captures_iter(&self.body)
            .chain(SLOT.captures_iter(&self.answer_format_instruction))
            .map(|c| c[1].to_string())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    fn substitute(&self, text: &str) -> Result<String, PromptError> {
        let mut missing = None;
        let out = SLOT.replace_all(text, |c: &regex::Captures| match self.slots.get(&c[1]) {
            Some(v) => v.clone(),
            None => {
                missing.get_or_insert_with(|| c[1].to_string());
                String::new()
            }
        });
        match missing {
            Some(name) => Err(PromptError::UnfilledSlot(name)),
            None => Ok(out.into_owned()),
        }
    }

    /// Final task text: optional CoT prefix, body, context, answer contract.
    pub fn render(&self, cot: bool) -> Result<String, PromptError> {
        let mut parts = vec![self.substitute(&self.body)?];
        if let Some(ctx) = &self.context {
            parts.push(ctx.clone());
        }
        parts.push(self.substitute(&self.answer_format_instruction)?);
        let text = parts.join("\n");
        if text.trim().is_empty() {
            return Err(PromptError::EmptyTask);
        }
        Ok(if cot { format!("{COT_PREFIX}{text}") } else { text })
    }
}

#[cfg(test)]
/// True when `text` still contains a `{slot}` marker.
pub(crate) fn has_slot_marker(text: &str) -> bool {
    SLOT.is_match(text)
}
