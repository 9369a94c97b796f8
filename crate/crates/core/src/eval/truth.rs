use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::geometry::{compute_aabb, Aabb, InstanceId, SceneFrame, Vec3};
use crate::marks::MarkPlan;

/// Per-scene length that turns distances into normalized errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizerMode {
    /// Largest side of the scene's axis-aligned box.
    #[default]
    MaxSide,
    Diagonal,
}

pub fn scene_normalizer(scene: &SceneFrame, mode: NormalizerMode) -> f64 {
    let b = scene.aabb();
    match mode {
        NormalizerMode::MaxSide => b.extent().max(),
        NormalizerMode::Diagonal => b.diagonal(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub instance_id: InstanceId,
    pub letter: char,
    pub bbox: Aabb,
    pub label: Option<String>,
}

/// Ground truth for one scene, keyed by the letters shown to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub scene_id: String,
    pub normalizer: f64,
    pub objects: Vec<ObjectTruth>,
    /// Named keypoints of the scene's keypoint-task object, if any.
    #[serde(default)]
    pub keypoints: BTreeMap<String, Vec3>,
}

impl SceneTruth {
    pub fn from_scene(
        scene_id: &str,
        scene: &SceneFrame,
        plan: &MarkPlan,
        mode: NormalizerMode,
    ) -> Result<Self, EvalError> {
        let objects = plan
            .entries
            .iter()
            .map(|e| {
                Ok(ObjectTruth {
                    instance_id: e.instance_id,
                    letter: e.letter,
                    bbox: compute_aabb(&scene.cloud, Some(e.instance_id))?,
                    label: scene.cloud.semantic_labels.get(&e.instance_id).cloned(),
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        Ok(Self {
            scene_id: scene_id.to_string(),
            normalizer: scene_normalizer(scene, mode),
            objects,
            keypoints: BTreeMap::new(),
        })
    }

    pub fn object(&self, letter: char) -> Result<&ObjectTruth, EvalError> {
        self.objects
            .iter()
            .find(|o| o.letter == letter)
            .ok_or(EvalError::UnknownObject(letter))
    }

    /// Boxes of every object except the listed letters.
    pub fn obstacles_except(&self, letters: &[char]) -> Vec<Aabb> {
        self.objects
            .iter()
            .filter(|o| !letters.contains(&o.letter))
            .map(|o| o.bbox)
            .collect()
    }
}

static LETTER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b[A-Z]\b").unwrap());

/// Standalone capital letters in a slot value such as `"A, B and C"`.
pub fn letters_in(text: &str) -> Vec<char> {
    LETTER
        .find_iter(text)
        .filter_map(|m| m.as_str().chars().next())
        .collect()
}
