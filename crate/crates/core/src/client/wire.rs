use base64::Engine as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::prompt::PromptBundle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageUrl {
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContentPart {
    Text { text: String },
    ImageUrl { image_url: ImageUrl },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: Vec<ContentPart>,
}

/// Chat-completions request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

pub const PNG_DATA_URL_PREFIX: &str = "data:image/png;base64,";

impl ChatRequest {
    /// A fresh single-turn request: one user message holding the images in
    /// order, then the points text, then the task text.
    pub fn from_bundle(bundle: &PromptBundle, model: &str, temperature: f64, max_tokens: u32) -> Self {
        let engine = base64::engine::general_purpose::STANDARD;
        let mut content: Vec<ContentPart> = bundle
            .images
            .iter()
            .map(|png| ContentPart::ImageUrl {
                image_url: ImageUrl {
                    url: format!("{PNG_DATA_URL_PREFIX}{}", engine.encode(png)),
                },
            })
            .collect();
        if let Some(points) = &bundle.points_text {
            content.push(ContentPart::Text {
                text: points.clone(),
            });
        }
        content.push(ContentPart::Text {
            text: bundle.task_text.clone(),
        });
        Self {
            model: model.to_string(),
            messages: vec![ChatMessage {
                role: "user".into(),
                content,
            }],
            temperature,
            max_tokens,
        }
    }

    /// Hex SHA-256 of the serialized request.
    pub fn hash(&self) -> String {
        let body = serde_json::to_vec(self).unwrap_or_default();
        Sha256::digest(&body).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Decoded image payloads, in message order.
    pub fn image_payloads(&self) -> Vec<Vec<u8>> {
        let engine = base64::engine::general_purpose::STANDARD;
        self.messages
            .iter()
            .flat_map(|m| &m.content)
            .filter_map(|p| match p {
                ContentPart::ImageUrl { image_url } => image_url
                    .url
                    .strip_prefix(PNG_DATA_URL_PREFIX)
                    .and_then(|b| engine.decode(b).ok()),
                ContentPart::Text { .. } => None,
            })
            .collect()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.messages
            .iter()
            .flat_map(|m| &m.content)
            .filter_map(|p| match p {
                ContentPart::Text { text } => Some(text.as_str()),
                ContentPart::ImageUrl { .. } => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub model: String,
    pub usage: Usage,
    /// Seconds from send to reply.
    pub latency: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::{AnswerShape, TaskKind};

    pub(crate) fn bundle(id: &str, images: Vec<Vec<u8>>) -> PromptBundle {
        PromptBundle {
            scene_id: id.into(),
            images,
            points_text: Some("# points x y z (meters)\n1.00 2.00 3.00\n".into()),
            task_text: format!("task for {id}"),
            cot: false,
            template_kind: TaskKind::Grasp,
            answer_shape: AnswerShape::Point,
            slots: Default::default(),
            mark_style: None,
        }
    }

    #[test]
    fn request_shape() {
        let b = bundle("s", vec![vec![1, 2, 3], vec![4]]);
        let r = ChatRequest::from_bundle(&b, "m", 0.0, 512);
        assert_eq!(r.messages.len(), 1);
        assert_eq!(r.messages[0].role, "user");
        assert_eq!(r.image_payloads(), b.images);
        assert_eq!(r.texts(), vec![b.points_text.as_deref().unwrap(), "task for s"]);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["messages"][0]["content"][0]["type"], "image_url");
        assert!(json["messages"][0]["content"][0]["image_url"]["url"]
            .as_str()
            .unwrap()
            .starts_with(PNG_DATA_URL_PREFIX));
        assert_eq!(r.hash().len(), 64);
        assert_eq!(r.hash(), ChatRequest::from_bundle(&b, "m", 0.0, 512).hash());
    }
}
