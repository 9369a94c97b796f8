use std::collections::BTreeMap;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::planner::plan_route;
use super::transport::Transport;
use super::wire::{ChatRequest, ChatResponse, Usage};
use super::ClientError;
use crate::eval::{SceneTruth, TaskQuery, DEFAULT_CLEARANCE_M};
use crate::geometry::Vec3;
use crate::prompt::{AnswerShape, PromptBundle, TaskKind};

pub const MOCK_MODEL: &str = "mock-oracle";
/// Reply used for simulated failures; it contains no coordinate tuple.
pub const FAILURE_TEXT: &str = "I cannot determine that from these images.";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Standard deviation of the isotropic position noise, meters.
    pub noise_sigma: f64,
    pub seed: u64,
    pub failure_rate: f64,
    /// Noise shrinks as `n_views^-view_gain`; 0 disables the view effect.
    pub view_gain: f64,
    pub planning_clearance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.0,
            seed: 0,
            failure_rate: 0.0,
            view_gain: 0.0,
            planning_clearance: DEFAULT_CLEARANCE_M,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), ClientError> {
        if !(self.noise_sigma >= 0.0) || !(0.0..=1.0).contains(&self.failure_rate) {
            return Err(ClientError::InvalidConfig(format!(
                "noise_sigma {} must be >= 0 and failure_rate {} in [0, 1]",
                self.noise_sigma, self.failure_rate
            )));
        }
        if !(self.view_gain >= 0.0) {
            return Err(ClientError::InvalidConfig("view_gain must be >= 0".into()));
        }
        Ok(())
    }

    pub fn effective_sigma(&self, n_views: usize) -> f64 {
        self.noise_sigma * (n_views.max(1) as f64).powf(-self.view_gain)
    }
}

/// Two decimals when that is exact, else the shortest exact form, so a
/// noise-free answer parses back to the truth bit for bit.
pub fn format_coord(v: f64) -> String {
    let two = format!("{v:.2}");
    if two.parse::<f64>() == Ok(v) {
        two
    } else {
        format!("{v}")
    }
}

fn tuple(vals: &[f64]) -> String {
    let parts: Vec<String> = vals.iter().map(|v| format_coord(*v)).collect();
    format!("({})", parts.join(", "))
}

fn rng_for(bundle: &PromptBundle, cfg: &OracleConfig) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(bundle.scene_id.as_bytes());
    h.update([0]);
    h.update(bundle.template_kind.name().as_bytes());
    let d = h.finalize();
    let mix = u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"));
    ChaCha8Rng::seed_from_u64(mix ^ cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn noise(rng: &mut ChaCha8Rng, sigma: f64) -> Vec3 {
    let mut draw = || -> f64 { StandardNormal.sample(rng) };
    let v = Vec3::new(draw(), draw(), draw());
    v * sigma
}

fn query_err(e: crate::eval::EvalError) -> ClientError {
    ClientError::UnknownTask(e.to_string())
}

/// Deterministic stand-in for a model: answers from the ground truth with
/// seeded Gaussian noise, or with unparseable text at `failure_rate`.
pub fn mock_oracle(
    bundle: &PromptBundle,
    truth: &SceneTruth,
    cfg: &OracleConfig,
) -> Result<ChatResponse, ClientError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let q = TaskQuery::from_bundle(bundle);
    let mut rng = rng_for(bundle, cfg);
    let sigma = cfg.effective_sigma(bundle.images.len());
    let fail = rng.random_bool(cfg.failure_rate);
    let object = |l: char| truth.object(l).map_err(query_err);

    let text = match q.kind {
        TaskKind::Localize => {
            let mut lines = Vec::new();
            for l in q.letters("objects").map_err(query_err)? {
                let b = object(l)?.bbox;
                let n = noise(&mut rng, sigma);
                let vals: Vec<f64> = match q.answer_shape {
                    AnswerShape::Point => (b.center() + n).iter().copied().collect(),
                    AnswerShape::Box => (b.min + n).iter().chain((b.max + n).iter()).copied().collect(),
                };
                lines.push(format!("{l}: {}", tuple(&vals)));
            }
            lines.join("\n")
        }
        TaskKind::Grasp | TaskKind::Release => {
            let slot = if q.kind == TaskKind::Grasp { "object" } else { "target" };
            let c = object(q.letter(slot).map_err(query_err)?)?.bbox.center() + noise(&mut rng, sigma);
            let verb = if q.kind == TaskKind::Grasp { "Grasp at" } else { "Release at" };
            format!("{verb} {}.", tuple(c.as_slice()))
        }
        TaskKind::RoutePlan => {
            let (s, g) = (
                q.letter("start").map_err(query_err)?,
                q.letter("goal").map_err(query_err)?,
            );
            let path = plan_route(
                object(s)?.bbox.center(),
                object(g)?.bbox.center(),
                &truth.obstacles_except(&[s, g]),
                cfg.planning_clearance,
            );
            let pts: Vec<String> = path.iter().map(|p| tuple(p.as_slice())).collect();
            format!("[{}]", pts.join(", "))
        }
        TaskKind::Keypoints => {
            let names = q.keypoint_names().map_err(query_err)?;
            let mut lines = Vec::new();
            for n in names {
                let kp = truth.keypoints.get(&n).ok_or_else(|| {
                    ClientError::UnknownTask(format!("no ground truth for keypoint {n:?}"))
                })?;
                let p = kp + noise(&mut rng, sigma);
                lines.push(format!("{n}: {}", tuple(p.as_slice())));
            }
            lines.join("\n")
        }
    };
    Ok(ChatResponse {
        text: if fail { FAILURE_TEXT.to_string() } else { text },
        model: MOCK_MODEL.into(),
        usage: Usage::default(),
        latency: t0.elapsed().as_secs_f64(),
    })
}

/// Offline transport answering every scene from its ground truth.
pub struct MockTransport {
    truths: BTreeMap<String, SceneTruth>,
    cfg: OracleConfig,
}

impl MockTransport {
    pub fn new(truths: impl IntoIterator<Item = SceneTruth>, cfg: OracleConfig) -> Self {
        Self {
            truths: truths.into_iter().map(|t| (t.scene_id.clone(), t)).collect(),
            cfg,
        }
    }
}

impl Transport for MockTransport {
    fn send(&self, bundle: &PromptBundle, _request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let truth = self
            .truths
            .get(&bundle.scene_id)
            .ok_or_else(|| ClientError::UnknownScene(bundle.scene_id.clone()))?;
        mock_oracle(bundle, truth, &self.cfg)
    }
}
