use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::pipeline::{load_scenes, prepare_scene, PreparedScene};
use super::synth::{synthetic_scene, synthetic_scene_id};
use super::CliError;
use crate::client::{
    audit_isolation, write_transcript, ChatClient, HttpTransport, MockTransport, Transport,
};
use crate::eval::{score_response, summarize, write_report, EvalRecord, RunSummary, TaskQuery};
use crate::geometry::{unproject_rgbd, write_ply, CameraIntrinsics, DepthImage};
use crate::prompt::write_bundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Ground-truth oracle; never touches the network.
    Mock,
    Live,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn prepare_all(cfg: &PipelineConfig) -> Result<Vec<PreparedScene>, CliError> {
    let inputs = load_scenes(cfg)?;
    inputs.par_iter().map(|s| prepare_scene(cfg, s)).collect()
}

fn write_resolved_config(cfg: &PipelineConfig, dir: &Path) -> Result<(), CliError> {
    let p = dir.join("config.resolved.toml");
    fs::write(&p, cfg.to_toml()).map_err(CliError::io(&p))
}

/// Writes one bundle directory per scene under `<output_dir>/bundles`, plus
/// the ground truth used to score it.
pub fn cmd_render(cfg: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    create_dir(&cfg.output_dir)?;
    write_resolved_config(cfg, &cfg.output_dir)?;
    let prepared = prepare_all(cfg)?;
    prepared
        .iter()
        .map(|p| {
            let dir = cfg.output_dir.join("bundles").join(&p.id);
            write_scene(p, &dir)?;
            Ok(dir)
        })
        .collect()
}

fn write_scene(p: &PreparedScene, dir: &Path) -> Result<(), CliError> {
    write_bundle(&p.bundle, dir).map_err(|e| CliError::from(e).in_scene(&p.id))?;
    let truth = dir.join("truth.json");
    let json = serde_json::to_vec_pretty(&p.truth).expect("truth serializes");
    fs::write(&truth, json).map_err(CliError::io(&truth))
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub summary: RunSummary,
    pub records: Vec<EvalRecord>,
    /// Scenes whose request failed after retries; they score as misses.
    pub failed_scenes: Vec<String>,
    /// Findings of the cross-scene payload audit; empty when isolated.
    pub isolation_violations: Vec<String>,
    pub requests_sent: usize,
}

fn transport(cfg: &PipelineConfig, mode: EvalMode, prepared: &[PreparedScene]) -> Result<Box<dyn Transport>, CliError> {
    Ok(match mode {
        EvalMode::Mock => Box::new(MockTransport::new(
            prepared.iter().map(|p| p.truth.clone()),
            cfg.oracle(),
        )),
        EvalMode::Live => {
            let e = &cfg.endpoint;
            Box::new(HttpTransport::new(
                &e.url,
                &e.api_key_env,
                e.headers.clone(),
                Duration::from_secs(e.timeout_secs),
            )?)
        }
    })
}

/// Prompts, queries and scores every scene, writing bundles, transcript and
/// report into `out_dir` under the label `arm`.
pub fn run_eval(
    cfg: &PipelineConfig,
    mode: EvalMode,
    out_dir: &Path,
    arm: &str,
) -> Result<EvalOutcome, CliError> {
    create_dir(out_dir)?;
    write_resolved_config(cfg, out_dir)?;
    let prepared = prepare_all(cfg)?;
    for p in &prepared {
        write_scene(p, &out_dir.join("bundles").join(&p.id))?;
    }
    let client = ChatClient::new(transport(cfg, mode, &prepared)?, cfg.endpoint.client_config());
    let th = cfg.eval.thresholds();
    let scored: Vec<(Vec<EvalRecord>, bool)> = prepared
        .par_iter()
        .map(|p| {
            let (text, ok) = match client.send(&p.bundle) {
                Ok(r) => (r.text, true),
                Err(e) if mode == EvalMode::Live && !matches!(e, crate::client::ClientError::Auth(_)) => {
                    log::warn!("scene {} failed: {e}", p.id);
                    (String::new(), false)
                }
                Err(e) => return Err(CliError::from(e).in_scene(&p.id)),
            };
            let q = TaskQuery::from_bundle(&p.bundle);
            let records =
                score_response(&q, &text, &p.truth, &th).map_err(|e| CliError::from(e).in_scene(&p.id))?;
            Ok((records, ok))
        })
        .collect::<Result<_, CliError>>()?;

    let failed_scenes: Vec<String> = prepared
        .iter()
        .zip(&scored)
        .filter(|(_, (_, ok))| !ok)
        .map(|(p, _)| p.id.clone())
        .collect();
    let records: Vec<EvalRecord> = scored.into_iter().flat_map(|(r, _)| r).collect();
    let summary = summarize(&records)?;

    let mut transcript = client.transcript();
    transcript.sort_by(|a, b| a.scene_id.cmp(&b.scene_id));
    write_transcript(&transcript, &out_dir.join("transcript.jsonl"))?;
    write_report(out_dir, arm, &records, &summary)?;
    let requests = client.requests();
    Ok(EvalOutcome {
        summary,
        records,
        failed_scenes,
        isolation_violations: audit_isolation(&requests),
        requests_sent: requests.len(),
    })
}

/// Evaluation run into `<output_dir>/eval`.
pub fn cmd_eval(cfg: &PipelineConfig, mode: EvalMode) -> Result<EvalOutcome, CliError> {
    let arm = match mode {
        EvalMode::Mock => "mock".to_string(),
        EvalMode::Live => cfg.endpoint.model.clone(),
    };
    run_eval(cfg, mode, &cfg.output_dir.join("eval"), &arm)
}

/// Back-projects one RGB-D frame and writes a binary PLY. Returns the
/// number of points written.
pub fn cmd_convert(
    color: &Path,
    depth: &Path,
    intrinsics: &Path,
    depth_scale: f64,
    stride: u32,
    out: &Path,
) -> Result<usize, CliError> {
    let read = |p: &Path| fs::read(p).map_err(CliError::io(p));
    let color_img = image::load_from_memory(&read(color)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", color.display())))?
        .into_rgb8();
    let depth_img = DepthImage::from_png(&read(depth)?, depth_scale)?;
    let intr: CameraIntrinsics = serde_json::from_slice(&read(intrinsics)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", intrinsics.display())))?;
    intr.validate()?;
    let cloud = unproject_rgbd(&color_img, &depth_img, &intr, stride)?;
    if cloud.is_empty() {
        log::warn!("{}: no valid depth pixels; writing an empty cloud", depth.display());
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(out, write_ply(&cloud, true)).map_err(CliError::io(out))?;
    Ok(cloud.len())
}

/// Writes `count` generated scenes as ASCII PLY files.
pub fn cmd_synth(out_dir: &Path, count: usize, seed: u64) -> Result<Vec<PathBuf>, CliError> {
    create_dir(out_dir)?;
    (0..count)
        .map(|i| {
            let p = out_dir.join(format!("{}.ply", synthetic_scene_id(i)));
            fs::write(&p, write_ply(&synthetic_scene(i, seed), false)).map_err(CliError::io(&p))?;
            Ok(p)
        })
        .collect()
}
