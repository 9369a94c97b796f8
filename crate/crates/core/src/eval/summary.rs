use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{acc_at_iou, nrmse, SceneErrors};
use super::record::EvalRecord;
use super::EvalError;
use crate::prompt::AnswerShape;

/// Aggregates of one run. Localization errors are absent when the run had
/// no localization queries, rates when no query produced the quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub nrmse_center: Option<f64>,
    pub nrmse_bbx: Option<f64>,
    pub success_rate: Option<f64>,
    pub acc_025: Option<f64>,
    pub acc_05: Option<f64>,
    pub n_scenes: usize,
    pub n_objects: usize,
    pub parse_failure_rate: f64,
}

fn grouped(records: &[&EvalRecord], pick: impl Fn(&EvalRecord) -> Option<f64>) -> Vec<SceneErrors> {
    let mut by_scene: BTreeMap<&str, SceneErrors> = BTreeMap::new();
    for r in records {
        by_scene
            .entry(r.scene_id.as_str())
            .or_insert_with(|| SceneErrors {
                distances: Vec::new(),
                normalizer: r.normalizer,
            })
            .distances
            .push(pick(r));
    }
    by_scene.into_values().collect()
}

pub fn summarize(records: &[EvalRecord]) -> Result<RunSummary, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyRun);
    }
    let loc: Vec<&EvalRecord> = records.iter().filter(|r| r.is_localization()).collect();
    let (nrmse_center, nrmse_bbx) = if loc.is_empty() {
        (None, None)
    } else {
        (
            Some(nrmse(&grouped(&loc, |r| r.d_center))?),
            Some(nrmse(&grouped(&loc, |r| r.d_bbx))?),
        )
    };
    // a box contains its center, so the box distance never exceeds the
    // center distance and neither can its normalized mean
    if let (Some(c), Some(b)) = (nrmse_center, nrmse_bbx) {
        if b > c + 1e-12 {
            return Err(EvalError::InvariantViolated(format!(
                "to-bbx error {b} exceeds to-center error {c}"
            )));
        }
    }
    let verdicts: Vec<bool> = records.iter().filter_map(|r| r.verdict).collect();
    let success_rate = (!verdicts.is_empty())
        .then(|| verdicts.iter().filter(|v| **v).count() as f64 / verdicts.len() as f64);
    let boxed: Vec<&&EvalRecord> = loc
        .iter()
        .filter(|r| r.answer_shape == AnswerShape::Box)
        .collect();
    let (acc_025, acc_05) = if boxed.is_empty() {
        (None, None)
    } else {
        let preds: Vec<_> = boxed.iter().map(|r| r.prediction.bbox).collect();
        let truths: Vec<_> = boxed.iter().map(|r| r.truth_box).collect();
        (
            Some(acc_at_iou(&preds, &truths, 0.25)?),
            Some(acc_at_iou(&preds, &truths, 0.5)?),
        )
    };
    let failures = records.iter().filter(|r| !r.parse_ok).count();
    Ok(RunSummary {
        nrmse_center,
        nrmse_bbx,
        success_rate,
        acc_025,
        acc_05,
        n_scenes: records.iter().map(|r| &r.scene_id).collect::<BTreeSet<_>>().len(),
        n_objects: records.len(),
        parse_failure_rate: failures as f64 / records.len() as f64,
    })
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    arm: &'a str,
    n_scenes: usize,
    n_objects: usize,
    to_center: Option<f64>,
    to_bbx: Option<f64>,
    success_rate: Option<f64>,
    acc_025: Option<f64>,
    acc_05: Option<f64>,
    parse_failure_rate: f64,
}

/// One CSV row per labeled summary.
pub fn summary_csv(rows: &[(String, RunSummary)]) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (arm, s) in rows {
        w.serialize(CsvRow {
            arm,
            n_scenes: s.n_scenes,
            n_objects: s.n_objects,
            to_center: s.nrmse_center,
            to_bbx: s.nrmse_bbx,
            success_rate: s.success_rate,
            acc_025: s.acc_025,
            acc_05: s.acc_05,
            parse_failure_rate: s.parse_failure_rate,
        })
        .map_err(|e| EvalError::Report(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| EvalError::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| EvalError::Report(e.to_string()))
}

fn cell(v: Option<f64>, percent: bool) -> String {
    match v {
        Some(x) if percent => format!("{:.1}%", 100.0 * x),
        Some(x) => format!("{x:.3}"),
        None => "-".to_string(),
    }
}

/// Markdown comparison table with "To center" / "To bbx" columns.
pub fn markdown_table(rows: &[(String, RunSummary)]) -> String {
    let mut s = String::from(
        "| Arm | To center | To bbx | Success | Acc@0.25 | Acc@0.5 | Parse failures | Scenes | Objects |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for (arm, r) in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            arm,
            cell(r.nrmse_center, false),
            cell(r.nrmse_bbx, false),
            cell(r.success_rate, true),
            cell(r.acc_025, true),
            cell(r.acc_05, true),
            cell(Some(r.parse_failure_rate), true),
            r.n_scenes,
            r.n_objects
        );
    }
    s
}

pub fn write_results_jsonl(records: &[EvalRecord], path: &Path) -> Result<(), EvalError> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_results_jsonl(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(EvalError::from))
        .collect()
}

/// Writes `results.jsonl`, `summary.csv` and `report.md` into `dir`.
pub fn write_report(
    dir: &Path,
    arm: &str,
    records: &[EvalRecord],
    summary: &RunSummary,
) -> Result<(), EvalError> {
    fs::create_dir_all(dir)?;
    write_results_jsonl(records, &dir.join("results.jsonl"))?;
    let rows = [(arm.to_string(), summary.clone())];
    fs::write(dir.join("summary.csv"), summary_csv(&rows)?)?;
    fs::write(dir.join("report.md"), markdown_table(&rows))?;
    Ok(())
}
