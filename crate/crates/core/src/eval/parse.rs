use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    Point3d,
    Box3d,
    Path3d,
    Keypoints,
}

/// A parsed model answer. Exactly the field matching `kind` is set when
/// `parse_ok`; none are set otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub kind: PredictionKind,
    pub point: Option<Vec3>,
    #[serde(rename = "box")]
    pub bbox: Option<Aabb>,
    pub path: Option<Vec<Vec3>>,
    pub keypoints: Option<Vec<(String, Vec3)>>,
    pub raw_text: String,
    pub parse_ok: bool,
}

impl Prediction {
    pub fn failed(kind: PredictionKind, raw_text: &str) -> Self {
        Self {
            kind,
            point: None,
            bbox: None,
            path: None,
            keypoints: None,
            raw_text: raw_text.to_string(),
            parse_ok: false,
        }
    }

    pub fn from_point(p: Vec3, raw_text: &str) -> Self {
        Self {
            point: Some(p),
            parse_ok: true,
            ..Self::failed(PredictionKind::Point3d, raw_text)
        }
    }

    pub fn from_box(b: Aabb, raw_text: &str) -> Self {
        Self {
            bbox: Some(b),
            parse_ok: true,
            ..Self::failed(PredictionKind::Box3d, raw_text)
        }
    }

    /// The point a localization answer commits to: the point itself or the
    /// box center.
    pub fn location(&self) -> Option<Vec3> {
        self.point.or_else(|| self.bbox.map(|b| b.center()))
    }
}

const NUM: &str = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?";

static TUPLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"\(\s*{NUM}(?:\s*,\s*{NUM})*\s*\)")).unwrap()
});
static LIST: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[[^\[\]]*\]").unwrap());
static LABEL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([A-Za-z][A-Za-z0-9_]*)[^A-Za-z0-9_(]*[:=]\s*[*_`]*\s*$").unwrap());

/// Every parenthesized numeric tuple in `text`, in order, with its byte span.
fn tuples(text: &str) -> Vec<(usize, usize, Vec<f64>)> {
    TUPLE
        .find_iter(text)
        .filter_map(|m| {
            let inner = &m.as_str()[1..m.as_str().len() - 1];
            let vals: Option<Vec<f64>> =
                inner.split(',').map(|t| t.trim().parse::<f64>().ok()).collect();
            vals.filter(|v| v.iter().all(|x| x.is_finite()))
                .map(|v| (m.start(), m.end(), v))
        })
        .collect()
}

fn tuples_of_arity(text: &str, arity: usize) -> Vec<Vec<f64>> {
    tuples(text).into_iter().map(|t| t.2).filter(|v| v.len() == arity).collect()
}

fn vec3(v: &[f64]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

/// Tuples of `arity` that follow a `label:` on the same line, keyed by the
/// label. Later lines win, so a chain-of-thought conclusion overrides
/// earlier drafts.
pub fn parse_labeled(text: &str, arity: usize) -> BTreeMap<String, Vec<f64>> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        for (start, _, vals) in tuples(line) {
            if vals.len() != arity {
                continue;
            }
            if let Some(c) = LABEL.captures(&line[..start]) {
                out.insert(c[1].to_string(), vals);
            }
        }
    }
    out
}

/// Extracts the last well-formed answer of the requested kind.
pub fn parse_answer(text: &str, kind: PredictionKind) -> Prediction {
    let fail = || Prediction::failed(kind, text);
    match kind {
        PredictionKind::Point3d => match tuples_of_arity(text, 3).last() {
            Some(v) => Prediction::from_point(vec3(v), text),
            None => fail(),
        },
        PredictionKind::Box3d => match tuples_of_arity(text, 6).last() {
            Some(v) => Prediction::from_box(
                Aabb::from_corners(vec3(&v[..3]), vec3(&v[3..])),
                text,
            ),
            None => fail(),
        },
        PredictionKind::Path3d => {
            let from_list = LIST
                .find_iter(text)
                .map(|m| tuples_of_arity(m.as_str(), 3))
                .filter(|t| !t.is_empty())
                .last();
            let pts = from_list.unwrap_or_else(|| tuples_of_arity(text, 3));
            if pts.is_empty() {
                return fail();
            }
            Prediction {
                path: Some(pts.iter().map(|v| vec3(v)).collect()),
                parse_ok: true,
                ..fail()
            }
        }
        PredictionKind::Keypoints => {
            let named = parse_labeled(text, 3);
            if named.is_empty() {
                return fail();
            }
            Prediction {
                keypoints: Some(named.into_iter().map(|(k, v)| (k, vec3(&v))).collect()),
                parse_ok: true,
                ..fail()
            }
        }
    }
}

/// Per-letter answers for a multi-object localization. When only one
/// object was asked about, an unlabeled answer falls back to the last tuple.
pub fn parse_localize(
    text: &str,
    letters: &[char],
    kind: PredictionKind,
) -> BTreeMap<char, Prediction> {
    let arity = if kind == PredictionKind::Box3d { 6 } else { 3 };
    let labeled = parse_labeled(text, arity);
    letters
        .iter()
        .map(|&l| {
            let pred = match labeled.get(&l.to_string()) {
                Some(v) if arity == 3 => Prediction::from_point(vec3(v), text),
                Some(v) => Prediction::from_box(Aabb::from_corners(vec3(&v[..3]), vec3(&v[3..])), text),
                None if letters.len() == 1 => parse_answer(text, kind),
                None => Prediction::failed(kind, text),
            };
            (l, pred)
        })
        .collect()
}
