use super::PromptError;
use crate::geometry::{voxel_downsample, PointCloud, SceneFrame, Vec3};

pub const POINTS_HEADER: &str = "# points x y z (meters)";
pub const DEFAULT_POINTS_BUDGET: usize = 2048;
pub const DEFAULT_POINTS_DECIMALS: usize = 2;

const BISECTION_STEPS: usize = 48;

/// Positions thinned to at most `budget` points. The voxel size is the
/// smallest one (to bisection precision) whose downsample fits the budget.
fn fit_budget(positions: &[Vec3], budget: usize) -> Vec<Vec3> {
    if positions.len() <= budget {
        return positions.to_vec();
    }
    let cloud = PointCloud::from_positions(positions.to_vec());
    let span = positions
        .iter()
        .fold(0.0f64, |m, p| m.max(p.abs().max()));
    let count = |voxel: f64| voxel_downsample(&cloud, voxel).map(|c| c.len());
    let (mut lo, mut hi) = (0.0, 2.0 * span + 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        match count(mid) {
            Ok(n) if n <= budget => hi = mid,
            _ => lo = mid,
        }
    }
    voxel_downsample(&cloud, hi)
        .map(|c| c.positions)
        .unwrap_or_else(|_| positions[..budget].to_vec())
}

/// Header line, then one `x y z` line per point with `decimals` places.
pub fn serialize_points_text(
    scene: &SceneFrame,
    budget: usize,
    decimals: usize,
) -> Result<String, PromptError> {
    if budget == 0 {
        return Err(PromptError::InvalidBudget);
    }
    let kept = fit_budget(&scene.cloud.positions, budget);
    let mut out = String::with_capacity(kept.len() * (3 * (decimals + 4)) + 32);
    out.push_str(POINTS_HEADER);
    out.push('\n');
    for p in kept {
        out.push_str(&format!(
            "{:.d$} {:.d$} {:.d$}\n",
            p.x,
            p.y,
            p.z,
            d = decimals
        ));
    }
    Ok(out)
}

/// Inverse of [`serialize_points_text`]; `#` lines and blank lines are skipped.
pub fn parse_points_text(text: &str) -> Result<Vec<Vec3>, PromptError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| PromptError::MalformedPoints {
            line: n + 1,
            reason: reason.to_string(),
        };
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad("not a number")))
            .collect::<Result<_, _>>()?;
        if vals.len() != 3 {
            return Err(bad("expected three values"));
        }
        out.push(Vec3::new(vals[0], vals[1], vals[2]));
    }
    Ok(out)
}
