use std::collections::HashMap;

use super::{Aabb, Vec3};

type Cell = (i64, i64, i64);

/// Uniform-grid index for k-nearest-neighbor queries over a fixed point set.
///
/// Results are sorted by (distance, index), so queries are deterministic
/// regardless of hash-map iteration order.
pub struct NeighborIndex<'a> {
    points: &'a [Vec3],
    origin: Vec3,
    cell: f64,
    cells: HashMap<Cell, Vec<usize>>,
    max_ring: i64,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let bounds = Aabb::from_points(points).unwrap_or(Aabb {
            min: Vec3::zeros(),
            max: Vec3::zeros(),
        });
        let extent = bounds.extent();
        let diag = extent.norm();
        // size cells from the occupied dimensions so planar sets are not
        // treated as volumes
        let dims: Vec<f64> = extent
            .iter()
            .copied()
            .filter(|e| *e > 1e-9 * diag.max(1e-12))
            .collect();
        let n = points.len().max(1) as f64;
        let cell = if dims.is_empty() {
            1.0
        } else {
            let measure: f64 = dims.iter().product();
            (2.0 * measure / n).powf(1.0 / dims.len() as f64).max(1e-9)
        };
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p, &bounds.min, cell)).or_default().push(i);
        }
        let span = (diag / cell).ceil() as i64 + 1;
        Self {
            points,
            origin: bounds.min,
            cell,
            cells,
            max_ring: span,
        }
    }

    /// The `k` nearest points to `query` (including a coincident point).
    pub fn nearest(&self, query: &Vec3, k: usize) -> Vec<usize> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let center = key(query, &self.origin, self.cell);
        let mut found: Vec<(f64, usize)> = Vec::new();
        for ring in 0..=self.max_ring {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        let c = (center.0 + dx, center.1 + dy, center.2 + dz);
                        if let Some(ids) = self.cells.get(&c) {
                            found.extend(
                                ids.iter()
                                    .map(|&i| ((self.points[i] - query).norm_squared(), i)),
                            );
                        }
                    }
                }
            }
            if found.len() >= k {
                found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                // anything outside the scanned cube is farther than `ring * cell`
                let safe = ring as f64 * self.cell;
                if found[k - 1].0 <= safe * safe {
                    break;
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        found.truncate(k);
        found.into_iter().map(|(_, i)| i).collect()
    }
}

fn key(p: &Vec3, origin: &Vec3, cell: f64) -> Cell {
    let r = (p - origin) / cell;
    (r.x.floor() as i64, r.y.floor() as i64, r.z.floor() as i64)
}
