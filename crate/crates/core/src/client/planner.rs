use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::eval::segment_box_distance;
use crate::geometry::{Aabb, Vec3};

/// Occupancy grid resolution for route planning, meters.
pub const GRID_RESOLUTION_M: f64 = 0.1;
/// Extra inflation on top of the clearance so straight moves between free
/// cell centers keep the clearance.
const CELL_MARGIN_M: f64 = 0.1;
const SHORTCUT_MARGIN_M: f64 = 0.02;

fn flat(b: &Aabb) -> Aabb {
    Aabb::from_corners(
        Vec3::new(b.min.x, b.min.y, -1.0),
        Vec3::new(b.max.x, b.max.y, 1.0),
    )
}

fn xy(p: &Vec3) -> Vec3 {
    Vec3::new(p.x, p.y, 0.0)
}

struct Grid {
    origin: (f64, f64),
    nx: usize,
    ny: usize,
    blocked: Vec<bool>,
}

impl Grid {
    fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * GRID_RESOLUTION_M,
            self.origin.1 + (j as f64 + 0.5) * GRID_RESOLUTION_M,
        )
    }

    fn cell_of(&self, p: &Vec3) -> (usize, usize) {
        let i = ((p.x - self.origin.0) / GRID_RESOLUTION_M).floor();
        let j = ((p.y - self.origin.1) / GRID_RESOLUTION_M).floor();
        (
            (i.max(0.0) as usize).min(self.nx - 1),
            (j.max(0.0) as usize).min(self.ny - 1),
        )
    }

    fn free(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.nx
            && (j as usize) < self.ny
            && !self.blocked[j as usize * self.nx + i as usize]
    }

    /// Nearest free cell by breadth-first search.
    fn nearest_free(&self, c: (usize, usize)) -> Option<(usize, usize)> {
        let mut seen = vec![false; self.nx * self.ny];
        let mut q = VecDeque::from([c]);
        seen[c.1 * self.nx + c.0] = true;
        while let Some((i, j)) = q.pop_front() {
            if self.free(i as i64, j as i64) {
                return Some((i, j));
            }
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni >= 0 && nj >= 0 && (ni as usize) < self.nx && (nj as usize) < self.ny {
                    let k = nj as usize * self.nx + ni as usize;
                    if !seen[k] {
                        seen[k] = true;
                        q.push_back((ni as usize, nj as usize));
                    }
                }
            }
        }
        None
    }

    /// 8-connected A* without corner cutting; integer costs (1000 per
    /// straight step, 1414 per diagonal).
    fn astar(&self, s: (usize, usize), g: (usize, usize)) -> Option<Vec<(usize, usize)>> {
        let idx = |(i, j): (usize, usize)| j * self.nx + i;
        let h = |(i, j): (usize, usize)| {
            let dx = (i as i64 - g.0 as i64).unsigned_abs();
            let dy = (j as i64 - g.1 as i64).unsigned_abs();
            1000 * dx.max(dy) + 414 * dx.min(dy)
        };
        let n = self.nx * self.ny;
        let mut cost = vec![u64::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut open = BinaryHeap::new();
        cost[idx(s)] = 0;
        open.push(Reverse((h(s), idx(s))));
        while let Some(Reverse((_, k))) = open.pop() {
            let (i, j) = (k % self.nx, k / self.nx);
            if (i, j) == g {
                let mut path = vec![g];
                let mut cur = k;
                while parent[cur] != usize::MAX {
                    cur = parent[cur];
                    path.push((cur % self.nx, cur / self.nx));
                }
                path.reverse();
                return Some(path);
            }
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if !self.free(ni, nj) {
                        continue;
                    }
                    let diagonal = di != 0 && dj != 0;
                    if diagonal && !(self.free(i as i64 + di, j as i64) && self.free(i as i64, j as i64 + dj)) {
                        continue;
                    }
                    let nk = nj as usize * self.nx + ni as usize;
                    let c = cost[k] + if diagonal { 1414 } else { 1000 };
                    if c < cost[nk] {
                        cost[nk] = c;
                        parent[nk] = k;
                        open.push(Reverse((c + h((ni as usize, nj as usize)), nk)));
                    }
                }
            }
        }
        None
    }
}

fn segment_clear(a: &Vec3, b: &Vec3, obstacles: &[Aabb], clearance: f64) -> bool {
    obstacles
        .iter()
        .all(|o| segment_box_distance(&xy(a), &xy(b), o) >= clearance + SHORTCUT_MARGIN_M)
}

/// Waypoints from `start` to `goal` around the obstacle boxes, planned in
/// the ground plane on a 0.1 m grid and shortened by line-of-sight checks.
/// Intermediate waypoints sit at the start height. Falls back to the
/// straight segment when no grid path exists.
pub fn plan_route(start: Vec3, goal: Vec3, obstacles: &[Aabb], clearance: f64) -> Vec<Vec3> {
    let flat_obs: Vec<Aabb> = obstacles.iter().map(flat).collect();
    if segment_clear(&start, &goal, &flat_obs, clearance) {
        return vec![start, goal];
    }
    let inflate = clearance + CELL_MARGIN_M;
    let pad = inflate + 0.5;
    let mut lo = start.xy().inf(&goal.xy());
    let mut hi = start.xy().sup(&goal.xy());
    for o in obstacles {
        lo = lo.inf(&o.min.xy());
        hi = hi.sup(&o.max.xy());
    }
    let origin = (lo.x - pad, lo.y - pad);
    let nx = (((hi.x - lo.x) + 2.0 * pad) / GRID_RESOLUTION_M).ceil() as usize + 1;
    let ny = (((hi.y - lo.y) + 2.0 * pad) / GRID_RESOLUTION_M).ceil() as usize + 1;
    let mut grid = Grid {
        origin,
        nx,
        ny,
        blocked: vec![false; nx * ny],
    };
    for j in 0..ny {
        for i in 0..nx {
            let (cx, cy) = grid.center(i, j);
            let c = Vec3::new(cx, cy, 0.0);
            grid.blocked[j * nx + i] = flat_obs.iter().any(|o| o.distance_to(&c) < inflate);
        }
    }
    let cells = grid
        .nearest_free(grid.cell_of(&start))
        .zip(grid.nearest_free(grid.cell_of(&goal)))
        .and_then(|(s, g)| grid.astar(s, g));
    let Some(cells) = cells else {
        return vec![start, goal];
    };
    let mut raw = vec![start];
    raw.extend(cells.iter().map(|&(i, j)| {
        let (x, y) = grid.center(i, j);
        Vec3::new(x, y, start.z)
    }));
    raw.push(goal);

    // greedy line-of-sight shortening
    let mut out = vec![raw[0]];
    let mut i = 0;
    while i < raw.len() - 1 {
        let mut j = raw.len() - 1;
        while j > i + 1 && !segment_clear(&raw[i], &raw[j], &flat_obs, clearance) {
            j -= 1;
        }
        out.push(raw[j]);
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{route_success, RouteCriteria};

    #[test]
    fn open_floor_is_a_straight_line() {
        let p = plan_route(Vec3::new(0.0, 0.0, 0.3), Vec3::new(4.0, 0.0, 0.3), &[], 0.15);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn detours_around_a_wall() {
        let start = Aabb::from_corners(Vec3::new(0.0, 1.8, 0.0), Vec3::new(0.4, 2.2, 0.6));
        let goal = Aabb::from_corners(Vec3::new(4.0, 1.8, 0.0), Vec3::new(4.4, 2.2, 0.6));
        let wall = Aabb::from_corners(Vec3::new(2.0, 0.5, 0.0), Vec3::new(2.3, 3.5, 1.0));
        let path = plan_route(start.center(), goal.center(), &[wall], 0.15);
        assert!(path.len() > 2);
        let c = RouteCriteria::default();
        assert!(route_success(&path, &start, &goal, &[wall], &c));
    }
}
