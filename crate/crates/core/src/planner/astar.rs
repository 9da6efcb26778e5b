use super::{PlannerError, ReachModel};
use crate::world::{Cell, SceneSpec};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<[f64; 2]>,
    pub total_length: f64,
    /// Cost of the underlying cell sequence (straight 1, diagonal sqrt 2)
    /// scaled by the cell size.
    pub grid_cost: f64,
}

impl Path {
    pub fn from_waypoints(waypoints: Vec<[f64; 2]>, grid_cost: f64) -> Self {
        let total_length = waypoints
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum();
        Self {
            waypoints,
            total_length,
            grid_cost,
        }
    }

    pub fn goal(&self) -> [f64; 2] {
        *self.waypoints.last().expect("path has at least one waypoint")
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    // min-heap on f, then larger g (deeper first), then lower index
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&o.g))
            .then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// A* over free cells; returns the cell sequence and its cost in cells.
pub fn astar_cells(scene: &SceneSpec, start: Cell, goal: Cell) -> Option<(Vec<Cell>, f64)> {
    let grid = &scene.occupancy;
    if grid.is_blocked(start) || grid.is_blocked(goal) {
        return None;
    }
    let h = |c: Cell| (c.i as f64 - goal.i as f64).hypot(c.j as f64 - goal.j as f64);
    let mut g = vec![f64::INFINITY; grid.len()];
    let mut parent = vec![usize::MAX; grid.len()];
    let mut closed = vec![false; grid.len()];
    let mut open = BinaryHeap::new();
    let s = grid.index(start);
    g[s] = 0.0;
    open.push(Open { f: h(start), g: 0.0, idx: s });
    let target = grid.index(goal);
    while let Some(Open { g: gc, idx, .. }) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == target {
            let mut cells = vec![goal];
            let mut cur = idx;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push(grid.cell_at(cur));
            }
            cells.reverse();
            return Some((cells, gc));
        }
        let c = grid.cell_at(idx);
        for (n, cost) in grid.free_neighbors(c) {
            let ni = grid.index(n);
            let ng = gc + cost;
            if !closed[ni] && ng < g[ni] - 1e-12 {
                g[ni] = ng;
                parent[ni] = idx;
                open.push(Open { f: ng + h(n), g: ng, idx: ni });
            }
        }
    }
    None
}

/// Plans from world point `start` to world point `goal`.
///
/// When the goal cell is blocked or not connected to the start, the path
/// ends at the connected free cell nearest to the goal within the reach
/// model's standoff radius.
pub fn plan_path(
    scene: &SceneSpec,
    start: [f64; 2],
    goal: [f64; 2],
    reach: &ReachModel,
) -> Result<Path, PlannerError> {
    let sc = scene
        .cell_of(start[0], start[1])
        .filter(|c| scene.occupancy.is_free(*c))
        .ok_or(PlannerError::StartBlocked(start))?;
    let gc = scene.cell_of(goal[0], goal[1]).ok_or(PlannerError::GoalOutsideGrid(goal))?;
    if start == goal {
        return Ok(Path::from_waypoints(vec![start], 0.0));
    }
    let reachable = scene.occupancy.flood_fill(sc);
    let (goal_cell, goal_point) = if reachable[scene.occupancy.index(gc)] {
        (gc, goal)
    } else {
        let mut best: Option<(f64, usize)> = None;
        for (idx, &ok) in reachable.iter().enumerate() {
            if !ok {
                continue;
            }
            let c = scene.cell_center(scene.occupancy.cell_at(idx));
            let d = (c[0] - goal[0]).hypot(c[1] - goal[1]);
            if d <= reach.standoff_radius && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, idx));
            }
        }
        let (_, idx) = best.ok_or(PlannerError::Unreachable(goal))?;
        let cell = scene.occupancy.cell_at(idx);
        (cell, scene.cell_center(cell))
    };
    let (cells, cost) = astar_cells(scene, sc, goal_cell).ok_or(PlannerError::Unreachable(goal))?;
    let mut waypoints = vec![start];
    if cells.len() > 2 {
        waypoints.extend(cells[1..cells.len() - 1].iter().map(|&c| scene.cell_center(c)));
    }
    if goal_point != start {
        waypoints.push(goal_point);
    }
    Ok(Path::from_waypoints(waypoints, cost * scene.cell_size))
}
