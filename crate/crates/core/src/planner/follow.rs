use super::{Path, PlannerError};
use crate::geometry::wrap_angle;
use crate::sim::{step, LowLevelAction, RobotState, SimConfig};
use crate::world::SceneSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FollowParams {
    pub arrival_tolerance: f64,
    pub heading_tolerance: f64,
    pub v_max: f64,
    pub w_max: f64,
    /// Steps without progress before the follower gives up.
    pub stuck_window: usize,
}

impl Default for FollowParams {
    fn default() -> Self {
        Self {
            arrival_tolerance: 0.1,
            heading_tolerance: 0.05,
            v_max: 1.0,
            w_max: 1.5,
            stuck_window: 50,
        }
    }
}

const WAYPOINT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FollowStatus {
    Command(LowLevelAction),
    Arrived,
    Stuck,
}

/// Rotate-then-drive tracker over a waypoint list.
#[derive(Debug, Clone)]
pub struct PathFollower {
    waypoints: Vec<[f64; 2]>,
    idx: usize,
    params: FollowParams,
    best: (usize, f64),
    idle: usize,
}

impl PathFollower {
    pub fn new(path: &Path, params: FollowParams) -> Self {
        Self {
            waypoints: path.waypoints.clone(),
            idx: 0,
            params,
            best: (0, f64::INFINITY),
            idle: 0,
        }
    }

    pub fn waypoint_index(&self) -> usize {
        self.idx
    }

    /// Next command for the robot at `state`.
    pub fn next(&mut self, state: &RobotState, dt: f64) -> FollowStatus {
        let b = state.base;
        let last = self.waypoints.len() - 1;
        let dist_to = |w: [f64; 2]| (w[0] - b.x).hypot(w[1] - b.y);
        if dist_to(self.waypoints[last]) <= self.params.arrival_tolerance {
            return FollowStatus::Arrived;
        }
        while self.idx < last && dist_to(self.waypoints[self.idx]) <= WAYPOINT_TOLERANCE {
            self.idx += 1;
        }
        let target = self.waypoints[self.idx];
        let dist = dist_to(target);

        let progressed = self.idx > self.best.0 || (self.idx == self.best.0 && dist < self.best.1 - 1e-6);
        if progressed {
            self.best = (self.idx, dist);
            self.idle = 0;
        } else {
            self.idle += 1;
            if self.idle >= self.params.stuck_window {
                return FollowStatus::Stuck;
            }
        }

        let heading = (target[1] - b.y).atan2(target[0] - b.x);
        let err = wrap_angle(heading - b.yaw);
        let w = (err / dt).clamp(-self.params.w_max, self.params.w_max);
        if err.abs() > self.params.heading_tolerance {
            FollowStatus::Command(LowLevelAction::drive(0.0, w))
        } else {
            let v = self.params.v_max.min(dist / dt);
            FollowStatus::Command(LowLevelAction::drive(v, w))
        }
    }
}

#[derive(Debug, Clone)]
pub struct FollowRun {
    pub actions: Vec<LowLevelAction>,
    pub state: RobotState,
}

/// Drives `path` in simulation and returns the emitted command stream.
pub fn follow_path(
    state: &RobotState,
    scene: &SceneSpec,
    path: &Path,
    dt: f64,
    params: &FollowParams,
    max_steps: usize,
) -> Result<FollowRun, PlannerError> {
    let mut scene = scene.clone();
    let cfg = SimConfig {
        v_max: params.v_max,
        w_max: params.w_max,
        ..SimConfig::default()
    };
    let mut follower = PathFollower::new(path, *params);
    let mut state = state.clone();
    let mut actions = Vec::new();
    loop {
        match follower.next(&state, dt) {
            FollowStatus::Arrived => return Ok(FollowRun { actions, state }),
            FollowStatus::Stuck => return Err(PlannerError::Stuck { steps: actions.len() }),
            FollowStatus::Command(a) => {
                if actions.len() >= max_steps {
                    return Err(PlannerError::Stuck { steps: actions.len() });
                }
                state = step(&state, &mut scene, &a, dt, &cfg).state;
                actions.push(a);
            }
        }
    }
}
