use super::action::Command;
use crate::geometry::{wrap_angle, Vec3};
use crate::planner::{
    approach_point, plan_path, FollowParams, FollowStatus, GripperError, PathFollower, PlannerError, ReachModel,
};
use crate::sim::{
    bbox_center, from_norm, step, BasePose, GripperCmd, GripperEvent, LowLevelAction, Observation, PoseGraph,
    RobotState, SimConfig,
};
use crate::world::{RestingOn, SceneSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecFailure {
    FrameOutOfRange,
    InvalidDepth,
    Unreachable,
    Stuck,
    SimBudgetExceeded,
    NothingInRange,
    AlreadyHolding,
    NotHolding,
    OutOfReach,
}

impl From<&GripperError> for ExecFailure {
    fn from(e: &GripperError) -> Self {
        match e {
            GripperError::AlreadyHolding(_) => ExecFailure::AlreadyHolding,
            GripperError::NothingInRange => ExecFailure::NothingInRange,
            GripperError::NotHolding => ExecFailure::NotHolding,
            GripperError::OutOfReach { .. } => ExecFailure::OutOfReach,
        }
    }
}

/// Robot state snapshot taken during execution; frames are re-rendered
/// from these poses instead of being stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub sim_step: usize,
    pub pose: BasePose,
    pub holding: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub success: bool,
    pub failure: Option<ExecFailure>,
    pub sim_steps: usize,
    pub collisions: usize,
    /// World point the action was aimed at (unprojected box center or
    /// retrieved frame position).
    pub target_point: Option<[f64; 3]>,
    /// Distance between grasp point and grasped object center.
    pub grasp_distance: Option<f64>,
    pub grasped: Option<String>,
    pub placed_on: Option<RestingOn>,
    /// Sim step at which the gripper command was issued.
    pub gripper_step: Option<usize>,
    pub path: Vec<[f64; 2]>,
    pub checkpoints: Vec<Checkpoint>,
}

impl ExecutionOutcome {
    fn new() -> Self {
        Self {
            success: false,
            failure: None,
            sim_steps: 0,
            collisions: 0,
            target_point: None,
            grasp_distance: None,
            grasped: None,
            placed_on: None,
            gripper_step: None,
            path: Vec::new(),
            checkpoints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecConfig {
    pub dt: f64,
    /// Simulator steps allowed per high-level action.
    pub sim_budget: usize,
    pub checkpoint_every: usize,
    pub grasp_radius: f64,
    pub reach: ReachModel,
    pub follow: FollowParams,
    pub record_checkpoints: bool,
}

impl Default for ExecConfig {
    fn default() -> Self {
        let reach = ReachModel::default();
        Self {
            dt: 0.1,
            sim_budget: 800,
            checkpoint_every: 10,
            grasp_radius: reach.pick_success_radius,
            reach,
            follow: FollowParams::default(),
            record_checkpoints: true,
        }
    }
}

/// Approach sim steps before the gripper closes or opens.
const ARM_APPROACH_STEPS: usize = 2;
const FACING_TOLERANCE: f64 = 1e-3;

struct Runner<'a> {
    state: RobotState,
    scene: &'a mut SceneSpec,
    cfg: &'a ExecConfig,
    sim: SimConfig,
    out: ExecutionOutcome,
}

impl Runner<'_> {
    fn checkpoint(&mut self) {
        if self.cfg.record_checkpoints {
            let cp = Checkpoint {
                sim_step: self.out.sim_steps,
                pose: self.state.base,
                holding: self.state.holding.clone(),
            };
            if self.out.checkpoints.last() != Some(&cp) {
                self.out.checkpoints.push(cp);
            }
        }
    }

    fn apply(&mut self, a: &LowLevelAction, every_step: bool) -> Option<Result<GripperEvent, GripperError>> {
        let r = step(&self.state, self.scene, a, self.cfg.dt, &self.sim);
        self.state = r.state;
        self.out.sim_steps += 1;
        if r.collision {
            self.out.collisions += 1;
        }
        if every_step || self.out.sim_steps.is_multiple_of(self.cfg.checkpoint_every.max(1)) {
            self.checkpoint();
        }
        r.gripper
    }

    fn budget_left(&self) -> bool {
        self.out.sim_steps < self.cfg.sim_budget
    }

    fn drive_to(&mut self, goal: [f64; 2]) -> Result<(), ExecFailure> {
        let path = plan_path(self.scene, self.state.base.xy(), goal, &self.cfg.reach).map_err(|e| match e {
            PlannerError::Stuck { .. } => ExecFailure::Stuck,
            _ => ExecFailure::Unreachable,
        })?;
        self.out.path = path.waypoints.clone();
        let mut follower = PathFollower::new(&path, self.cfg.follow);
        loop {
            match follower.next(&self.state, self.cfg.dt) {
                FollowStatus::Arrived => return Ok(()),
                FollowStatus::Stuck => return Err(ExecFailure::Stuck),
                FollowStatus::Command(a) => {
                    if !self.budget_left() {
                        return Err(ExecFailure::SimBudgetExceeded);
                    }
                    self.apply(&a, false);
                }
            }
        }
    }

    fn turn_to(&mut self, yaw: f64) -> Result<(), ExecFailure> {
        loop {
            let err = wrap_angle(yaw - self.state.base.yaw);
            if err.abs() <= FACING_TOLERANCE {
                return Ok(());
            }
            if !self.budget_left() {
                return Err(ExecFailure::SimBudgetExceeded);
            }
            let w = (err / self.cfg.dt).clamp(-self.cfg.follow.w_max, self.cfg.follow.w_max);
            self.apply(&LowLevelAction::drive(0.0, w), false);
        }
    }

    fn face(&mut self, p: [f64; 2]) -> Result<(), ExecFailure> {
        let b = self.state.base;
        if (p[0] - b.x).hypot(p[1] - b.y) < 1e-6 {
            return Ok(());
        }
        self.turn_to((p[1] - b.y).atan2(p[0] - b.x))
    }

    fn gripper(&mut self, cmd: GripperCmd) -> Result<(), ExecFailure> {
        for _ in 0..ARM_APPROACH_STEPS {
            self.apply(&LowLevelAction::IDLE, true);
        }
        self.out.gripper_step = Some(self.out.sim_steps + 1);
        match self.apply(&LowLevelAction::gripper(cmd), true) {
            Some(Ok(GripperEvent::Grasped(g))) => {
                self.out.grasp_distance = Some(g.distance);
                self.out.grasped = Some(g.obj_id);
                Ok(())
            }
            Some(Ok(GripperEvent::Released(r))) => {
                self.out.placed_on = Some(r.resting_on);
                Ok(())
            }
            Some(Err(e)) => Err(ExecFailure::from(&e)),
            None => Ok(()),
        }
    }
}

/// World point under the center of a normalized box in the ego frame.
pub fn target_from_bbox(ego: &Observation, b: &crate::sim::BboxNorm) -> Result<Vec3, ExecFailure> {
    let px = from_norm(b, ego.camera.image_size);
    let (u, v) = bbox_center(&px);
    let depth = ego.depth.depth_at(u, v).ok_or(ExecFailure::InvalidDepth)?;
    ego.camera.unproject(u, v, depth).map_err(|_| ExecFailure::InvalidDepth)
}

/// Runs one high-level command to completion in the simulator.
pub fn execute(
    command: &Command,
    state: &RobotState,
    scene: &mut SceneSpec,
    pose_frames: &PoseGraph,
    ego: &Observation,
    cfg: &ExecConfig,
) -> (ExecutionOutcome, RobotState) {
    let mut run = Runner {
        state: state.clone(),
        scene,
        cfg,
        sim: SimConfig {
            v_max: cfg.follow.v_max,
            w_max: cfg.follow.w_max,
            reach: cfg.reach,
        },
        out: ExecutionOutcome::new(),
    };
    run.checkpoint();
    let result = (|| -> Result<(), ExecFailure> {
        match *command {
            Command::SearchSceneFrame(k) => {
                let frame = pose_frames.frames.get(k).ok_or(ExecFailure::FrameOutOfRange)?;
                run.out.target_point = Some([frame.pose.x, frame.pose.y, 0.0]);
                run.drive_to(frame.pose.xy())?;
                run.turn_to(frame.pose.yaw)
            }
            Command::NavToPoint(b) => {
                let p = target_from_bbox(ego, &b)?;
                run.out.target_point = Some(p.to_array());
                let goal = approach_point(run.scene, run.state.base.xy(), [p.x, p.y], &cfg.reach)
                    .ok_or(ExecFailure::Unreachable)?;
                run.drive_to(goal)?;
                run.face([p.x, p.y])
            }
            Command::Pick(b) => {
                let p = target_from_bbox(ego, &b)?;
                run.out.target_point = Some(p.to_array());
                run.gripper(GripperCmd::Grasp {
                    target: p.to_array(),
                    radius: cfg.grasp_radius,
                })
            }
            Command::Place(b) => {
                let p = target_from_bbox(ego, &b)?;
                run.out.target_point = Some(p.to_array());
                run.gripper(GripperCmd::Ungrasp { target: p.to_array() })
            }
        }
    })();
    match result {
        Ok(()) => run.out.success = true,
        Err(f) => run.out.failure = Some(f),
    }
    run.checkpoint();
    (run.out, run.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::observe;
    use crate::world::{OccupancyGrid, Receptacle};

    fn room() -> SceneSpec {
        let mut s = SceneSpec::empty("e", 60, 60, 0.1);
        s.occupancy = OccupancyGrid::walled(60, 60);
        s
    }

    fn empty_graph() -> PoseGraph {
        PoseGraph { frames: Vec::new() }
    }

    fn floor_box_ahead(state: &RobotState, dist: f64) -> crate::sim::BboxNorm {
        let cam = state.camera();
        let p = Vec3::new(state.base.x + dist, state.base.y, 0.0);
        let (u, v, _) = cam.project_point(p).unwrap();
        cam.bbox_norm(&[u - 5.0, v - 5.0, u + 5.0, v + 5.0])
    }

    #[test]
    fn nav_to_floor_point_ahead() {
        let mut s = room();
        let st = RobotState::at(BasePose::new(1.0, 3.0, 0.0));
        let ego = observe(&st, &s);
        let b = floor_box_ahead(&st, 3.0);
        let (out, after) = execute(&Command::NavToPoint(b), &st, &mut s, &empty_graph(), &ego, &ExecConfig::default());
        assert!(out.success, "{out:?}");
        let t = out.target_point.unwrap();
        assert!((t[0] - 4.0).abs() < 0.05 && t[2].abs() < 0.01, "{t:?}");
        assert!(after.base.distance_xy(t[0], t[1]) <= 0.6);
        assert_eq!(out.checkpoints.first().unwrap().sim_step, 0);
        assert_eq!(out.checkpoints.last().unwrap().sim_step, out.sim_steps);
    }

    #[test]
    fn box_on_void_is_invalid_depth() {
        let mut s = room();
        let mut st = RobotState::at(BasePose::new(1.0, 3.0, 0.0));
        st.camera_pitch = 0.3;
        let ego = observe(&st, &s);
        let (out, after) = execute(
            &Command::NavToPoint([450, 0, 550, 20]),
            &st,
            &mut s,
            &empty_graph(),
            &ego,
            &ExecConfig::default(),
        );
        assert_eq!(out.failure, Some(ExecFailure::InvalidDepth));
        assert_eq!(after.base, st.base);
    }

    #[test]
    fn pick_over_object_while_adjacent() {
        let mut s = room();
        s.add_receptacle(Receptacle::new("rec_0", "table", [2.0, 3.0], [0.6, 0.6], 0.7).unwrap());
        s.add_object_on("obj_0", "mug", "rec_0", [1.85, 3.0], 0.06).unwrap();
        let st = RobotState::at(BasePose::new(1.3, 3.0, 0.0));
        let ego = observe(&st, &s);
        let e = ego.entity("obj_0").unwrap().clone();
        let (out, after) = execute(&Command::Pick(e.bbox_norm), &st, &mut s, &empty_graph(), &ego, &ExecConfig::default());
        assert!(out.success, "{out:?}");
        assert_eq!(after.holding.as_deref(), Some("obj_0"));
        assert_eq!(s.object("obj_0").unwrap().resting_on, RestingOn::Held);
        assert!(out.grasp_distance.unwrap() <= 0.15);
        assert_eq!(out.checkpoints.len(), 4);
    }
}
