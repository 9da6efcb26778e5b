//! Robot kinematics and the observation model.

mod camera;
mod observe;
mod pose_graph;

pub use camera::{
    bbox_center, from_norm, to_norm, BboxNorm, BboxPx, CameraPose, DEFAULT_HFOV, DEFAULT_IMAGE_SIZE,
};
pub use observe::{
    observe, observe_from, DepthRaster, Entity, EntityKind, HitKind, Observation, SceneSnapshot,
};
pub use pose_graph::{main_cell_centers, render_pose_graph, PoseFrame, PoseGraph, Provenance};

use crate::geometry::{wrap_angle, Vec3};
use crate::planner::{self, GripperError, GraspOutcome, ReachModel, ReleaseOutcome};
use crate::world::{RestingOn, SceneSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_CAMERA_HEIGHT: f64 = 1.2;
pub const DEFAULT_CAMERA_PITCH: f64 = -0.35;
/// Height of the end effector while carrying an object.
pub const END_EFFECTOR_HEIGHT: f64 = 0.7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid depth {0}")]
    InvalidDepth(f64),
    #[error("pixel ({0}, {1}) outside the image")]
    PixelOutOfImage(f64, f64),
    #[error("no viewpoint sees {0}")]
    NoViewpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl BasePose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn distance_xy(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub base: BasePose,
    pub camera_height: f64,
    pub camera_pitch: f64,
    pub hfov: f64,
    pub image_size: [u32; 2],
    pub holding: Option<String>,
    pub step_index: u64,
}

impl RobotState {
    pub fn at(base: BasePose) -> Self {
        Self {
            base,
            camera_height: DEFAULT_CAMERA_HEIGHT,
            camera_pitch: DEFAULT_CAMERA_PITCH,
            hfov: DEFAULT_HFOV,
            image_size: DEFAULT_IMAGE_SIZE,
            holding: None,
            step_index: 0,
        }
    }

    pub fn camera(&self) -> CameraPose {
        CameraPose {
            position: [self.base.x, self.base.y, self.camera_height],
            yaw: self.base.yaw,
            pitch: self.camera_pitch,
            hfov: self.hfov,
            image_size: self.image_size,
        }
    }

    pub fn end_effector(&self) -> Vec3 {
        Vec3::new(self.base.x, self.base.y, END_EFFECTOR_HEIGHT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum GripperCmd {
    None,
    Grasp { target: [f64; 3], radius: f64 },
    Ungrasp { target: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowLevelAction {
    /// `(linear m/s, angular rad/s)`.
    pub base: Option<(f64, f64)>,
    pub gripper: GripperCmd,
}

impl LowLevelAction {
    pub const IDLE: LowLevelAction = LowLevelAction {
        base: None,
        gripper: GripperCmd::None,
    };

    pub fn drive(v: f64, w: f64) -> Self {
        Self {
            base: Some((v, w)),
            gripper: GripperCmd::None,
        }
    }

    pub fn gripper(cmd: GripperCmd) -> Self {
        Self { base: None, gripper: cmd }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub v_max: f64,
    pub w_max: f64,
    pub reach: ReachModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            v_max: 1.0,
            w_max: 1.5,
            reach: ReachModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GripperEvent {
    Grasped(GraspOutcome),
    Released(ReleaseOutcome),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: RobotState,
    pub collision: bool,
    pub gripper: Option<Result<GripperEvent, GripperError>>,
}

/// True when the straight segment between two points stays in free cells.
pub fn segment_clear(scene: &SceneSpec, from: [f64; 2], to: [f64; 2]) -> bool {
    let len = (to[0] - from[0]).hypot(to[1] - from[1]);
    let n = ((len / (scene.cell_size / 4.0)).ceil() as usize).max(1);
    (1..=n).all(|k| {
        let t = k as f64 / n as f64;
        scene.is_navigable(from[0] + (to[0] - from[0]) * t, from[1] + (to[1] - from[1]) * t)
    })
}

/// Advances the robot by one control step of length `dt`.
///
/// Motion that would end in, or pass through, a blocked cell leaves the
/// position unchanged and raises the collision flag. A held object is kept
/// at the end effector.
pub fn step(
    state: &RobotState,
    scene: &mut SceneSpec,
    a: &LowLevelAction,
    dt: f64,
    cfg: &SimConfig,
) -> StepOutcome {
    let mut next = state.clone();
    next.step_index += 1;
    let mut collision = false;
    if let Some((v, w)) = a.base {
        let v = v.clamp(-cfg.v_max, cfg.v_max);
        let w = w.clamp(-cfg.w_max, cfg.w_max);
        let b = state.base;
        let nx = b.x + v * b.yaw.cos() * dt;
        let ny = b.y + v * b.yaw.sin() * dt;
        if v != 0.0 {
            if segment_clear(scene, [b.x, b.y], [nx, ny]) {
                next.base.x = nx;
                next.base.y = ny;
            } else {
                collision = true;
            }
        }
        next.base.yaw = wrap_angle(b.yaw + w * dt);
    }

    let gripper = match a.gripper {
        GripperCmd::None => None,
        GripperCmd::Grasp { target, radius } => Some(
            planner::try_grasp(&next, scene, Vec3::from_array(target), radius, &cfg.reach).map(|g| {
                next.holding = Some(g.obj_id.clone());
                GripperEvent::Grasped(g)
            }),
        ),
        GripperCmd::Ungrasp { target } => Some(
            planner::try_release(&next, scene, Vec3::from_array(target), &cfg.reach).map(|r| {
                if let Some(obj) = scene.object_mut(&r.obj_id) {
                    obj.position = r.position;
                    obj.resting_on = r.resting_on.clone();
                }
                next.holding = None;
                GripperEvent::Released(r)
            }),
        ),
    };

    if let Some(id) = &next.holding {
        let ee = next.end_effector().to_array();
        if let Some(obj) = scene.object_mut(id) {
            obj.position = ee;
            obj.resting_on = RestingOn::Held;
        }
    }
    StepOutcome {
        state: next,
        collision,
        gripper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{OccupancyGrid, SceneSpec};

    fn open_scene() -> SceneSpec {
        let mut s = SceneSpec::empty("open", 20, 20, 0.1);
        s.occupancy = OccupancyGrid::new(20, 20);
        s
    }

    #[test]
    fn zero_command_only_counts_step() {
        let mut s = open_scene();
        let st = RobotState::at(BasePose::new(0.55, 0.55, 0.3));
        let out = step(&st, &mut s, &LowLevelAction::drive(0.0, 0.0), 0.1, &SimConfig::default());
        assert_eq!(out.state.base, st.base);
        assert_eq!(out.state.step_index, 1);
        assert!(!out.collision);
    }

    #[test]
    fn axis_aligned_drive() {
        let mut s = open_scene();
        let st = RobotState::at(BasePose::new(0.0, 0.0, 0.0));
        let out = step(&st, &mut s, &LowLevelAction::drive(1.0, 0.0), 0.5, &SimConfig::default());
        assert!((out.state.base.x - 0.5).abs() < 1e-12);
        assert_eq!(out.state.base.y, 0.0);
    }

    #[test]
    fn blocked_motion_keeps_position() {
        let mut s = open_scene();
        s.occupancy.set_blocked(crate::world::Cell::new(3, 0), true);
        let st = RobotState::at(BasePose::new(0.25, 0.05, 0.0));
        let out = step(&st, &mut s, &LowLevelAction::drive(1.0, 0.2), 0.1, &SimConfig::default());
        assert!(out.collision);
        assert_eq!((out.state.base.x, out.state.base.y), (0.25, 0.05));
        assert!((out.state.base.yaw - 0.02).abs() < 1e-12);
    }

    #[test]
    fn yaw_wraps() {
        let mut s = open_scene();
        let st = RobotState::at(BasePose::new(1.0, 1.0, 3.1));
        let out = step(&st, &mut s, &LowLevelAction::drive(0.0, 1.5), 0.1, &SimConfig::default());
        assert!(out.state.base.yaw <= std::f64::consts::PI && out.state.base.yaw > -std::f64::consts::PI);
        assert!(out.state.base.yaw < 0.0);
    }
}
