//! Low-level actuation: grid planning, path following, and the reach-sphere
//! gripper controller.

mod astar;
mod follow;

pub use astar::{astar_cells, plan_path, Path};
pub use follow::{follow_path, FollowParams, FollowRun, FollowStatus, PathFollower};

use crate::geometry::Vec3;
use crate::sim::RobotState;
use crate::world::{RestingOn, SceneSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReachModel {
    pub max_reach: f64,
    pub pick_success_radius: f64,
    pub standoff_radius: f64,
    /// Distance kept from a navigation target that lands on furniture.
    pub preferred_standoff: f64,
}

impl Default for ReachModel {
    fn default() -> Self {
        Self {
            max_reach: 0.8,
            pick_success_radius: 0.15,
            standoff_radius: 0.6,
            preferred_standoff: 0.5,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlannerError {
    #[error("start {0:?} is not navigable")]
    StartBlocked([f64; 2]),
    #[error("goal {0:?} is outside the grid")]
    GoalOutsideGrid([f64; 2]),
    #[error("no navigable cell near {0:?} is connected to the start")]
    Unreachable([f64; 2]),
    #[error("no progress, gave up after {steps} steps")]
    Stuck { steps: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripperError {
    #[error("already holding {0}")]
    AlreadyHolding(String),
    #[error("nothing in range")]
    NothingInRange,
    #[error("not holding anything")]
    NotHolding,
    #[error("target {distance:.3} m from base is out of reach")]
    OutOfReach { distance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspOutcome {
    pub obj_id: String,
    /// Distance from the grasp point to the object center.
    pub distance: f64,
    pub base_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseOutcome {
    pub obj_id: String,
    pub position: [f64; 3],
    pub resting_on: RestingOn,
}

/// Closes the gripper at `target`. Succeeds on the object nearest to
/// `target` among those within `radius` of it and within reach of the base.
pub fn try_grasp(
    state: &RobotState,
    scene: &SceneSpec,
    target: Vec3,
    radius: f64,
    reach: &ReachModel,
) -> Result<GraspOutcome, GripperError> {
    if let Some(h) = &state.holding {
        return Err(GripperError::AlreadyHolding(h.clone()));
    }
    let base = Vec3::new(state.base.x, state.base.y, 0.0);
    let mut best: Option<GraspOutcome> = None;
    for obj in scene.objects.iter().filter(|o| o.resting_on != RestingOn::Held) {
        let c = obj.center();
        let distance = c.distance(target);
        let base_distance = c.horizontal_distance(base);
        if distance <= radius && base_distance <= reach.max_reach && best.as_ref().is_none_or(|b| distance < b.distance) {
            best = Some(GraspOutcome {
                obj_id: obj.obj_id.clone(),
                distance,
                base_distance,
            });
        }
    }
    best.ok_or(GripperError::NothingInRange)
}

/// Opens the gripper over `target`; the object drops onto the receptacle
/// top under it, or onto the floor.
pub fn try_release(
    state: &RobotState,
    scene: &SceneSpec,
    target: Vec3,
    reach: &ReachModel,
) -> Result<ReleaseOutcome, GripperError> {
    let held = state.holding.as_ref().ok_or(GripperError::NotHolding)?;
    let distance = state.base.distance_xy(target.x, target.y);
    if distance.is_nan() || distance > reach.max_reach {
        return Err(GripperError::OutOfReach { distance });
    }
    let under = scene.receptacles.iter().find(|r| r.contains_xy(target.x, target.y));
    let (z, resting_on) = match under {
        Some(r) => (r.height, RestingOn::Receptacle(r.rec_id.clone())),
        None => (scene.floor_height, RestingOn::Floor),
    };
    Ok(ReleaseOutcome {
        obj_id: held.clone(),
        position: [target.x, target.y, z],
        resting_on,
    })
}

/// Navigation goal for a world target: the target itself when it lies in a
/// free cell connected to the robot, otherwise the connected cell whose
/// distance to the target is closest to the preferred standoff.
pub fn approach_point(scene: &SceneSpec, from: [f64; 2], target: [f64; 2], reach: &ReachModel) -> Option<[f64; 2]> {
    let start = scene.cell_of(from[0], from[1]).filter(|c| scene.occupancy.is_free(*c))?;
    let reachable = scene.occupancy.flood_fill(start);
    if let Some(tc) = scene.cell_of(target[0], target[1]) {
        if reachable[scene.occupancy.index(tc)] {
            return Some(target);
        }
    }
    let mut best: Option<(f64, f64, usize)> = None;
    for (idx, &ok) in reachable.iter().enumerate() {
        if !ok {
            continue;
        }
        let c = scene.cell_center(scene.occupancy.cell_at(idx));
        let d = (c[0] - target[0]).hypot(c[1] - target[1]);
        let key = (d - reach.preferred_standoff).abs();
        let better = match best {
            None => true,
            Some((bk, bd, _)) => key < bk - 1e-12 || ((key - bk).abs() <= 1e-12 && d < bd),
        };
        if better {
            best = Some((key, d, idx));
        }
    }
    best.map(|(_, _, idx)| scene.cell_center(scene.occupancy.cell_at(idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::BasePose;
    use crate::world::Receptacle;

    fn table_scene() -> SceneSpec {
        let mut s = SceneSpec::empty("p", 40, 40, 0.1);
        s.add_receptacle(Receptacle::new("rec_0", "table", [2.0, 2.0], [0.6, 0.6], 0.7).unwrap());
        s.add_receptacle(Receptacle::new("rec_1", "shelf", [3.2, 2.0], [0.4, 0.4], 0.9).unwrap());
        s.add_object_on("obj_0", "mug", "rec_0", [1.9, 2.0], 0.05).unwrap();
        s
    }

    #[test]
    fn grasp_at_object_center() {
        let s = table_scene();
        let st = RobotState::at(BasePose::new(1.45, 2.0, 0.0));
        let g = try_grasp(&st, &s, Vec3::new(1.9, 2.0, 0.7), 0.15, &ReachModel::default()).unwrap();
        assert_eq!(g.obj_id, "obj_0");
        assert!(g.distance < 1e-12);
    }

    #[test]
    fn far_target_finds_nothing() {
        let s = table_scene();
        let st = RobotState::at(BasePose::new(1.45, 2.0, 0.0));
        let r = try_grasp(&st, &s, Vec3::new(1.9, 2.5, 0.7), 0.15, &ReachModel::default());
        assert_eq!(r, Err(GripperError::NothingInRange));
        let mut holding = st.clone();
        holding.holding = Some("obj_0".into());
        assert!(matches!(
            try_grasp(&holding, &s, Vec3::new(1.9, 2.0, 0.7), 0.15, &ReachModel::default()),
            Err(GripperError::AlreadyHolding(_))
        ));
    }

    #[test]
    fn release_snaps_to_top_or_floor() {
        let s = table_scene();
        let mut st = RobotState::at(BasePose::new(2.6, 2.0, 0.0));
        st.holding = Some("obj_0".into());
        let r = try_release(&st, &s, Vec3::new(3.2, 2.1, 1.3), &ReachModel::default()).unwrap();
        assert_eq!(r.resting_on, RestingOn::Receptacle("rec_1".into()));
        assert_eq!(r.position[2], 0.9);
        let r = try_release(&st, &s, Vec3::new(2.6, 2.5, 0.2), &ReachModel::default()).unwrap();
        assert_eq!((r.resting_on, r.position[2]), (RestingOn::Floor, 0.0));
        let far = try_release(&st, &s, Vec3::new(0.6, 2.0, 0.0), &ReachModel::default());
        assert!(matches!(far, Err(GripperError::OutOfReach { .. })));
        st.holding = None;
        assert_eq!(
            try_release(&st, &s, Vec3::new(3.2, 2.1, 1.0), &ReachModel::default()),
            Err(GripperError::NotHolding)
        );
    }

    #[test]
    fn approach_keeps_standoff_from_furniture() {
        let s = table_scene();
        let p = approach_point(&s, [0.5, 0.5], [2.0, 2.0], &ReachModel::default()).unwrap();
        assert!(s.is_navigable(p[0], p[1]));
        let d = (p[0] - 2.0).hypot(p[1] - 2.0);
        assert!((d - 0.5).abs() < 0.05, "{d}");
        let free = approach_point(&s, [0.5, 0.5], [1.0, 3.0], &ReachModel::default()).unwrap();
        assert_eq!(free, [1.0, 3.0]);
    }
}
