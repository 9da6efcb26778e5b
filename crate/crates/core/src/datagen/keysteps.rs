use crate::agent::{
    rebuild_pose_graph, render_state, ActionKind, Command, EpisodeTrace, FrameRef, GroundTruth, ObjectState,
};
use crate::planner::ReachModel;
use crate::policy::{oracle_rule, OraclePhase};
use crate::sim::{Observation, PoseGraph, RobotState};
use crate::world::{SceneSpec, TaskInstance};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyRole {
    NavStart,
    NavWaypoint,
    NavEnd,
    PickFrame,
    PlaceFrame,
    SearchFrame,
}

impl KeyRole {
    pub fn kind(self) -> ActionKind {
        match self {
            KeyRole::NavStart | KeyRole::NavWaypoint | KeyRole::NavEnd => ActionKind::NavToPoint,
            KeyRole::PickFrame => ActionKind::Pick,
            KeyRole::PlaceFrame => ActionKind::Place,
            KeyRole::SearchFrame => ActionKind::SearchSceneFrame,
        }
    }
}

/// One checkpoint chosen for supervision, with enough logged state to
/// re-render its view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyStep {
    pub episode_id: String,
    pub scene_id: String,
    pub task: TaskInstance,
    pub step: usize,
    pub checkpoint: usize,
    pub sim_step: usize,
    pub role: KeyRole,
    pub phase: OraclePhase,
    /// Ground-truth answer at this checkpoint.
    pub answer: Command,
    pub robot: RobotState,
    pub objects: Vec<ObjectState>,
    /// History the policy had at this step.
    pub history: String,
    /// Next point the robot is heading to (navigation only).
    pub next_waypoint: Option<[f64; 3]>,
    pub reach: ReachModel,
    pub frames: Vec<FrameRef>,
}

impl KeyStep {
    /// Scene with logged object states, and the view at this checkpoint.
    pub fn render(&self, scene: &SceneSpec) -> (SceneSpec, Observation) {
        render_state(scene, &self.objects, &self.robot)
    }

    /// Receptacle the robot is working towards in this phase.
    pub fn target_receptacle(&self) -> &str {
        if self.robot.holding.is_some() {
            &self.task.goal_rec
        } else {
            &self.task.start_rec
        }
    }
}

/// Checkpoint indices of a navigation segment: the first one from which the
/// target receptacle is visible, every `interval` after it, and the last.
pub fn nav_key_indices(visible: &[bool], interval: usize) -> Vec<(usize, KeyRole)> {
    let Some(start) = visible.iter().position(|v| *v) else {
        return Vec::new();
    };
    let end = visible.len() - 1;
    let interval = interval.max(1);
    let mut out = vec![(start, if start == end { KeyRole::NavEnd } else { KeyRole::NavStart })];
    let mut i = start + interval;
    while i < end {
        out.push((i, KeyRole::NavWaypoint));
        i += interval;
    }
    if start != end {
        out.push((end, KeyRole::NavEnd));
    }
    out
}

/// Path points closer than this to the robot are under or behind the
/// camera's view and are skipped when looking for the next waypoint.
pub const WAYPOINT_LOOKAHEAD: f64 = 0.6;

/// First path point at least [`WAYPOINT_LOOKAHEAD`] ahead of the path
/// point nearest to `at`, else the path's end, on the floor.
pub fn next_waypoint(path: &[[f64; 2]], at: [f64; 2]) -> Option<[f64; 3]> {
    let d = |p: &[f64; 2]| (p[0] - at[0]).hypot(p[1] - at[1]);
    let nearest = (0..path.len()).min_by(|&a, &b| d(&path[a]).total_cmp(&d(&path[b])))?;
    let p = path[nearest..]
        .iter()
        .find(|p| d(p) >= WAYPOINT_LOOKAHEAD)
        .unwrap_or(path.last()?);
    Some([p[0], p[1], 0.0])
}

/// Candidate key steps of one oracle trace. Each candidate is labelled with
/// the oracle's decision at that checkpoint; candidates whose decision does
/// not match the role's action kind are not emitted.
pub fn select_key_steps(trace: &EpisodeTrace, scene: &SceneSpec, waypoint_interval: usize) -> Vec<KeyStep> {
    let frames: PoseGraph = rebuild_pose_graph(scene, &trace.header.frames);
    let task = &trace.header.task;
    let reach = trace.header.config.exec.reach;
    let mut objects_before = trace.header.initial_objects.clone();
    let mut out = Vec::new();
    for s in &trace.steps {
        let (Some(action), Some(outcome)) = (&s.action, &s.outcome) else {
            objects_before = s.objects_after.clone();
            continue;
        };
        let cps = &outcome.checkpoints;
        let robot_at = |i: usize| {
            let mut r = trace.header.initial_state.clone();
            r.base = cps[i].pose;
            r.holding = cps[i].holding.clone();
            r
        };
        let candidates: Vec<(usize, KeyRole)> = match action.kind() {
            ActionKind::SearchSceneFrame => cps.first().map(|_| (0, KeyRole::SearchFrame)).into_iter().collect(),
            ActionKind::Pick => (0..cps.len().min(3)).map(|i| (i, KeyRole::PickFrame)).collect(),
            ActionKind::Place => (0..cps.len().min(3)).map(|i| (i, KeyRole::PlaceFrame)).collect(),
            ActionKind::NavToPoint => {
                let target = if s.held_before.is_some() { &task.goal_rec } else { &task.start_rec };
                let visible: Vec<bool> = (0..cps.len())
                    .map(|i| render_state(scene, &objects_before, &robot_at(i)).1.is_visible(target))
                    .collect();
                nav_key_indices(&visible, waypoint_interval)
            }
        };
        for &(ci, role) in &candidates {
            let robot = robot_at(ci);
            let (sc, ego) = render_state(scene, &objects_before, &robot);
            let truth = GroundTruth {
                scene: &sc,
                task,
                state: &robot,
                reach: &reach,
            };
            let Ok(rule) = oracle_rule(&ego, &frames, &truth) else {
                continue;
            };
            if rule.command.kind() != role.kind() {
                continue;
            }
            let next_waypoint = (role.kind() == ActionKind::NavToPoint)
                .then(|| next_waypoint(&outcome.path, robot.base.xy()))
                .flatten();
            out.push(KeyStep {
                episode_id: trace.header.episode_id.clone(),
                scene_id: trace.header.scene_id.clone(),
                task: task.clone(),
                step: s.step,
                checkpoint: ci,
                sim_step: cps[ci].sim_step,
                role,
                phase: rule.phase,
                answer: rule.command,
                robot,
                objects: objects_before.clone(),
                history: s.history.clone(),
                next_waypoint,
                reach,
                frames: trace.header.frames.clone(),
            });
        }
        objects_before = s.objects_after.clone();
    }
    out
}

fn in_image(ego: &Observation, p: [f64; 3]) -> bool {
    let cam = &ego.camera;
    cam.project_point(crate::geometry::Vec3::from_array(p))
        .is_some_and(|(u, v, _)| u >= 0.0 && v >= 0.0 && u <= cam.width() && v <= cam.height())
}

/// Why a key step was dropped, if it was.
pub fn filter_reason(step: &KeyStep, scene: &SceneSpec, reach: &ReachModel) -> Option<&'static str> {
    let (sc, ego) = step.render(scene);
    let base = step.robot.base;
    match step.role.kind() {
        ActionKind::NavToPoint => {
            if !ego.is_visible(step.target_receptacle()) {
                return Some("target receptacle not visible");
            }
            if !step.next_waypoint.is_some_and(|w| in_image(&ego, w)) {
                return Some("next waypoint outside the frame");
            }
            None
        }
        ActionKind::Pick => {
            let obj = sc.object(&step.task.object)?;
            if base.distance_xy(obj.position[0], obj.position[1]) > reach.max_reach {
                return Some("object beyond reach");
            }
            if !ego.is_visible(&step.task.object) {
                return Some("object not visible");
            }
            None
        }
        ActionKind::Place => {
            let goal = sc.receptacle(&step.task.goal_rec)?;
            if goal.footprint_distance(base.x, base.y) > reach.max_reach {
                return Some("goal receptacle beyond reach");
            }
            if !ego.is_visible(&step.task.goal_rec) {
                return Some("goal receptacle not visible");
            }
            None
        }
        ActionKind::SearchSceneFrame => None,
    }
}

/// Keeps navigation steps whose target receptacle and next waypoint are in
/// view, and pick/place steps whose target is visible and within reach.
pub fn filter_key_steps(steps: Vec<KeyStep>, scene: &SceneSpec, reach: &ReachModel) -> Vec<KeyStep> {
    steps
        .into_iter()
        .filter(|s| filter_reason(s, scene, reach).is_none())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nav_indices_follow_interval() {
        let mut vis = vec![false; 12];
        for v in vis.iter_mut().skip(2) {
            *v = true;
        }
        let got: Vec<usize> = nav_key_indices(&vis, 5).into_iter().map(|(i, _)| i).collect();
        assert_eq!(got, vec![2, 7, 11]);
        assert!(nav_key_indices(&[false; 5], 1).is_empty());
        let roles: Vec<KeyRole> = nav_key_indices(&vis, 5).into_iter().map(|(_, r)| r).collect();
        assert_eq!(roles, vec![KeyRole::NavStart, KeyRole::NavWaypoint, KeyRole::NavEnd]);
    }

    #[test]
    fn waypoint_lookahead() {
        let path: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 * 0.1, 0.0]).collect();
        assert_eq!(next_waypoint(&path, [0.0, 0.0]), Some([0.6000000000000001, 0.0, 0.0]));
        assert_eq!(next_waypoint(&path, [0.52, 0.0]), Some([0.9, 0.0, 0.0]));
        assert_eq!(next_waypoint(&[], [0.0, 0.0]), None);
    }

    #[test]
    fn last_checkpoint_only() {
        assert_eq!(nav_key_indices(&[false, false, true], 3), vec![(2, KeyRole::NavEnd)]);
        let every: Vec<usize> = nav_key_indices(&[true; 4], 1).into_iter().map(|(i, _)| i).collect();
        assert_eq!(every, vec![0, 1, 2, 3]);
    }
}
