use super::{Policy, PolicyDescriptor, PolicyError};
use crate::agent::{target_from_bbox, AgentContext, Command, GroundTruth, HighLevelAction};
use crate::datagen::{Bindings, Phrasing, ReasoningSlot, SummarySlot, TEMPLATE_BANK};
use crate::geometry::Vec3;
use crate::sim::{BboxNorm, Observation, PoseGraph, Provenance};
use serde::{Deserialize, Serialize};

/// Half-width, in normalized units, of the box the oracle draws around a
/// navigation target.
const NAV_HALF: i64 = 20;
const PLACE_HALF: i64 = 10;
/// Margin kept inside the arm's reach when deciding to manipulate.
const REACH_MARGIN: f64 = 0.05;
const PLACE_INSET: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OraclePhase {
    LocateObject,
    ApproachObject,
    Pick,
    LocateGoal,
    ApproachGoal,
    Place,
}

impl OraclePhase {
    pub fn slots(self) -> (ReasoningSlot, SummarySlot) {
        match self {
            OraclePhase::LocateObject => (ReasoningSlot::SearchStart, SummarySlot::Start),
            OraclePhase::ApproachObject => (ReasoningSlot::ApproachObject, SummarySlot::Approach),
            OraclePhase::Pick => (ReasoningSlot::Pick, SummarySlot::Picked),
            OraclePhase::LocateGoal => (ReasoningSlot::SearchGoal, SummarySlot::ApproachGoal),
            OraclePhase::ApproachGoal => (ReasoningSlot::ApproachGoal, SummarySlot::ApproachGoal),
            OraclePhase::Place => (ReasoningSlot::Place, SummarySlot::Placed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleRuleState {
    pub phase: OraclePhase,
    pub command: Command,
}

/// Normalized box centered on pixel `(u, v)`, shrunk near the border so its
/// center stays on the pixel.
fn box_around(u: f64, v: f64, size: [u32; 2], half: i64) -> Option<BboxNorm> {
    if !(u >= 0.0 && v >= 0.0 && u <= size[0] as f64 && v <= size[1] as f64) {
        return None;
    }
    let nx = ((u * 1000.0 / size[0] as f64).floor() as i64).clamp(0, 1000);
    let ny = ((v * 1000.0 / size[1] as f64).floor() as i64).clamp(0, 1000);
    let hx = half.min(nx).min(1000 - nx);
    let hy = half.min(ny).min(1000 - ny);
    Some([(nx - hx) as u32, (ny - hy) as u32, (nx + hx) as u32, (ny + hy) as u32])
}

fn box_on_point(ego: &Observation, p: Vec3, half: i64) -> Option<BboxNorm> {
    let (u, v, _) = ego.camera.project_point(p)?;
    box_around(u, v, ego.camera.image_size, half)
}

fn frame_for(frames: &PoseGraph, p: Provenance, what: &str) -> Result<Command, PolicyError> {
    frames
        .index_of(p)
        .map(Command::SearchSceneFrame)
        .ok_or_else(|| PolicyError::OracleStuck(format!("no scene frame shows the {what}")))
}

/// The oracle's rule cascade, evaluated from ground truth.
pub fn oracle_rule(ego: &Observation, frames: &PoseGraph, truth: &GroundTruth) -> Result<OracleRuleState, PolicyError> {
    let scene = truth.scene;
    let task = truth.task;
    let reach = truth.reach;
    let base = truth.state.base;
    let stuck = |m: &str| PolicyError::OracleStuck(m.to_string());
    let state = |phase, command| Ok(OracleRuleState { phase, command });

    if truth.state.holding.is_none() {
        let obj = scene.object(&task.object).ok_or_else(|| stuck("task object missing"))?;
        let c = obj.center();
        let Some(e) = ego.entity(&task.object) else {
            return state(OraclePhase::LocateObject, frame_for(frames, Provenance::AtStartRec, "object")?);
        };
        let in_reach = base.distance_xy(c.x, c.y) <= reach.max_reach - REACH_MARGIN;
        if in_reach {
            if let Ok(t) = target_from_bbox(ego, &e.bbox_norm) {
                if t.distance(c) <= reach.pick_success_radius {
                    return state(OraclePhase::Pick, Command::Pick(e.bbox_norm));
                }
            }
        }
        let candidates = [box_on_point(ego, c, NAV_HALF), Some(e.bbox_norm)];
        for b in candidates.into_iter().flatten() {
            if let Ok(t) = target_from_bbox(ego, &b) {
                if t.horizontal_distance(c) <= 0.3 {
                    return state(OraclePhase::ApproachObject, Command::NavToPoint(b));
                }
            }
        }
        return state(OraclePhase::LocateObject, frame_for(frames, Provenance::AtStartRec, "object")?);
    }

    let goal = scene.receptacle(&task.goal_rec).ok_or_else(|| stuck("goal receptacle missing"))?;
    let h = goal.height;
    let on_top = |t: Vec3, inset: f64| {
        (t.z - h).abs() < 0.01
            && (t.x - goal.center[0]).abs() <= (goal.footprint[0] / 2.0 - inset).max(0.0)
            && (t.y - goal.center[1]).abs() <= (goal.footprint[1] / 2.0 - inset).max(0.0)
    };

    let b = [base.x, base.y];
    let d = (goal.center[0] - b[0]).hypot(goal.center[1] - b[1]);
    let mut aims = Vec::new();
    if d > 1e-9 {
        let dir = [(goal.center[0] - b[0]) / d, (goal.center[1] - b[1]) / d];
        let s = d.min(reach.max_reach - 2.0 * REACH_MARGIN);
        let p = [b[0] + dir[0] * s, b[1] + dir[1] * s];
        for off in [0.0, 0.15, -0.15] {
            aims.push([p[0] - dir[1] * off, p[1] + dir[0] * off]);
        }
    }
    aims.push(goal.center);
    for p in aims {
        let p3 = Vec3::new(p[0], p[1], h);
        if !on_top(p3, PLACE_INSET) {
            continue;
        }
        let Some(bx) = box_on_point(ego, p3, PLACE_HALF) else {
            continue;
        };
        if let Ok(t) = target_from_bbox(ego, &bx) {
            if on_top(t, REACH_MARGIN) && base.distance_xy(t.x, t.y) <= reach.max_reach - 0.02 {
                return state(OraclePhase::Place, Command::Place(bx));
            }
        }
    }

    if let Some(bx) = box_on_point(ego, goal.top_center(), NAV_HALF) {
        if target_from_bbox(ego, &bx).is_ok_and(|t| on_top(t, 0.0)) {
            return state(OraclePhase::ApproachGoal, Command::NavToPoint(bx));
        }
    }
    if let Some(e) = ego.entity(&task.goal_rec) {
        if target_from_bbox(ego, &e.bbox_norm).is_ok_and(|t| goal.footprint_distance(t.x, t.y) <= 0.05) {
            return state(OraclePhase::ApproachGoal, Command::NavToPoint(e.bbox_norm));
        }
    }
    state(OraclePhase::LocateGoal, frame_for(frames, Provenance::AtGoalRec, "goal receptacle")?)
}

/// Ground-truth rule policy; its text comes from the shared template bank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OraclePolicy {
    pub phrasing: Phrasing,
}

impl OraclePolicy {
    pub fn new(phrasing: Phrasing) -> Self {
        Self { phrasing }
    }

    pub fn action(&self, ctx: &AgentContext, truth: &GroundTruth) -> Result<HighLevelAction, PolicyError> {
        let rule = oracle_rule(ctx.ego, ctx.pose_frames, truth)?;
        let scene = truth.scene;
        let task = truth.task;
        let label = |id: &str| -> String {
            scene
                .receptacle(id)
                .map(|r| r.label.clone())
                .or_else(|| scene.object(id).map(|o| o.label.clone()))
                .unwrap_or_else(|| id.to_string())
        };
        let mut b = Bindings::new()
            .set("object", label(&task.object))
            .set("start", label(&task.start_rec))
            .set("goal", label(&task.goal_rec));
        if let Some(k) = rule.command.frame_index() {
            b = b.set("frame", k);
        }
        let (rs, ss) = rule.phase.slots();
        let bank = &*TEMPLATE_BANK;
        let key = task.task_id.as_str();
        let text_err = |e: crate::datagen::TemplateError| PolicyError::OracleStuck(e.to_string());
        let reasoning = bank.reasoning(rs, self.phrasing, key, &b).map_err(text_err)?;
        let summary = bank.summarization(ss, self.phrasing, key, &b).map_err(text_err)?;
        Ok(HighLevelAction::new(rule.command, reasoning, summary))
    }
}

impl Policy for OraclePolicy {
    fn decide(&self, ctx: &AgentContext, truth: &GroundTruth) -> Result<String, PolicyError> {
        self.action(ctx, truth).map(|a| a.to_json())
    }

    fn descriptor(&self) -> PolicyDescriptor {
        PolicyDescriptor::new("oracle", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_keeps_center_near_border() {
        let b = box_around(2.0, 256.0, [512, 512], 20).unwrap();
        assert_eq!(b, [0, 480, 6, 520]);
        assert_eq!((b[0] + b[2]) / 2, 3);
        assert!(box_around(-1.0, 10.0, [512, 512], 5).is_none());
        assert_eq!(box_around(512.0, 512.0, [512, 512], 5).unwrap(), [1000, 1000, 1000, 1000]);
    }
}
