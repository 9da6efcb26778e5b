use crate::canonical;
use crate::planner::ReachModel;
use crate::sim::{Observation, PoseGraph, RobotState};
use crate::world::{SceneSpec, TaskInstance};
use serde_json::json;
use sha2::{Digest, Sha256};

pub const INITIAL_HISTORY: &str = "Task just started.";

/// Everything the decision maker is allowed to see at one step.
#[derive(Debug, Clone, Copy)]
pub struct AgentContext<'a> {
    pub instruction: &'a str,
    pub pose_frames: &'a PoseGraph,
    pub ego: &'a Observation,
    pub history: &'a str,
    pub step: usize,
}

impl AgentContext<'_> {
    /// SHA-256 over the canonical form of the visible inputs.
    pub fn digest(&self) -> String {
        let frames: Vec<_> = self
            .pose_frames
            .frames
            .iter()
            .map(|f| json!({"index": f.index, "entities": f.observation.entities}))
            .collect();
        let v = json!({
            "instruction": self.instruction,
            "history": self.history,
            "step": self.step,
            "pose_frames": frames,
            "ego": self.ego,
        });
        hex::encode(Sha256::digest(canonical::value_to_string(&v).as_bytes()))
    }
}

/// Simulator-side truth available to scripted policies only.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruth<'a> {
    pub scene: &'a SceneSpec,
    pub task: &'a TaskInstance,
    pub state: &'a RobotState,
    pub reach: &'a ReachModel,
}
