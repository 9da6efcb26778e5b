use super::{RestingOn, SceneSpec, WorldError};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_STRICT_GOAL: f64 = 0.85;
pub const DEFAULT_LENIENT_GOAL: f64 = 1.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub task_id: String,
    pub instruction: String,
    pub object: String,
    pub start_rec: String,
    pub goal_rec: String,
    pub strict_goal_threshold: f64,
    pub lenient_goal_threshold: f64,
}

impl TaskInstance {
    pub fn with_thresholds(mut self, strict: f64, lenient: f64) -> Self {
        self.strict_goal_threshold = strict;
        self.lenient_goal_threshold = lenient;
        self
    }

    pub fn goal_threshold(&self, lenient: bool) -> f64 {
        if lenient {
            self.lenient_goal_threshold
        } else {
            self.strict_goal_threshold
        }
    }
}

pub fn render_instruction(object: &str, start: &str, goal: &str) -> String {
    format!("Move {object} from the {start} to the {goal}.")
}

/// Picks an object and a different goal receptacle uniformly under `seed`.
pub fn spawn_task(scene: &SceneSpec, seed: u64) -> Result<TaskInstance, WorldError> {
    if scene.receptacles.len() < 2 {
        return Err(WorldError::NoValidPair(format!(
            "{} has {} receptacle(s)",
            scene.scene_id,
            scene.receptacles.len()
        )));
    }
    let candidates: Vec<_> = scene
        .objects
        .iter()
        .filter_map(|o| match &o.resting_on {
            RestingOn::Receptacle(id) => scene.receptacle(id).map(|r| (o, r)),
            _ => None,
        })
        .collect();
    if candidates.is_empty() {
        return Err(WorldError::NoValidPair(format!(
            "{} has no object resting on a receptacle",
            scene.scene_id
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (obj, start) = candidates[rng.random_range(0..candidates.len())];
    let goals: Vec<_> = scene.receptacles.iter().filter(|r| r.rec_id != start.rec_id).collect();
    let goal = goals[rng.random_range(0..goals.len())];
    Ok(TaskInstance {
        task_id: format!("{}-task-{seed}", scene.scene_id),
        instruction: render_instruction(&obj.label, &start.label, &goal.label),
        object: obj.obj_id.clone(),
        start_rec: start.rec_id.clone(),
        goal_rec: goal.rec_id.clone(),
        strict_goal_threshold: DEFAULT_STRICT_GOAL,
        lenient_goal_threshold: DEFAULT_LENIENT_GOAL,
    })
}
