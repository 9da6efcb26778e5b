use super::{observe, BasePose, Observation, RobotState, SimError};
use crate::world::{SceneSpec, TaskInstance};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AtStartRec,
    AtGoalRec,
    Random,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoseFrame {
    pub index: usize,
    pub provenance: Provenance,
    pub pose: BasePose,
    pub observation: Observation,
}

/// Pre-mapped posed frames. Only vertices are kept.
#[derive(Debug, Clone, Serialize)]
pub struct PoseGraph {
    pub frames: Vec<PoseFrame>,
}

impl PoseGraph {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Lowest frame index with the given provenance.
    pub fn index_of(&self, p: Provenance) -> Option<usize> {
        self.frames.iter().find(|f| f.provenance == p).map(|f| f.index)
    }

    pub fn provenance(&self, index: usize) -> Option<Provenance> {
        self.frames.get(index).map(|f| f.provenance)
    }
}

/// Distance band around a footprint where viewpoints are sampled.
const VIEW_BAND: (f64, f64) = (0.3, 0.6);
const VIEW_TRIES: usize = 200;

fn view_pose(
    scene: &SceneSpec,
    main_cells: &[[f64; 2]],
    rec_id: &str,
    also_visible: Option<&str>,
    rng: &mut ChaCha8Rng,
) -> Result<(BasePose, Observation), SimError> {
    let rec = scene
        .receptacle(rec_id)
        .ok_or_else(|| SimError::NoViewpoint(rec_id.to_string()))?;
    let mut candidates: Vec<[f64; 2]> = main_cells
        .iter()
        .copied()
        .filter(|c| (VIEW_BAND.0..=VIEW_BAND.1).contains(&rec.footprint_distance(c[0], c[1])))
        .collect();
    candidates.shuffle(rng);
    for c in candidates.into_iter().take(VIEW_TRIES) {
        let yaw = (rec.center[1] - c[1]).atan2(rec.center[0] - c[0]);
        let pose = BasePose::new(c[0], c[1], yaw);
        let obs = observe(&RobotState::at(pose), scene);
        if obs.is_visible(rec_id) && also_visible.is_none_or(|id| obs.is_visible(id)) {
            return Ok((pose, obs));
        }
    }
    Err(SimError::NoViewpoint(rec_id.to_string()))
}

/// Centers of the cells in the largest navigable component.
pub fn main_cell_centers(scene: &SceneSpec) -> Vec<[f64; 2]> {
    scene
        .navigable_component()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(idx, _)| scene.cell_center(scene.occupancy.cell_at(idx)))
        .collect()
}

/// One frame viewing the start receptacle and the object on it, one viewing the goal receptacle,
/// `n_random` frames from random navigable poses, in seeded shuffled order.
pub fn render_pose_graph(
    scene: &SceneSpec,
    task: &TaskInstance,
    seed: u64,
    n_random: usize,
) -> Result<PoseGraph, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let main_cells = main_cell_centers(scene);
    let mut frames = Vec::with_capacity(n_random + 2);
    for (rec, extra, prov) in [
        (&task.start_rec, Some(task.object.as_str()), Provenance::AtStartRec),
        (&task.goal_rec, None, Provenance::AtGoalRec),
    ] {
        let (pose, observation) = view_pose(scene, &main_cells, rec, extra, &mut rng)?;
        frames.push(PoseFrame {
            index: 0,
            provenance: prov,
            pose,
            observation,
        });
    }
    if n_random > 0 && main_cells.is_empty() {
        return Err(SimError::NoViewpoint("random pose".into()));
    }
    for _ in 0..n_random {
        let c = main_cells[rng.random_range(0..main_cells.len())];
        let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let pose = BasePose::new(c[0], c[1], yaw);
        frames.push(PoseFrame {
            index: 0,
            provenance: Provenance::Random,
            pose,
            observation: observe(&RobotState::at(pose), scene),
        });
    }
    frames.shuffle(&mut rng);
    for (i, f) in frames.iter_mut().enumerate() {
        f.index = i;
    }
    Ok(PoseGraph { frames })
}
