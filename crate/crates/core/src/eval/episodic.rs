use crate::agent::{ActionKind, EpisodeTrace, EvalMode, Terminal};
use crate::sim::Provenance;
use crate::world::Receptacle;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodicThresholds {
    pub goal_strict: f64,
    pub goal_lenient: f64,
    pub pick_strict: f64,
    pub pick_lenient: f64,
    pub close_strict: f64,
    pub close_lenient: f64,
}

impl Default for EpisodicThresholds {
    fn default() -> Self {
        Self {
            goal_strict: 0.85,
            goal_lenient: 1.7,
            pick_strict: 0.15,
            pick_lenient: 0.8,
            close_strict: 1.5,
            close_lenient: 2.0,
        }
    }
}

impl EpisodicThresholds {
    /// `(goal, pick, close)` for a mode.
    pub fn for_mode(&self, mode: EvalMode) -> (f64, f64, f64) {
        match mode {
            EvalMode::Strict => (self.goal_strict, self.pick_strict, self.close_strict),
            EvalMode::Lenient => (self.goal_lenient, self.pick_lenient, self.close_lenient),
        }
    }

    pub fn is_ordered(&self) -> bool {
        self.goal_strict <= self.goal_lenient
            && self.pick_strict <= self.pick_lenient
            && self.close_strict <= self.close_lenient
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeFlags {
    pub episode_id: String,
    pub full_task: bool,
    pub object_picked: bool,
    pub robot_close_object: bool,
    pub robot_close_goal: bool,
    /// `None` when the phase had no retrieval action.
    pub retrieval_object: Option<bool>,
    pub retrieval_goal: Option<bool>,
    pub dead_loop: bool,
    pub steps: usize,
}

/// Per-episode success flags under one threshold mode.
pub fn eval_episode(trace: &EpisodeTrace, th: &EpisodicThresholds, mode: EvalMode) -> EpisodeFlags {
    let (goal_th, pick_th, close_th) = th.for_mode(mode);
    let frame_prov = |k: usize| trace.header.frames.iter().find(|f| f.index == k).map(|f| f.provenance);

    let mut pick_step = None;
    let mut place_ok = false;
    let mut picked = false;
    for s in &trace.steps {
        let (Some(a), Some(o)) = (&s.action, &s.outcome) else { continue };
        if a.kind() == ActionKind::Pick && o.success {
            pick_step.get_or_insert(s.step);
            if o.grasped.as_deref() == Some(trace.header.task.object.as_str())
                && o.grasp_distance.is_some_and(|d| d <= pick_th)
            {
                picked = true;
            }
        }
        if a.kind() == ActionKind::Place && o.success && s.held_before.as_deref() == Some(&trace.header.task.object) {
            place_ok = true;
        }
    }

    let before_pick = |step: usize| pick_step.is_none_or(|p| step <= p);
    let close_object = trace
        .steps
        .iter()
        .filter(|s| before_pick(s.step))
        .any(|s| s.distances_before.to_object <= close_th);
    let close_goal = match pick_step {
        None => false,
        Some(p) => trace
            .steps
            .iter()
            .filter(|s| s.step > p)
            .any(|s| s.distances_before.to_goal_rec.min(s.distances.to_goal_rec) <= close_th),
    };

    let first_search = |holding: bool| {
        trace
            .steps
            .iter()
            .filter(|s| s.held_before.is_some() == holding)
            .find_map(|s| s.action.as_ref().and_then(|a| a.command.frame_index()))
    };
    let retrieval_object = first_search(false).map(|k| frame_prov(k) == Some(Provenance::AtStartRec));
    let retrieval_goal = first_search(true).map(|k| frame_prov(k) == Some(Provenance::AtGoalRec));

    EpisodeFlags {
        episode_id: trace.header.episode_id.clone(),
        full_task: place_ok && trace.terminal.object_to_goal <= goal_th,
        object_picked: picked,
        robot_close_object: close_object,
        robot_close_goal: close_goal,
        retrieval_object,
        retrieval_goal,
        dead_loop: trace.terminal.terminal == Terminal::DeadLoop,
        steps: trace.steps.len(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("no receptacle diagonal within [0.75, 3.0] m")]
    EmptyAfterFilter,
}

pub const DIAGONAL_RANGE: (f64, f64) = (0.75, 3.0);

/// Mean receptacle diagonal after dropping outliers, and half of it, as
/// `(lenient, strict)` goal thresholds.
pub fn goal_threshold_from_diagonals(diagonals: &[f64]) -> Result<(f64, f64), ThresholdError> {
    let kept: Vec<f64> = diagonals
        .iter()
        .copied()
        .filter(|d| (DIAGONAL_RANGE.0..=DIAGONAL_RANGE.1).contains(d))
        .collect();
    if kept.is_empty() {
        return Err(ThresholdError::EmptyAfterFilter);
    }
    // Running mean: a constant set returns its value exactly.
    let mut mean = 0.0;
    for (k, d) in kept.iter().enumerate() {
        mean += (d - mean) / (k + 1) as f64;
    }
    Ok((mean, mean / 2.0))
}

pub fn compute_goal_threshold<'a>(
    receptacles: impl IntoIterator<Item = &'a Receptacle>,
) -> Result<(f64, f64), ThresholdError> {
    let d: Vec<f64> = receptacles.into_iter().map(|r| r.diagonal()).collect();
    goal_threshold_from_diagonals(&d)
}
