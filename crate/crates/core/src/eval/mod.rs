//! Single-step and episodic metrics, and report rendering.

mod episodic;
mod report;
mod single;

pub use episodic::{
    compute_goal_threshold, eval_episode, goal_threshold_from_diagonals, EpisodeFlags, EpisodicThresholds,
    ThresholdError, DIAGONAL_RANGE,
};
pub use report::{
    eval_single, render_table, render_timing, summarize_episodes, summarize_single, timing_report, EpisodicReport,
    MetricsReport, SingleStepReport, Stat, TimingReport,
};
pub use single::{parse_predictions, score_decision, score_grounding, score_retrieval, PredictionLine, SingleStepCase};

use crate::agent::{rebuild_pose_graph, render_state, AgentContext, GroundTruth};
use crate::datagen::QARecord;
use crate::policy::Policy;
use crate::world::SceneSpec;

/// Asks a policy for an answer on each stored record, re-rendering the
/// record's views from its logged state.
pub fn predict_records(policy: &dyn Policy, records: &[QARecord], scenes: &[SceneSpec]) -> Vec<PredictionLine> {
    records
        .iter()
        .filter_map(|r| {
            let scene = scenes.iter().find(|s| s.scene_id == r.scene_id)?;
            let frames = rebuild_pose_graph(scene, &r.frames);
            let (sc, ego) = render_state(scene, &r.objects, &r.robot);
            let ctx = AgentContext {
                instruction: &r.task_description,
                pose_frames: &frames,
                ego: &ego,
                history: &r.context_description,
                step: r.step,
            };
            let reach = crate::planner::ReachModel::default();
            let truth = GroundTruth {
                scene: &sc,
                task: &r.task,
                state: &r.robot,
                reach: &reach,
            };
            let raw_text = policy.decide(&ctx, &truth).unwrap_or_else(|e| format!("policy error: {e}"));
            Some(PredictionLine {
                record_id: r.record_id.clone(),
                raw_text,
            })
        })
        .collect()
}
