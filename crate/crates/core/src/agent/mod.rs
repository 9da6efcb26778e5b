//! High-level action loop: context, parsing, execution and episodes.

mod action;
mod context;
mod episode;
mod execute;

pub use action::{parse_action, ActionKind, Command, HighLevelAction, ParseError, ACTION_SCHEMA_DOC};
pub use context::{AgentContext, GroundTruth, INITIAL_HISTORY};
pub use episode::{
    detect_dead_loop, distances, frame_refs, initial_pose, object_states, rebuild_pose_graph, render_state,
    restore_objects, run_episode,
    DeadLoopConfig, Distances, EpisodeConfig, EpisodeHeader, EpisodeTrace, EvalMode, FailureReason, FrameRef,
    ObjectState, StepRecord, Terminal, TerminalRecord, TraceError,
};
pub use execute::{execute, target_from_bbox, Checkpoint, ExecConfig, ExecFailure, ExecutionOutcome};

use crate::policy::{Policy, PolicyError};

/// Parsed action and the history it hands to the next step.
pub type ParsedDecision = Result<(HighLevelAction, String), ParseError>;

/// Asks the policy for an action. The parsed action's summarization is the
/// next history. Parse failures are returned alongside the raw text.
pub fn decide(
    policy: &dyn Policy,
    ctx: &AgentContext,
    truth: &GroundTruth,
) -> Result<(String, ParsedDecision), PolicyError> {
    let raw = policy.decide(ctx, truth)?;
    let parsed = parse_action(&raw)
        .and_then(|a| a.validate(ctx.pose_frames.len()).map(|_| a))
        .map(|a| {
            let h = a.summarization.clone();
            (a, h)
        });
    Ok((raw, parsed))
}
