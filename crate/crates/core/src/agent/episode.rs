use super::action::{parse_action, Command, HighLevelAction, ParseError};
use super::context::{AgentContext, GroundTruth, INITIAL_HISTORY};
use super::execute::{execute, ExecConfig, ExecutionOutcome};
use crate::canonical;
use crate::policy::{Policy, PolicyDescriptor};
use crate::sim::{observe, BasePose, PoseGraph, Provenance, RobotState};
use crate::world::{RestingOn, SceneSpec, TaskInstance};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    #[default]
    Strict,
    Lenient,
}

impl EvalMode {
    pub fn is_lenient(self) -> bool {
        self == EvalMode::Lenient
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeadLoopConfig {
    pub window: usize,
    pub repeats: usize,
    /// Total base motion below which repeated actions count as stagnation.
    pub min_displacement: f64,
}

impl Default for DeadLoopConfig {
    fn default() -> Self {
        Self {
            window: 6,
            repeats: 3,
            min_displacement: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    pub invalid_budget: usize,
    pub dead_loop: DeadLoopConfig,
    pub mode: EvalMode,
    pub exec: ExecConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: 20,
            invalid_budget: 3,
            dead_loop: DeadLoopConfig::default(),
            mode: EvalMode::Strict,
            exec: ExecConfig::default(),
        }
    }
}

impl EpisodeConfig {
    /// Execution settings with the grasp radius of the configured mode.
    pub fn exec_for_mode(&self) -> ExecConfig {
        let mut e = self.exec;
        e.grasp_radius = match self.mode {
            EvalMode::Strict => e.reach.pick_success_radius,
            EvalMode::Lenient => e.reach.max_reach,
        };
        e
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    InvalidActionBudget,
    PolicyFailure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "snake_case")]
pub enum Terminal {
    Success,
    Failure(FailureReason),
    Timeout,
    DeadLoop,
}

impl Terminal {
    pub fn label(&self) -> &'static str {
        match self {
            Terminal::Success => "success",
            Terminal::Failure(FailureReason::InvalidActionBudget) => "failure_invalid_action_budget",
            Terminal::Failure(FailureReason::PolicyFailure(_)) => "failure_policy",
            Terminal::Timeout => "timeout",
            Terminal::DeadLoop => "dead_loop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub obj_id: String,
    pub position: [f64; 3],
    pub resting_on: RestingOn,
}

pub fn object_states(scene: &SceneSpec) -> Vec<ObjectState> {
    scene
        .objects
        .iter()
        .map(|o| ObjectState {
            obj_id: o.obj_id.clone(),
            position: o.position,
            resting_on: o.resting_on.clone(),
        })
        .collect()
}

/// Writes logged object states back into a scene.
pub fn restore_objects(scene: &mut SceneSpec, states: &[ObjectState]) {
    for s in states {
        if let Some(o) = scene.object_mut(&s.obj_id) {
            o.position = s.position;
            o.resting_on = s.resting_on.clone();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    /// Horizontal base distance to the start receptacle center.
    pub to_start_rec: f64,
    pub to_goal_rec: f64,
    /// Horizontal base distance to the task object.
    pub to_object: f64,
    /// Object center to goal receptacle box center.
    pub object_to_goal: f64,
}

pub fn distances(scene: &SceneSpec, task: &TaskInstance, base: &BasePose) -> Distances {
    let start = scene.receptacle(&task.start_rec).expect("task start receptacle");
    let goal = scene.receptacle(&task.goal_rec).expect("task goal receptacle");
    let obj = scene.object(&task.object).expect("task object");
    Distances {
        to_start_rec: base.distance_xy(start.center[0], start.center[1]),
        to_goal_rec: base.distance_xy(goal.center[0], goal.center[1]),
        to_object: base.distance_xy(obj.position[0], obj.position[1]),
        object_to_goal: obj.center().distance(goal.center3()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub context_digest: String,
    pub history: String,
    pub raw_text: Option<String>,
    pub action: Option<HighLevelAction>,
    pub parse_error: Option<ParseError>,
    pub policy_error: Option<String>,
    pub outcome: Option<ExecutionOutcome>,
    pub pose_before: BasePose,
    pub pose_after: BasePose,
    pub held_before: Option<String>,
    pub held_after: Option<String>,
    pub distances_before: Distances,
    /// Distances after the step.
    pub distances: Distances,
    pub objects_after: Vec<ObjectState>,
}

impl StepRecord {
    pub fn is_valid(&self) -> bool {
        self.action.is_some()
    }

    /// History handed to the next step.
    pub fn history_out(&self) -> &str {
        self.action.as_ref().map_or(&self.history, |a| &a.summarization)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRef {
    pub index: usize,
    pub provenance: Provenance,
    pub pose: BasePose,
}

pub fn frame_refs(g: &PoseGraph) -> Vec<FrameRef> {
    g.frames
        .iter()
        .map(|f| FrameRef {
            index: f.index,
            provenance: f.provenance,
            pose: f.pose,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeHeader {
    pub episode_id: String,
    pub scene_id: String,
    pub seed: u64,
    pub task: TaskInstance,
    pub policy: PolicyDescriptor,
    pub config: EpisodeConfig,
    pub frames: Vec<FrameRef>,
    pub initial_state: RobotState,
    pub initial_objects: Vec<ObjectState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalRecord {
    pub terminal: Terminal,
    pub steps: usize,
    pub final_objects: Vec<ObjectState>,
    pub object_to_goal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub header: EpisodeHeader,
    pub steps: Vec<StepRecord>,
    pub terminal: TerminalRecord,
    /// Wall-clock seconds per decision; never serialized into the trace.
    #[serde(skip)]
    pub decision_seconds: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TraceLine {
    Header(EpisodeHeader),
    Step(StepRecord),
    Terminal(TerminalRecord),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Schema { line: usize, msg: String },
}

impl EpisodeTrace {
    /// Header line, one line per step, terminal line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |l: TraceLine| {
            out.push_str(&canonical::to_string(&l).expect("trace serializes"));
            out.push('\n');
        };
        push(TraceLine::Header(self.header.clone()));
        for s in &self.steps {
            push(TraceLine::Step(s.clone()));
        }
        push(TraceLine::Terminal(self.terminal.clone()));
        out
    }

    /// Parses a stream holding any number of concatenated traces.
    pub fn parse_jsonl(text: &str) -> Result<Vec<EpisodeTrace>, TraceError> {
        let mut traces = Vec::new();
        let mut cur: Option<(EpisodeHeader, Vec<StepRecord>)> = None;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: String| TraceError::Schema { line: n + 1, msg };
            let parsed: TraceLine = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            match parsed {
                TraceLine::Header(h) => {
                    if cur.is_some() {
                        return Err(err("header before previous terminal".into()));
                    }
                    cur = Some((h, Vec::new()));
                }
                TraceLine::Step(s) => match cur.as_mut() {
                    Some((_, steps)) => steps.push(s),
                    None => return Err(err("step outside an episode".into())),
                },
                TraceLine::Terminal(t) => {
                    let (header, steps) = cur.take().ok_or_else(|| err("terminal without header".into()))?;
                    traces.push(EpisodeTrace {
                        header,
                        steps,
                        terminal: t,
                        decision_seconds: Vec::new(),
                    });
                }
            }
        }
        if cur.is_some() {
            return Err(TraceError::Schema {
                line: text.lines().count(),
                msg: "episode without terminal".into(),
            });
        }
        Ok(traces)
    }
}

fn action_key(c: &Command) -> (u8, i64, i64) {
    match *c {
        Command::SearchSceneFrame(k) => (0, k as i64, 0),
        Command::NavToPoint(b) | Command::Pick(b) | Command::Place(b) => {
            let cx = (b[0] + b[2]) as i64 / 2;
            let cy = (b[1] + b[3]) as i64 / 2;
            (c.kind() as u8 + 1, cx / 100, cy / 100)
        }
    }
}

/// True when, within the last `window` steps, one action (kind plus
/// argument bucket) occurred at least `repeats` times while the held flag
/// stayed the same and the base moved less than the configured total
/// since the first of those repetitions.
pub fn detect_dead_loop(steps: &[StepRecord], cfg: &DeadLoopConfig) -> bool {
    let start = steps.len().saturating_sub(cfg.window);
    let recent = &steps[start..];
    let keys: Vec<Option<(u8, i64, i64)>> = recent
        .iter()
        .map(|s| s.action.as_ref().map(|a| action_key(&a.command)))
        .collect();
    for key in keys.iter().flatten() {
        let hits: Vec<usize> = keys
            .iter()
            .enumerate()
            .filter(|(_, k)| k.as_ref() == Some(key))
            .map(|(i, _)| i)
            .collect();
        if hits.len() < cfg.repeats {
            continue;
        }
        let first = hits[hits.len() - cfg.repeats];
        let span = &recent[first..];
        let held = &span[0].held_after;
        let same_held = span.iter().all(|s| &s.held_after == held);
        let moved: f64 = span[1..]
            .iter()
            .map(|s| s.pose_before.distance_xy(s.pose_after.x, s.pose_after.y))
            .sum();
        if same_held && moved < cfg.min_displacement {
            return true;
        }
    }
    false
}

/// Uniformly random pose in the largest navigable component.
pub fn initial_pose(scene: &SceneSpec, seed: u64) -> BasePose {
    let cells = crate::sim::main_cell_centers(scene);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = cells[rng.random_range(0..cells.len())];
    let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    BasePose::new(c[0], c[1], yaw)
}

/// Runs the decide/execute loop until a terminal condition.
pub fn run_episode(
    policy: &dyn Policy,
    scene: &SceneSpec,
    task: &TaskInstance,
    pose_frames: &PoseGraph,
    cfg: &EpisodeConfig,
    seed: u64,
) -> EpisodeTrace {
    let mut scene = scene.clone();
    let mut state = RobotState::at(initial_pose(&scene, seed));
    let exec_cfg = cfg.exec_for_mode();
    let header = EpisodeHeader {
        episode_id: format!("{}-ep-{seed}", task.task_id),
        scene_id: scene.scene_id.clone(),
        seed,
        task: task.clone(),
        policy: policy.descriptor(),
        config: *cfg,
        frames: frame_refs(pose_frames),
        initial_state: state.clone(),
        initial_objects: object_states(&scene),
    };
    let mut history = INITIAL_HISTORY.to_string();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut invalid = 0;
    let mut timing = Vec::new();
    let mut terminal = Terminal::Timeout;

    for t in 0..cfg.max_steps {
        let ego = observe(&state, &scene);
        let ctx = AgentContext {
            instruction: &task.instruction,
            pose_frames,
            ego: &ego,
            history: &history,
            step: t,
        };
        let digest = ctx.digest();
        let truth = GroundTruth {
            scene: &scene,
            task,
            state: &state,
            reach: &exec_cfg.reach,
        };
        let clock = Instant::now();
        let decision = policy.decide(&ctx, &truth);
        timing.push(clock.elapsed().as_secs_f64());

        let before = state.clone();
        let mut rec = StepRecord {
            step: t,
            context_digest: digest,
            history: history.clone(),
            raw_text: None,
            action: None,
            parse_error: None,
            policy_error: None,
            outcome: None,
            pose_before: before.base,
            pose_after: before.base,
            held_before: before.holding.clone(),
            held_after: before.holding.clone(),
            distances_before: distances(&scene, task, &before.base),
            distances: distances(&scene, task, &before.base),
            objects_after: Vec::new(),
        };
        let mut stop = None;
        match decision {
            Err(e) => {
                rec.policy_error = Some(e.to_string());
                stop = Some(Terminal::Failure(FailureReason::PolicyFailure(e.to_string())));
            }
            Ok(raw) => {
                let parsed = parse_action(&raw).and_then(|a| a.validate(pose_frames.len()).map(|_| a));
                rec.raw_text = Some(raw);
                match parsed {
                    Err(pe) => {
                        invalid += 1;
                        rec.parse_error = Some(pe);
                    }
                    Ok(action) => {
                        let (outcome, after) =
                            execute(&action.command, &state, &mut scene, pose_frames, &ego, &exec_cfg);
                        state = after;
                        history = action.summarization.clone();
                        let placed = matches!(action.command, Command::Place(_)) && outcome.success;
                        rec.action = Some(action);
                        rec.outcome = Some(outcome);
                        if placed {
                            let d = distances(&scene, task, &state.base).object_to_goal;
                            if d <= task.goal_threshold(cfg.mode.is_lenient()) {
                                stop = Some(Terminal::Success);
                            }
                        }
                    }
                }
            }
        }
        rec.pose_after = state.base;
        rec.held_after = state.holding.clone();
        rec.distances = distances(&scene, task, &state.base);
        rec.objects_after = object_states(&scene);
        steps.push(rec);

        if stop.is_none() && invalid >= cfg.invalid_budget {
            stop = Some(Terminal::Failure(FailureReason::InvalidActionBudget));
        }
        if stop.is_none() && detect_dead_loop(&steps, &cfg.dead_loop) {
            stop = Some(Terminal::DeadLoop);
        }
        if let Some(s) = stop {
            terminal = s;
            break;
        }
    }

    let object_to_goal = distances(&scene, task, &state.base).object_to_goal;
    EpisodeTrace {
        header,
        terminal: TerminalRecord {
            terminal,
            steps: steps.len(),
            final_objects: object_states(&scene),
            object_to_goal,
        },
        steps,
        decision_seconds: timing,
    }
}

/// Re-renders logged scene frames from their poses.
pub fn rebuild_pose_graph(scene: &SceneSpec, frames: &[FrameRef]) -> PoseGraph {
    PoseGraph {
        frames: frames
            .iter()
            .map(|f| crate::sim::PoseFrame {
                index: f.index,
                provenance: f.provenance,
                pose: f.pose,
                observation: observe(&RobotState::at(f.pose), scene),
            })
            .collect(),
    }
}

/// The scene with logged object states applied, and the robot's view in it.
pub fn render_state(
    scene: &SceneSpec,
    objects: &[ObjectState],
    robot: &RobotState,
) -> (SceneSpec, crate::sim::Observation) {
    let mut s = scene.clone();
    restore_objects(&mut s, objects);
    let obs = observe(robot, &s);
    (s, obs)
}
