use crate::agent::{run_episode, EpisodeConfig, EpisodeTrace, Terminal};
use crate::policy::OraclePolicy;
use crate::sim::{render_pose_graph, PoseGraph};
use crate::world::{spawn_task, SceneSpec, TaskInstance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatagenError {
    #[error("episode {episode_id} failed: {terminal}")]
    EpisodeFailed { episode_id: String, terminal: String },
    #[error("episode setup failed for {scene_id}: {msg}")]
    Setup { scene_id: String, msg: String },
    #[error("test labels leaked into train records: {0:?}")]
    Leakage(Vec<String>),
    #[error("io: {0}")]
    Io(String),
}

/// Task/episode seed for the `k`-th episode of a scene.
pub fn episode_seed(scene_id: &str, k: usize, base_seed: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(scene_id.as_bytes());
    h.update((k as u64).to_le_bytes());
    h.update(base_seed.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes")) >> 16
}

/// Task and scene frames for one episode seed.
pub fn prepare_episode(scene: &SceneSpec, seed: u64, n_random_frames: usize) -> Result<(TaskInstance, PoseGraph), DatagenError> {
    let setup = |msg: String| DatagenError::Setup {
        scene_id: scene.scene_id.clone(),
        msg,
    };
    let task = spawn_task(scene, seed).map_err(|e| setup(e.to_string()))?;
    let frames = render_pose_graph(scene, &task, seed, n_random_frames).map_err(|e| setup(e.to_string()))?;
    Ok((task, frames))
}

/// Runs the oracle on one task; anything but success discards the episode.
pub fn collect_episode(
    oracle: &OraclePolicy,
    scene: &SceneSpec,
    task: &TaskInstance,
    frames: &PoseGraph,
    cfg: &EpisodeConfig,
    seed: u64,
) -> Result<EpisodeTrace, DatagenError> {
    let trace = run_episode(oracle, scene, task, frames, cfg, seed);
    if trace.terminal.terminal != Terminal::Success {
        return Err(DatagenError::EpisodeFailed {
            episode_id: trace.header.episode_id.clone(),
            terminal: trace.terminal.terminal.label().to_string(),
        });
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YieldStats {
    pub valid: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollectConfig {
    pub episodes_per_scene: usize,
    pub n_random_frames: usize,
    pub base_seed: u64,
    pub episode: EpisodeConfig,
    pub oracle: OraclePolicy,
}

impl Default for CollectConfig {
    fn default() -> Self {
        Self {
            episodes_per_scene: 400,
            n_random_frames: 4,
            base_seed: 0,
            episode: EpisodeConfig::default(),
            oracle: OraclePolicy::default(),
        }
    }
}

/// Oracle traces for every (scene, episode) pair, in input order.
pub fn collect_batch(scenes: &[SceneSpec], cfg: &CollectConfig) -> (Vec<(usize, EpisodeTrace)>, YieldStats) {
    let jobs: Vec<(usize, u64)> = scenes
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..cfg.episodes_per_scene).map(move |k| (i, episode_seed(&s.scene_id, k, cfg.base_seed))))
        .collect();
    let results: Vec<Option<(usize, EpisodeTrace)>> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let scene = &scenes[i];
            let (task, frames) = prepare_episode(scene, seed, cfg.n_random_frames).ok()?;
            collect_episode(&cfg.oracle, scene, &task, &frames, &cfg.episode, seed)
                .ok()
                .map(|t| (i, t))
        })
        .collect();
    let stats = YieldStats {
        valid: results.iter().flatten().count(),
        total: results.len(),
    };
    (results.into_iter().flatten().collect(), stats)
}
