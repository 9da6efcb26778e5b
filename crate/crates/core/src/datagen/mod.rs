//! Training-data synthesis from oracle episodes.

mod collect;
mod export;
mod keysteps;
mod records;
mod templates;

pub use collect::{collect_batch, collect_episode, episode_seed, prepare_episode, CollectConfig, DatagenError, YieldStats};
pub use export::{
    check_leakage, export_jsonl, parse_records, sort_records, to_jsonl, write_manifest, LeakageReport, Manifest,
    SplitConfig, SplitCounts,
};
pub use keysteps::{filter_key_steps, filter_reason, nav_key_indices, select_key_steps, KeyRole, KeyStep};
pub use records::{
    action_information, build_qa_records, chain_violations, Augmenter, IdentityAugmenter, ImageRef, QARecord,
    SkippedRecord,
};
pub use templates::{render, Bindings, Phrasing, ReasoningSlot, SummarySlot, TemplateBank, TemplateError, TEMPLATE_BANK};

use crate::world::SceneSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub collect: CollectConfig,
    pub waypoint_interval: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            collect: CollectConfig::default(),
            waypoint_interval: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub records: Vec<QARecord>,
    pub skipped: Vec<SkippedRecord>,
    pub yield_stats: YieldStats,
    pub key_steps: usize,
    pub kept_steps: usize,
}

/// Collect, select, filter and build, in that order. Records come back in
/// export order.
pub fn synthesize(scenes: &[SceneSpec], cfg: &SynthConfig) -> SynthOutput {
    use rayon::prelude::*;
    let (traces, yield_stats) = collect_batch(scenes, &cfg.collect);
    let per_episode: Vec<(usize, Vec<KeyStep>)> = traces
        .par_iter()
        .map(|(i, t)| {
            let scene = &scenes[*i];
            let all = select_key_steps(t, scene, cfg.waypoint_interval);
            let n = all.len();
            (n, filter_key_steps(all, scene, &t.header.config.exec.reach))
        })
        .collect();
    let key_steps = per_episode.iter().map(|(n, _)| n).sum();
    let kept: Vec<KeyStep> = per_episode.into_iter().flat_map(|(_, k)| k).collect();
    let kept_steps = kept.len();
    let (mut records, skipped) =
        build_qa_records(&kept, scenes, &TEMPLATE_BANK, cfg.collect.oracle.phrasing, &IdentityAugmenter);
    sort_records(&mut records);
    SynthOutput {
        records,
        skipped,
        yield_stats,
        key_steps,
        kept_steps,
    }
}
