//! Score a small batch of episodes and print the report tables.

use owmm_bench::agent::{run_episode, EpisodeConfig, EvalMode};
use owmm_bench::datagen::prepare_episode;
use owmm_bench::eval::{eval_episode, render_table, summarize_episodes, EpisodicThresholds, MetricsReport};
use owmm_bench::policy::{NoisyOracle, Policy};
use owmm_bench::world::{generate_scene, SceneParams};

fn main() {
    let policy = NoisyOracle::new(60.0, 0.1, 0);
    let traces: Vec<_> = (0..30u64)
        .map(|seed| {
            let scene = generate_scene(seed, &SceneParams::default()).unwrap();
            let (task, frames) = prepare_episode(&scene, seed, 4).unwrap();
            run_episode(&policy as &dyn Policy, &scene, &task, &frames, &EpisodeConfig::default(), seed)
        })
        .collect();
    for mode in [EvalMode::Strict, EvalMode::Lenient] {
        let flags: Vec<_> = traces.iter().map(|t| eval_episode(t, &EpisodicThresholds::default(), mode)).collect();
        let report = MetricsReport {
            single: None,
            episodic: Some(summarize_episodes(&flags, mode)),
        };
        print!("{}", render_table(&report));
    }
}
