//! Episodic and single-step scores of the noisy oracle as noise grows.

use owmm_bench::agent::{run_episode, EpisodeConfig, EvalMode};
use owmm_bench::datagen::{prepare_episode, synthesize, SynthConfig};
use owmm_bench::eval::{eval_episode, eval_single, predict_records, summarize_episodes, EpisodicThresholds};
use owmm_bench::policy::NoisyOracle;
use owmm_bench::world::{generate_scene, SceneParams};

fn main() {
    let scenes: Vec<_> = (0..2).map(|s| generate_scene(s, &SceneParams::default()).unwrap()).collect();
    let mut cfg = SynthConfig::default();
    cfg.collect.episodes_per_scene = 10;
    let records = synthesize(&scenes, &cfg).records;

    println!("{:>6} {:>6} {:>10} {:>10} {:>10}", "sigma", "p", "decision", "grounding", "success");
    for (sigma, p) in [(0.0, 0.0), (10.0, 0.0), (50.0, 0.05), (100.0, 0.2)] {
        let policy = NoisyOracle::new(sigma, p, 1);
        let single = eval_single(&records, &predict_records(&policy, &records, &scenes), 0);
        let flags: Vec<_> = (0..20u64)
            .map(|seed| {
                let scene = &scenes[(seed % 2) as usize];
                let (task, frames) = prepare_episode(scene, seed, 4).unwrap();
                let t = run_episode(&policy, scene, &task, &frames, &EpisodeConfig::default(), seed);
                eval_episode(&t, &EpisodicThresholds::default(), EvalMode::Strict)
            })
            .collect();
        let ep = summarize_episodes(&flags, EvalMode::Strict);
        println!(
            "{sigma:>6} {p:>6} {:>10.3} {:>10.4} {:>10.2}",
            single.decision_accuracy.unwrap_or(0.0),
            single.grounding["all"].mean.unwrap_or(0.0),
            ep.full_task.unwrap_or(0.0)
        );
    }
}
