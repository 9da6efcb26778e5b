//! Build and export an instruction-tuning set from oracle episodes.

use owmm_bench::datagen::{export_jsonl, synthesize, SplitConfig, SynthConfig};
use owmm_bench::world::{generate_scene, ObjectPool, SceneParams, SceneSplit};

fn main() {
    let scenes: Vec<_> = [(0, SceneSplit::Train), (1, SceneSplit::Train), (2, SceneSplit::Test)]
        .into_iter()
        .map(|(seed, split)| {
            let object_pool = if split == SceneSplit::Test { ObjectPool::Test } else { ObjectPool::Train };
            generate_scene(seed, &SceneParams { split, object_pool, ..SceneParams::default() }).unwrap()
        })
        .collect();
    let mut cfg = SynthConfig::default();
    cfg.collect.episodes_per_scene = 8;
    let out = synthesize(&scenes, &cfg);
    println!(
        "{} of {} episodes usable, {} of {} key steps kept",
        out.yield_stats.valid, out.yield_stats.total, out.kept_steps, out.key_steps
    );

    let dir = std::env::temp_dir().join("owmm-example-dataset");
    let manifest = export_jsonl(&out.records, &dir, &SplitConfig::from_scenes(&scenes)).expect("export");
    println!("train {:?}", manifest.train.per_kind);
    println!("test  {:?}", manifest.test.per_kind);
    println!("written to {}", dir.display());

    let r = &out.records[0];
    println!("\nquestion: {}\nanswer:   {}", r.question, r.answer);
}
