//! Run the privileged oracle through the decide/execute loop and print the
//! high-level trace.

use owmm_bench::agent::{run_episode, EpisodeConfig};
use owmm_bench::datagen::prepare_episode;
use owmm_bench::policy::OraclePolicy;
use owmm_bench::world::{generate_scene, SceneParams};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let scene = generate_scene(seed, &SceneParams::default()).expect("scene");
    let (task, frames) = prepare_episode(&scene, seed, 4).expect("episode");
    let trace = run_episode(&OraclePolicy::default(), &scene, &task, &frames, &EpisodeConfig::default(), seed);

    println!("{}", task.instruction);
    for s in &trace.steps {
        let Some(a) = &s.action else { continue };
        let ok = s.outcome.as_ref().is_some_and(|o| o.success);
        println!("step {} {:?} ok={ok}", s.step, a.command);
        println!("  reasoning: {}", a.reasoning);
        println!("  history:   {}", a.summarization);
    }
    println!(
        "terminal {} after {} steps, object {:.2} m from the goal",
        trace.terminal.terminal.label(),
        trace.terminal.steps,
        trace.terminal.object_to_goal
    );
}
