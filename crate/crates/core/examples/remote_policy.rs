//! Drive an episode through the HTTP protocol against the bundled mock
//! server, with injected failures and slow first answers.

use owmm_bench::agent::{run_episode, EpisodeConfig};
use owmm_bench::datagen::prepare_episode;
use owmm_bench::policy::{MockConfig, MockServer, OraclePolicy, RemotePolicy, RemotePolicyConfig};
use owmm_bench::world::{generate_scene, SceneParams};

fn main() {
    let server = MockServer::start(
        "127.0.0.1:0",
        MockConfig {
            fail_rate: 0.25,
            delay_first: 1,
            delay_ms: 200,
            ..MockConfig::default()
        },
    )
    .expect("bind");
    println!("mock policy at {}", server.url());
    let remote = RemotePolicy::new(RemotePolicyConfig {
        endpoint: server.url(),
        timeout_s: 0.1,
        retries: 8,
        oracle_hint: true,
        ..RemotePolicyConfig::default()
    });

    let scene = generate_scene(4, &SceneParams::default()).expect("scene");
    let (task, frames) = prepare_episode(&scene, 4, 4).expect("episode");
    let cfg = EpisodeConfig::default();
    let local = run_episode(&OraclePolicy::default(), &scene, &task, &frames, &cfg, 4);
    let over_http = run_episode(&remote, &scene, &task, &frames, &cfg, 4);
    println!(
        "local {} / remote {} after {} HTTP requests; identical terminals: {}",
        local.terminal.terminal.label(),
        over_http.terminal.terminal.label(),
        server.requests_served(),
        local.terminal == over_http.terminal
    );
}
