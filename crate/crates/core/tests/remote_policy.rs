mod common;

use owmm_bench::agent::{run_episode, Command, EpisodeConfig, HighLevelAction, Terminal};
use owmm_bench::policy::{
    MockConfig, MockMode, MockServer, OraclePolicy, PolicyError, RemotePolicy, RemotePolicyConfig,
};

fn client(server: &MockServer, timeout_s: f64, retries: u32) -> RemotePolicy {
    RemotePolicy::new(RemotePolicyConfig {
        endpoint: server.url(),
        timeout_s,
        retries,
        oracle_hint: true,
        retry_backoff_ms: 1,
        ..RemotePolicyConfig::default()
    })
}

fn fixed(text: &str) -> MockConfig {
    MockConfig {
        mode: MockMode::Fixed(text.into()),
        ..MockConfig::default()
    }
}

#[test]
fn retries_through_injected_failures() {
    let server = MockServer::start("127.0.0.1:0", MockConfig { fail_first: 2, ..fixed("ok") }).unwrap();
    assert_eq!(client(&server, 5.0, 2).send("{}").unwrap(), "ok");
    assert_eq!(server.requests_served(), 3);
}

#[test]
fn gives_up_after_retry_budget() {
    let server = MockServer::start("127.0.0.1:0", MockConfig { fail_first: 3, ..fixed("ok") }).unwrap();
    let err = client(&server, 5.0, 2).send("{}").unwrap_err();
    assert!(matches!(err, PolicyError::Transport(_)), "{err:?}");
    assert_eq!(server.requests_served(), 3);
}

#[test]
fn timeout_then_recovery() {
    let cfg = MockConfig {
        delay_first: 1,
        delay_ms: 600,
        ..fixed("late")
    };
    let server = MockServer::start("127.0.0.1:0", cfg).unwrap();
    assert_eq!(client(&server, 0.2, 1).send("{\"a\":1}").unwrap(), "late");
}

#[test]
fn persistent_delay_is_timeout() {
    let cfg = MockConfig {
        delay_first: 10,
        delay_ms: 500,
        ..fixed("late")
    };
    let server = MockServer::start("127.0.0.1:0", cfg).unwrap();
    assert_eq!(client(&server, 0.1, 1).send("{}").unwrap_err(), PolicyError::Timeout);
}

#[test]
fn fail_rate_one_exhausts_retries() {
    let server = MockServer::start("127.0.0.1:0", MockConfig { fail_rate: 1.0, ..fixed("x") }).unwrap();
    assert!(matches!(client(&server, 5.0, 3).send("{}"), Err(PolicyError::Transport(_))));
    assert_eq!(server.requests_served(), 4);
}

#[test]
fn client_error_is_not_retried() {
    let server = MockServer::start("127.0.0.1:0", MockConfig::default()).unwrap();
    let err = client(&server, 5.0, 3).send("{\"no\":\"hint\"}").unwrap_err();
    assert!(matches!(err, PolicyError::Transport(ref m) if m.contains("400")), "{err:?}");
    assert_eq!(server.requests_served(), 1);
}

#[test]
fn refused_connection_is_transport_error() {
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let p = RemotePolicy::new(RemotePolicyConfig {
        endpoint: format!("http://127.0.0.1:{port}/decide"),
        retries: 1,
        retry_backoff_ms: 1,
        ..RemotePolicyConfig::default()
    });
    assert!(matches!(p.send("{}"), Err(PolicyError::Transport(_))));
}

#[test]
fn echo_server_matches_in_process_oracle() {
    let cfg = MockConfig {
        fail_rate: 0.3,
        seed: 5,
        ..MockConfig::default()
    };
    let server = MockServer::start("127.0.0.1:0", cfg).unwrap();
    let remote = client(&server, 5.0, 6);
    for seed in 0..3 {
        let (scene, task, frames) = common::setup(seed);
        let ec = EpisodeConfig::default();
        let a = run_episode(&OraclePolicy::default(), &scene, &task, &frames, &ec, seed);
        let b = run_episode(&remote, &scene, &task, &frames, &ec, seed);
        assert_eq!(a.terminal, b.terminal);
        assert_eq!(a.steps, b.steps);
    }
}

#[test]
fn fixed_search_loops() {
    let text = HighLevelAction::new(Command::SearchSceneFrame(0), "r", "s").to_json();
    let server = MockServer::start("127.0.0.1:0", fixed(&text)).unwrap();
    let remote = client(&server, 5.0, 0);
    let (scene, task, frames) = common::setup(1);
    let t = run_episode(&remote, &scene, &task, &frames, &EpisodeConfig::default(), 1);
    assert_eq!(t.terminal.terminal, Terminal::DeadLoop);
}
