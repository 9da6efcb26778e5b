//! The `owmm` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 infrastructure, 3 validation.

use crate::agent::{run_episode, EpisodeConfig, EpisodeTrace, EvalMode, FailureReason, Terminal};
use crate::canonical;
use crate::datagen::{
    episode_seed, export_jsonl, parse_records, prepare_episode, synthesize, write_manifest, DatagenError,
    SplitConfig, SynthConfig,
};
use crate::eval::{
    eval_episode, eval_single, parse_predictions, predict_records, render_table, render_timing, summarize_episodes,
    timing_report, EpisodicThresholds, MetricsReport,
};
use crate::policy::{MockConfig, MockMode, MockServer, PayloadMode, PolicySpec, RemotePolicyConfig};
use crate::world::{generate_scene, ObjectPool, SceneParams, SceneSpec, SceneSplit};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFRA: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "OWMM_SEED";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, msg: msg.into() }
    }
    fn infra(msg: impl Into<String>) -> Self {
        Self { code: EXIT_INFRA, msg: msg.into() }
    }
    fn validation(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            msg: msg.into(),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Settings shared by the subcommands. A `--config` file holds this
/// structure; flags given on the command line win over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub scene: SceneParams,
    pub policy: PolicySpec,
    pub episodes: usize,
    pub max_steps: usize,
    pub mode: EvalMode,
    pub waypoint_interval: usize,
    pub n_random_frames: usize,
    pub parallel: usize,
    pub remote: RemotePolicyConfig,
    pub thresholds: EpisodicThresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scene: SceneParams::default(),
            policy: PolicySpec::Oracle,
            episodes: 10,
            max_steps: EpisodeConfig::default().max_steps,
            mode: EvalMode::Strict,
            waypoint_interval: 5,
            n_random_frames: 4,
            parallel: 1,
            remote: RemotePolicyConfig::default(),
            thresholds: EpisodicThresholds::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult {
        if self.parallel == 0 {
            return Err(CliError::usage("--parallel must be at least 1"));
        }
        if self.waypoint_interval == 0 {
            return Err(CliError::usage("--waypoint-interval must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(CliError::usage("--max-steps must be at least 1"));
        }
        if !self.thresholds.is_ordered() {
            return Err(CliError::usage("strict thresholds must not exceed lenient ones"));
        }
        self.scene.validate().map_err(|e| CliError::usage(e.to_string()))
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            max_steps: self.max_steps,
            mode: self.mode,
            ..EpisodeConfig::default()
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "owmm", version, about = "Mobile manipulation benchmark kit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file with a RunConfig; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed. OWMM_SEED overrides it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-episode work.
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MockModeArg {
    EchoOracle,
    Fixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate scene files.
    GenScenes {
        /// Number of scenes (seeds seed..seed+count).
        #[arg(long)]
        count: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Scenes assigned to the test split, taken from the end of the
        /// range. Defaults to round(count * 30 / 143).
        #[arg(long)]
        test_scenes: Option<usize>,
        /// Receptacles per scene.
        #[arg(long)]
        receptacles: Option<usize>,
        /// Objects per scene.
        #[arg(long)]
        objects: Option<usize>,
    },
    /// Run a policy on tasks sampled from scene files and write traces.
    RunEpisodes {
        /// Directory of scene files.
        #[arg(long)]
        scenes: PathBuf,
        /// oracle | noisy:SIGMA,P[,SEED] | remote:URL | repeat-search[:K] | invalid-json | pivot[:SEED]
        #[arg(long)]
        policy: Option<PolicySpec>,
        /// Episodes per scene.
        #[arg(long)]
        episodes: Option<usize>,
        /// High-level step limit per episode.
        #[arg(long)]
        max_steps: Option<usize>,
        /// Grasp radius mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Trace JSONL output.
        #[arg(long)]
        out: PathBuf,
        /// Optional timing sidecar (JSON); never part of the traces.
        #[arg(long)]
        timing: Option<PathBuf>,
        /// Remote request timeout in seconds.
        #[arg(long)]
        remote_timeout: Option<f64>,
        /// Remote retries after the first attempt.
        #[arg(long)]
        remote_retries: Option<u32>,
        /// Attach the oracle's answer to remote requests (for echo servers).
        #[arg(long)]
        oracle_hint: bool,
        /// Include the ego depth raster in remote requests.
        #[arg(long)]
        raster: bool,
    },
    /// Build the instruction-tuning dataset from oracle episodes.
    SynthData {
        #[arg(long)]
        scenes: PathBuf,
        /// Output directory for train.jsonl, test.jsonl and manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Oracle episodes per scene.
        #[arg(long)]
        episodes: Option<usize>,
        /// Checkpoint interval between waypoint records.
        #[arg(long)]
        waypoint_interval: Option<usize>,
        /// Random scene frames per episode.
        #[arg(long)]
        n_random_frames: Option<usize>,
        /// JSON SplitConfig replacing the split derived from the scenes.
        #[arg(long)]
        split: Option<PathBuf>,
    },
    /// Ask a policy for an answer on every stored record.
    Predict {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        policy: Option<PolicySpec>,
        /// Prediction JSONL output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against stored records.
    EvalSingle {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Report JSON output; the table goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score stored episode traces.
    EvalEpisodic {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, conflicts_with = "lenient")]
        strict: bool,
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the remote-policy protocol with canned behavior.
    MockPolicy {
        /// Listen address.
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
        #[arg(long, value_enum, default_value = "echo-oracle")]
        mode: MockModeArg,
        /// Reply text in fixed mode.
        #[arg(long)]
        text: Option<String>,
        /// Probability of answering 500.
        #[arg(long, default_value_t = 0.0)]
        fail_rate: f64,
        /// Attempts per request answered with 500 first.
        #[arg(long, default_value_t = 0)]
        fail_first: u32,
        /// Attempts per request delayed by --delay-ms.
        #[arg(long, default_value_t = 0)]
        delay_first: u32,
        #[arg(long, default_value_t = 0)]
        delay_ms: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Lenient,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => EvalMode::Strict,
            ModeArg::Lenient => EvalMode::Lenient,
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

fn load_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &global.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::infra(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(p) = global.parallel {
        cfg.parallel = p;
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.seed = v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{SEED_ENV} must be an unsigned integer")))?;
    }
    Ok(cfg)
}

fn pool(n: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::infra(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::infra(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::infra(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::infra(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    canonical::to_string(v).expect("serializable") + "\n"
}

/// Scene files of a directory, in file-name order.
pub fn load_scenes(dir: &Path) -> Result<Vec<SceneSpec>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::infra(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::validation(format!("no scene files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let text = read_file(p)?;
            serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Number of test scenes for a range of `count`, keeping the 137:20-ish
/// ratio of held-out scenes.
pub fn default_test_scenes(count: usize) -> usize {
    ((count as f64) * 30.0 / 143.0).round() as usize
}

fn dispatch(cli: Cli) -> CliResult {
    let mut cfg = load_config(&cli.global)?;
    match cli.command {
        Command::GenScenes {
            count,
            out,
            test_scenes,
            receptacles,
            objects,
        } => {
            if count == 0 {
                return Err(CliError::usage("--count must be at least 1"));
            }
            if let Some(r) = receptacles {
                cfg.scene.receptacles = r;
            }
            if let Some(o) = objects {
                cfg.scene.objects = o;
            }
            cfg.validate()?;
            let n_test = test_scenes.unwrap_or_else(|| default_test_scenes(count));
            if n_test > count {
                return Err(CliError::usage("--test-scenes exceeds --count"));
            }
            cmd_gen_scenes(&cfg, count, n_test, &out)
        }
        Command::RunEpisodes {
            scenes,
            policy,
            episodes,
            max_steps,
            mode,
            out,
            timing,
            remote_timeout,
            remote_retries,
            oracle_hint,
            raster,
        } => {
            if let Some(p) = policy {
                cfg.policy = p;
            }
            if let Some(e) = episodes {
                cfg.episodes = e;
            }
            if let Some(m) = max_steps {
                cfg.max_steps = m;
            }
            if let Some(m) = mode {
                cfg.mode = m.into();
            }
            if let Some(t) = remote_timeout {
                cfg.remote.timeout_s = t;
            }
            if let Some(r) = remote_retries {
                cfg.remote.retries = r;
            }
            cfg.remote.oracle_hint |= oracle_hint;
            if raster {
                cfg.remote.payload = PayloadMode::StructuredRaster;
            }
            cfg.validate()?;
            cmd_run_episodes(&cfg, &scenes, &out, timing.as_deref())
        }
        Command::SynthData {
            scenes,
            out,
            episodes,
            waypoint_interval,
            n_random_frames,
            split,
        } => {
            if let Some(e) = episodes {
                cfg.episodes = e;
            }
            if let Some(w) = waypoint_interval {
                cfg.waypoint_interval = w;
            }
            if let Some(n) = n_random_frames {
                cfg.n_random_frames = n;
            }
            cfg.validate()?;
            cmd_synth_data(&cfg, &scenes, &out, split.as_deref())
        }
        Command::Predict {
            records,
            scenes,
            policy,
            out,
        } => {
            if let Some(p) = policy {
                cfg.policy = p;
            }
            cfg.validate()?;
            cmd_predict(&cfg, &records, &scenes, &out)
        }
        Command::EvalSingle { records, predictions, out } => cmd_eval_single(&records, &predictions, out.as_deref()),
        Command::EvalEpisodic {
            traces,
            strict,
            lenient,
            out,
        } => {
            let mode = match (strict, lenient) {
                (_, true) => EvalMode::Lenient,
                (true, _) => EvalMode::Strict,
                _ => cfg.mode,
            };
            cfg.validate()?;
            cmd_eval_episodic(&cfg, &traces, mode, out.as_deref())
        }
        Command::MockPolicy {
            addr,
            mode,
            text,
            fail_rate,
            fail_first,
            delay_first,
            delay_ms,
        } => {
            let mode = match (mode, text) {
                (MockModeArg::EchoOracle, None) => MockMode::EchoOracle,
                (MockModeArg::Fixed, Some(t)) => MockMode::Fixed(t),
                (MockModeArg::Fixed, None) => return Err(CliError::usage("--mode fixed needs --text")),
                (MockModeArg::EchoOracle, Some(_)) => return Err(CliError::usage("--text only applies to --mode fixed")),
            };
            if !(0.0..=1.0).contains(&fail_rate) {
                return Err(CliError::usage("--fail-rate must lie in [0, 1]"));
            }
            let server = MockServer::start(
                &addr,
                MockConfig {
                    mode,
                    fail_rate,
                    fail_first,
                    delay_first,
                    delay_ms,
                    seed: cfg.seed,
                },
            )
            .map_err(|e| CliError::infra(format!("bind {addr}: {e}")))?;
            println!("serving on {}", server.url());
            server.join();
            Ok(())
        }
    }
}

fn cmd_gen_scenes(cfg: &RunConfig, count: usize, n_test: usize, out: &Path) -> CliResult {
    let first_test = count - n_test;
    let scenes: Vec<Result<SceneSpec, String>> = pool(cfg.parallel)?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut params = cfg.scene.clone();
                let test = i >= first_test;
                params.split = if test { SceneSplit::Test } else { SceneSplit::Train };
                params.object_pool = if test { ObjectPool::Test } else { ObjectPool::Train };
                generate_scene(cfg.seed + i as u64, &params).map_err(|e| format!("seed {}: {e}", cfg.seed + i as u64))
            })
            .collect()
    });
    std::fs::create_dir_all(out).map_err(|e| CliError::infra(format!("{}: {e}", out.display())))?;
    for s in scenes {
        let s = s.map_err(CliError::validation)?;
        write_file(&out.join(format!("{}.json", s.scene_id)), &to_json(&s))?;
    }
    println!("wrote {count} scenes ({n_test} test) to {}", out.display());
    Ok(())
}

/// Traces for `episodes` tasks per scene, in (scene, episode) order.
pub fn run_batch(cfg: &RunConfig, scenes: &[SceneSpec]) -> Result<(Vec<EpisodeTrace>, Vec<String>), CliError> {
    let policy = cfg.policy.build(&cfg.remote);
    let ep_cfg = cfg.episode_config();
    let jobs: Vec<(usize, u64)> = scenes
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..cfg.episodes).map(move |k| (i, episode_seed(&s.scene_id, k, cfg.seed))))
        .collect();
    let results: Vec<Result<EpisodeTrace, String>> = pool(cfg.parallel)?.install(|| {
        jobs.par_iter()
            .map(|&(i, seed)| {
                let (task, frames) =
                    prepare_episode(&scenes[i], seed, cfg.n_random_frames).map_err(|e| e.to_string())?;
                Ok(run_episode(policy.as_ref(), &scenes[i], &task, &frames, &ep_cfg, seed))
            })
            .collect()
    });
    let mut traces = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(t) => traces.push(t),
            Err(e) => skipped.push(e),
        }
    }
    Ok((traces, skipped))
}

fn cmd_run_episodes(cfg: &RunConfig, scenes_dir: &Path, out: &Path, timing: Option<&Path>) -> CliResult {
    let scenes = load_scenes(scenes_dir)?;
    let (traces, skipped) = run_batch(cfg, &scenes)?;
    for s in &skipped {
        eprintln!("skipped episode: {s}");
    }
    let text: String = traces.iter().map(EpisodeTrace::to_jsonl).collect();
    write_file(out, &text)?;
    if let Some(t) = timing {
        write_file(t, &to_json(&timing_report(&traces)))?;
        eprint!("{}", render_timing(&timing_report(&traces)));
    }
    let mut counts: std::collections::BTreeMap<&str, usize> = Default::default();
    let mut infra = Vec::new();
    for t in &traces {
        *counts.entry(t.terminal.terminal.label()).or_default() += 1;
        if let Terminal::Failure(FailureReason::PolicyFailure(msg)) = &t.terminal.terminal {
            infra.push(format!("{}: {msg}", t.header.episode_id));
        }
    }
    println!("{} episodes written to {}", traces.len(), out.display());
    for (k, n) in &counts {
        println!("  {k:<32} {n}");
    }
    if !infra.is_empty() {
        for m in &infra {
            eprintln!("policy error: {m}");
        }
        return Err(CliError::infra(format!("{} episodes ended on policy errors", infra.len())));
    }
    Ok(())
}

fn cmd_synth_data(cfg: &RunConfig, scenes_dir: &Path, out: &Path, split: Option<&Path>) -> CliResult {
    let scenes = load_scenes(scenes_dir)?;
    let split_cfg = match split {
        Some(p) => serde_json::from_str(&read_file(p)?).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
        None => SplitConfig::from_scenes(&scenes),
    };
    let mut synth = SynthConfig {
        waypoint_interval: cfg.waypoint_interval,
        ..SynthConfig::default()
    };
    synth.collect.episodes_per_scene = cfg.episodes;
    synth.collect.n_random_frames = cfg.n_random_frames;
    synth.collect.base_seed = cfg.seed;
    synth.collect.episode = cfg.episode_config();
    let output = pool(cfg.parallel)?.install(|| synthesize(&scenes, &synth));
    let mut manifest = match export_jsonl(&output.records, out, &split_cfg) {
        Ok(m) => m,
        Err(DatagenError::Leakage(labels)) => {
            return Err(CliError::validation(format!("leakage detected: {}", labels.join(", "))));
        }
        Err(e) => return Err(CliError::infra(e.to_string())),
    };
    manifest.yield_stats = Some(output.yield_stats);
    manifest.skipped_records = output.skipped.len();
    write_manifest(&manifest, out).map_err(|e| CliError::infra(e.to_string()))?;
    println!(
        "yield {}/{} episodes, {} of {} key steps kept, {} records skipped",
        output.yield_stats.valid,
        output.yield_stats.total,
        output.kept_steps,
        output.key_steps,
        output.skipped.len()
    );
    for (name, c) in [("train", &manifest.train), ("test", &manifest.test)] {
        let per: Vec<String> = c.per_kind.iter().map(|(k, n)| format!("{k}={n}")).collect();
        println!("  {name:<6} {} records  {}", c.records, per.join(" "));
    }
    Ok(())
}

fn load_records(path: &Path) -> Result<Vec<crate::datagen::QARecord>, CliError> {
    parse_records(&read_file(path)?).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn cmd_predict(cfg: &RunConfig, records: &Path, scenes_dir: &Path, out: &Path) -> CliResult {
    let records = load_records(records)?;
    let scenes = load_scenes(scenes_dir)?;
    let policy = cfg.policy.build(&cfg.remote);
    let preds = pool(cfg.parallel)?.install(|| {
        records
            .par_chunks(16)
            .flat_map_iter(|chunk| predict_records(policy.as_ref(), chunk, &scenes))
            .collect::<Vec<_>>()
    });
    if preds.len() < records.len() {
        eprintln!("{} records had no matching scene", records.len() - preds.len());
    }
    let text: String = preds.iter().map(to_json).collect();
    write_file(out, &text)?;
    println!("{} predictions written to {}", preds.len(), out.display());
    Ok(())
}

fn cmd_eval_single(records: &Path, predictions: &Path, out: Option<&Path>) -> CliResult {
    let records = load_records(records)?;
    let (preds, malformed) = parse_predictions(&read_file(predictions)?);
    let report = MetricsReport {
        single: Some(eval_single(&records, &preds, malformed)),
        episodic: None,
    };
    if let Some(p) = out {
        write_file(p, &to_json(&report))?;
    }
    print!("{}", render_table(&report));
    Ok(())
}

fn cmd_eval_episodic(cfg: &RunConfig, traces: &Path, mode: EvalMode, out: Option<&Path>) -> CliResult {
    let traces = EpisodeTrace::parse_jsonl(&read_file(traces)?)
        .map_err(|e| CliError::validation(format!("{}: {e}", traces.display())))?;
    let flags: Vec<_> = pool(cfg.parallel)?.install(|| {
        traces
            .par_iter()
            .map(|t| eval_episode(t, &cfg.thresholds, mode))
            .collect()
    });
    let report = MetricsReport {
        single: None,
        episodic: Some(summarize_episodes(&flags, mode)),
    };
    if let Some(p) = out {
        write_file(p, &to_json(&report))?;
    }
    print!("{}", render_table(&report));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_scene_count_follows_ratio() {
        assert_eq!(default_test_scenes(143), 30);
        assert_eq!(default_test_scenes(3), 1);
        assert_eq!(default_test_scenes(1), 0);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["owmm", "gen-scenes", "--count", "1", "--out", "x", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["owmm", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn zero_count_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("s");
        assert_eq!(run(["owmm", "gen-scenes", "--count", "0", "--out", out.to_str().unwrap()]), EXIT_USAGE);
        assert!(!out.exists());
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"seed": 9, "parallel": 3}"#).unwrap();
        let g = GlobalArgs {
            config: Some(p.clone()),
            seed: None,
            parallel: Some(2),
        };
        if std::env::var(SEED_ENV).is_err() {
            let c = load_config(&g).unwrap();
            assert_eq!((c.seed, c.parallel), (9, 2));
        }
        std::fs::write(&p, r#"{"sead": 9}"#).unwrap();
        assert_eq!(load_config(&g).unwrap_err().code, EXIT_USAGE);
    }
}
