//! Decision sources: the ground-truth oracle, its noisy variant, a remote
//! model behind an HTTP protocol, scripted fault models and a
//! sampling-based grounding baseline.

mod mock_server;
mod noisy;
mod oracle;
mod pivot;
mod remote;
mod scripted;

pub use mock_server::{MockConfig, MockMode, MockServer};
pub use noisy::NoisyOracle;
pub use oracle::{oracle_rule, OraclePhase, OraclePolicy, OracleRuleState};
pub use pivot::{pivot_sample, PivotConfig, PivotIteration, PivotPolicy, PivotResult};
pub use remote::{build_request, PayloadMode, RemotePolicy, RemotePolicyConfig, PROTOCOL_VERSION};
pub use scripted::{FixedTextPolicy, InvalidJsonPolicy, RepeatSearchPolicy};

use crate::agent::{AgentContext, GroundTruth};
use crate::canonical;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("oracle stuck: {0}")]
    OracleStuck(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDescriptor {
    pub name: String,
    pub config_digest: String,
}

impl PolicyDescriptor {
    pub fn new<C: Serialize>(name: &str, config: &C) -> Self {
        let text = canonical::to_string(config).expect("policy config serializes");
        Self {
            name: name.to_string(),
            config_digest: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }
}

/// Produces raw action text for one step. `truth` is only for scripted
/// policies; model-backed policies must not read it.
pub trait Policy: Send + Sync {
    fn decide(&self, ctx: &AgentContext, truth: &GroundTruth) -> Result<String, PolicyError>;
    fn descriptor(&self) -> PolicyDescriptor;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn decide(&self, ctx: &AgentContext, truth: &GroundTruth) -> Result<String, PolicyError> {
        (**self).decide(ctx, truth)
    }

    fn descriptor(&self) -> PolicyDescriptor {
        (**self).descriptor()
    }
}

/// Textual policy selector as accepted on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PolicySpec {
    Oracle,
    Noisy { sigma_px: f64, p_wrong: f64, seed: u64 },
    Remote { url: String },
    RepeatSearch { frame: usize },
    InvalidJson,
    Pivot { seed: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad policy spec {spec:?}: {msg}")]
pub struct PolicySpecError {
    pub spec: String,
    pub msg: String,
}

impl FromStr for PolicySpec {
    type Err = PolicySpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| PolicySpecError {
            spec: s.to_string(),
            msg: msg.to_string(),
        };
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match (head, rest) {
            ("oracle", None) => Ok(PolicySpec::Oracle),
            ("invalid-json", None) => Ok(PolicySpec::InvalidJson),
            ("repeat-search", None) => Ok(PolicySpec::RepeatSearch { frame: 0 }),
            ("repeat-search", Some(r)) => r
                .parse()
                .map(|frame| PolicySpec::RepeatSearch { frame })
                .map_err(|_| err("frame must be a non-negative integer")),
            ("pivot", None) => Ok(PolicySpec::Pivot { seed: 0 }),
            ("pivot", Some(r)) => r
                .parse()
                .map(|seed| PolicySpec::Pivot { seed })
                .map_err(|_| err("seed must be an integer")),
            ("remote", Some(url)) if url.starts_with("http://") || url.starts_with("https://") => {
                Ok(PolicySpec::Remote { url: url.to_string() })
            }
            ("remote", _) => Err(err("expected remote:http://host:port/path")),
            ("noisy", Some(r)) => {
                let parts: Vec<&str> = r.split(',').collect();
                if !(2..=3).contains(&parts.len()) {
                    return Err(err("expected noisy:SIGMA,P[,SEED]"));
                }
                let sigma_px: f64 = parts[0].trim().parse().map_err(|_| err("sigma must be a number"))?;
                let p_wrong: f64 = parts[1].trim().parse().map_err(|_| err("p must be a number"))?;
                let seed = match parts.get(2) {
                    Some(t) => t.trim().parse().map_err(|_| err("seed must be an integer"))?,
                    None => 0,
                };
                if !(sigma_px >= 0.0 && sigma_px.is_finite()) {
                    return Err(err("sigma must be >= 0"));
                }
                if !(0.0..=1.0).contains(&p_wrong) {
                    return Err(err("p must lie in [0, 1]"));
                }
                Ok(PolicySpec::Noisy { sigma_px, p_wrong, seed })
            }
            _ => Err(err("unknown policy")),
        }
    }
}

impl std::fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicySpec::Oracle => write!(f, "oracle"),
            PolicySpec::Noisy { sigma_px, p_wrong, seed } => write!(f, "noisy:{sigma_px},{p_wrong},{seed}"),
            PolicySpec::Remote { url } => write!(f, "remote:{url}"),
            PolicySpec::RepeatSearch { frame } => write!(f, "repeat-search:{frame}"),
            PolicySpec::InvalidJson => write!(f, "invalid-json"),
            PolicySpec::Pivot { seed } => write!(f, "pivot:{seed}"),
        }
    }
}

impl From<PolicySpec> for String {
    fn from(p: PolicySpec) -> Self {
        p.to_string()
    }
}

impl TryFrom<String> for PolicySpec {
    type Error = PolicySpecError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl PolicySpec {
    /// Instantiates the policy. `remote` supplies timeout/retry settings for
    /// remote specs; its endpoint is replaced by the spec's URL.
    pub fn build(&self, remote: &RemotePolicyConfig) -> Box<dyn Policy> {
        match self {
            PolicySpec::Oracle => Box::new(OraclePolicy::default()),
            PolicySpec::Noisy { sigma_px, p_wrong, seed } => {
                Box::new(NoisyOracle::new(*sigma_px, *p_wrong, *seed))
            }
            PolicySpec::Remote { url } => {
                let mut cfg = remote.clone();
                cfg.endpoint = url.clone();
                Box::new(RemotePolicy::new(cfg))
            }
            PolicySpec::RepeatSearch { frame } => Box::new(RepeatSearchPolicy { frame: *frame }),
            PolicySpec::InvalidJson => Box::new(InvalidJsonPolicy),
            PolicySpec::Pivot { seed } => Box::new(PivotPolicy::new(PivotConfig::default(), *seed)),
        }
    }
}
