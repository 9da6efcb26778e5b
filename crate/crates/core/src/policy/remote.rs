use super::{OraclePolicy, Policy, PolicyDescriptor, PolicyError};
use crate::agent::{AgentContext, GroundTruth, ACTION_SCHEMA_DOC};
use crate::canonical;
use crate::sim::Observation;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::time::Duration;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadMode {
    #[default]
    Structured,
    /// Also sends the ego depth raster as a base64 netpbm image.
    StructuredRaster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemotePolicyConfig {
    pub endpoint: String,
    pub timeout_s: f64,
    pub retries: u32,
    pub payload: PayloadMode,
    /// Attach the in-process oracle's answer as `oracle_hint`. Only for
    /// protocol tests against the echo mock.
    pub oracle_hint: bool,
    pub retry_backoff_ms: u64,
}

impl Default for RemotePolicyConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            timeout_s: 60.0,
            retries: 2,
            payload: PayloadMode::Structured,
            oracle_hint: false,
            retry_backoff_ms: 20,
        }
    }
}

fn entities(obs: &Observation) -> Value {
    Value::Array(
        obs.entities
            .iter()
            .map(|e| json!({"label": e.label, "bbox_norm": e.bbox_norm, "depth_m": e.depth_m}))
            .collect(),
    )
}

/// Request body for one decision.
pub fn build_request(ctx: &AgentContext, payload: PayloadMode, oracle_hint: Option<&str>) -> String {
    let frames: Vec<Value> = ctx
        .pose_frames
        .frames
        .iter()
        .map(|f| json!({"index": f.index, "provenance_hidden": true, "entities": entities(&f.observation)}))
        .collect();
    let mut ego = json!({"entities": entities(ctx.ego)});
    if payload == PayloadMode::StructuredRaster {
        let ppm = ctx.ego.depth.to_ppm();
        ego["raster"] = Value::String(base64::engine::general_purpose::STANDARD.encode(ppm));
    }
    let mut body = json!({
        "protocol_version": PROTOCOL_VERSION,
        "instruction": ctx.instruction,
        "history": ctx.history,
        "step": ctx.step,
        "pose_frames": frames,
        "ego_frame": ego,
        "action_schema_doc": ACTION_SCHEMA_DOC,
    });
    if let Some(h) = oracle_hint {
        body["oracle_hint"] = Value::String(h.to_string());
    }
    canonical::value_to_string(&body)
}

/// A model served over HTTP: one POST per decision, JSON `{raw_text}` back.
#[derive(Debug, Clone)]
pub struct RemotePolicy {
    pub config: RemotePolicyConfig,
    agent: ureq::Agent,
}

enum Attempt {
    Retry(PolicyError),
    Fatal(PolicyError),
}

impl RemotePolicy {
    pub fn new(config: RemotePolicyConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_s.max(1e-3))))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    fn attempt(&self, body: &str) -> Result<String, Attempt> {
        let resp = self
            .agent
            .post(&self.config.endpoint)
            .header("content-type", "application/json")
            .send(body);
        let mut resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(Attempt::Retry(PolicyError::Timeout)),
            Err(e) => return Err(Attempt::Retry(PolicyError::Transport(e.to_string()))),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => return Err(Attempt::Retry(PolicyError::Timeout)),
            Err(e) => return Err(Attempt::Retry(PolicyError::Transport(e.to_string()))),
        };
        if status >= 500 {
            return Err(Attempt::Retry(PolicyError::Transport(format!("HTTP {status}"))));
        }
        if status >= 400 {
            return Err(Attempt::Fatal(PolicyError::Transport(format!("HTTP {status}: {text}"))));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| Attempt::Fatal(PolicyError::BadResponse(e.to_string())))?;
        v.get("raw_text")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Attempt::Fatal(PolicyError::BadResponse("missing raw_text".into())))
    }

    /// Sends a prepared body with the configured retry policy.
    pub fn send(&self, body: &str) -> Result<String, PolicyError> {
        let mut last = PolicyError::Transport("no attempt made".into());
        for k in 0..=self.config.retries {
            if k > 0 && self.config.retry_backoff_ms > 0 {
                std::thread::sleep(Duration::from_millis(self.config.retry_backoff_ms * k as u64));
            }
            match self.attempt(body) {
                Ok(t) => return Ok(t),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => last = e,
            }
        }
        Err(last)
    }
}

impl Policy for RemotePolicy {
    fn decide(&self, ctx: &AgentContext, truth: &GroundTruth) -> Result<String, PolicyError> {
        let hint = if self.config.oracle_hint {
            Some(OraclePolicy::default().decide(ctx, truth)?)
        } else {
            None
        };
        self.send(&build_request(ctx, self.config.payload, hint.as_deref()))
    }

    fn descriptor(&self) -> PolicyDescriptor {
        PolicyDescriptor::new("remote", &self.config)
    }
}
