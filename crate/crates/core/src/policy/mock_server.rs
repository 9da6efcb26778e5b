use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "text")]
pub enum MockMode {
    /// Answers with the request's `oracle_hint`.
    EchoOracle,
    /// Answers every request with the same raw text.
    Fixed(String),
}

/// Canned behavior of the mock remote policy. Fault injection is keyed on
/// how many times the same request body has been seen, so retries of one
/// decision are deterministic regardless of concurrency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockConfig {
    pub mode: MockMode,
    /// Probability of answering 500 on any attempt.
    pub fail_rate: f64,
    /// Attempts per body answered with 500 before serving normally.
    pub fail_first: u32,
    /// Attempts per body delayed by `delay_ms` before answering.
    pub delay_first: u32,
    pub delay_ms: u64,
    pub seed: u64,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            mode: MockMode::EchoOracle,
            fail_rate: 0.0,
            fail_first: 0,
            delay_first: 0,
            delay_ms: 0,
            seed: 0,
        }
    }
}

struct Shared {
    cfg: MockConfig,
    seen: Mutex<HashMap<String, u32>>,
    served: Mutex<u64>,
}

impl Shared {
    fn roll(&self, digest: &str, attempt: u32) -> f64 {
        let mut h = Sha256::new();
        h.update(self.cfg.seed.to_le_bytes());
        h.update(digest.as_bytes());
        h.update(attempt.to_le_bytes());
        let d = h.finalize();
        (u64::from_le_bytes(d[..8].try_into().expect("8 bytes")) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn handle(&self, body: &str) -> (u16, String) {
        *self.served.lock().expect("counter") += 1;
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        let attempt = {
            let mut seen = self.seen.lock().expect("attempt map");
            let n = seen.entry(digest.clone()).or_insert(0);
            *n += 1;
            *n - 1
        };
        if attempt < self.cfg.delay_first && self.cfg.delay_ms > 0 {
            std::thread::sleep(Duration::from_millis(self.cfg.delay_ms));
        }
        if attempt < self.cfg.fail_first || self.roll(&digest, attempt) < self.cfg.fail_rate {
            return (500, json!({"error": "injected failure"}).to_string());
        }
        let raw = match &self.cfg.mode {
            MockMode::Fixed(t) => t.clone(),
            MockMode::EchoOracle => {
                let hint = serde_json::from_str::<Value>(body)
                    .ok()
                    .and_then(|v| v.get("oracle_hint").and_then(Value::as_str).map(str::to_string));
                match hint {
                    Some(h) => h,
                    None => return (400, json!({"error": "request has no oracle_hint"}).to_string()),
                }
            }
        };
        (200, json!({"raw_text": raw}).to_string())
    }
}

/// In-process HTTP server speaking the remote-policy protocol.
pub struct MockServer {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    shared: Arc<Shared>,
    accept: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and starts serving.
    pub fn start(addr: &str, cfg: MockConfig) -> std::io::Result<Self> {
        let server = Arc::new(tiny_http::Server::http(addr).map_err(std::io::Error::other)?);
        let bound = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("mock server is not on an IP socket"))?;
        let shared = Arc::new(Shared {
            cfg,
            seen: Mutex::new(HashMap::new()),
            served: Mutex::new(0),
        });
        let (srv, sh) = (server.clone(), shared.clone());
        let accept = std::thread::spawn(move || {
            for mut req in srv.incoming_requests() {
                let sh = sh.clone();
                std::thread::spawn(move || {
                    let mut body = String::new();
                    let (status, text) = if req.as_reader().read_to_string(&mut body).is_err() {
                        (400, json!({"error": "unreadable body"}).to_string())
                    } else {
                        sh.handle(&body)
                    };
                    let header = tiny_http::Header::from_bytes(&b"content-type"[..], &b"application/json"[..])
                        .expect("static header");
                    let resp = tiny_http::Response::from_string(text)
                        .with_status_code(status)
                        .with_header(header);
                    let _ = req.respond(resp);
                });
            }
        });
        Ok(Self {
            addr: bound,
            server,
            shared,
            accept: Some(accept),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}/decide", self.addr)
    }

    /// Requests received so far, including injected failures.
    pub fn requests_served(&self) -> u64 {
        *self.shared.served.lock().expect("counter")
    }

    /// Blocks until the server is shut down from another thread.
    pub fn join(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop();
    }
}
