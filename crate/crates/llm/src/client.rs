//! OpenAI-style chat-completion transport.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use driftlab_core::{ChatError, ChatHistory, Message, Role};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{LlmError, SamplingParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireMessage {
    pub role: WireRole,
    pub content: String,
}

/// Serializes a history from its owner's point of view: the owner's own
/// messages become `assistant`, the counterpart's become `user`.
pub fn to_wire(history: &ChatHistory) -> Vec<WireMessage> {
    history
        .messages()
        .iter()
        .map(|m| WireMessage {
            role: match m.role {
                Role::System => WireRole::System,
                r if r == history.owner() => WireRole::Assistant,
                _ => WireRole::User,
            },
            content: m.content.clone(),
        })
        .collect()
}

/// Inverse of [`to_wire`] for a known owner.
pub fn from_wire(owner: Role, wire: &[WireMessage]) -> Result<ChatHistory, ChatError> {
    let (first, rest) = wire.split_first().ok_or(ChatError::EmptyContent)?;
    if first.role != WireRole::System {
        return Err(ChatError::SystemMisplaced);
    }
    let mut h = ChatHistory::new(owner, first.content.clone())?;
    for m in rest {
        let role = match m.role {
            WireRole::System => return Err(ChatError::SystemMisplaced),
            WireRole::Assistant => owner,
            WireRole::User => owner.other(),
        };
        h.push(Message::new(role, m.content.clone())?)?;
    }
    Ok(h)
}

/// Bookkeeping that travels with a request but is never sent.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RequestMeta {
    pub chat_id: String,
    pub turn: u32,
    /// 0 for the first try, then one more per regeneration.
    pub attempt: u32,
    pub speaker: Option<Role>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<WireMessage>,
    pub params: SamplingParams,
    #[serde(skip)]
    pub meta: RequestMeta,
}

impl ChatRequest {
    pub fn from_history(history: &ChatHistory, params: SamplingParams, meta: RequestMeta) -> Self {
        Self { messages: to_wire(history), params, meta }
    }

    pub fn system_prompt(&self) -> Option<&str> {
        self.messages.first().filter(|m| m.role == WireRole::System).map(|m| m.content.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub logprobs: Option<Vec<f64>>,
    pub usage: Option<Usage>,
}

/// Anything that can produce one assistant message for a request.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<B> {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(req)
    }
}

/// Generates the next message of `history`'s owner.
pub fn complete<B: ChatBackend + ?Sized>(
    backend: &B,
    history: &ChatHistory,
    params: SamplingParams,
    meta: RequestMeta,
) -> Result<ChatResponse, LlmError> {
    backend.complete(&ChatRequest::from_history(history, params, meta))
}

fn default_timeout() -> f64 {
    120.0
}

fn default_retries() -> u32 {
    5
}

fn default_backoff_ms() -> u64 {
    500
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Server root, e.g. `http://localhost:8000`; `/v1/...` is appended.
    pub base_url: String,
    /// Model name sent in the request body.
    pub model_id: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries_transport: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_initial_ms: u64,
    /// Name of the environment variable holding a bearer token.
    #[serde(default)]
    pub auth_token_env: Option<String>,
    /// Send `top_k`, `min_p` and `repetition_penalty`, which are not part of
    /// the standard schema.
    #[serde(default = "default_true")]
    pub extensions: bool,
    /// Append one JSON line per HTTP exchange to this file.
    #[serde(default)]
    pub request_log: Option<PathBuf>,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model_id: model_id.into(),
            timeout_secs: default_timeout(),
            max_retries_transport: default_retries(),
            backoff_initial_ms: default_backoff_ms(),
            auth_token_env: None,
            extensions: true,
            request_log: None,
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(LlmError::InvalidParams("timeout_secs must be positive".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(LlmError::InvalidParams(format!("base_url {:?} is not an http(s) URL", self.base_url)));
        }
        Ok(())
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.base_url.trim_end_matches('/'), path.trim_start_matches('/'))
    }
}

const BACKOFF_CAP: Duration = Duration::from_secs(30);

/// Blocking HTTP client for one endpoint. Shareable across threads.
pub struct HttpBackend {
    cfg: EndpointConfig,
    http: reqwest::blocking::Client,
    token: Option<String>,
    extensions: AtomicBool,
    log: Option<Mutex<File>>,
}

enum Outcome {
    Ok(Value),
    /// 400/422: the server did not like the body.
    Rejected(u16, String),
}

impl HttpBackend {
    pub fn new(cfg: EndpointConfig) -> Result<Self, LlmError> {
        cfg.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| LlmError::Transport { attempts: 0, message: e.to_string() })?;
        let token = match &cfg.auth_token_env {
            Some(var) => match std::env::var(var) {
                Ok(t) if !t.is_empty() => Some(t),
                _ => {
                    tracing::warn!(var = var.as_str(), "auth token variable is unset; sending no token");
                    None
                }
            },
            None => None,
        };
        let log = match &cfg.request_log {
            Some(p) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|e| LlmError::Io(format!("{}: {e}", p.display())))?,
            )),
            None => None,
        };
        let extensions = AtomicBool::new(cfg.extensions);
        Ok(Self { cfg, http, token, extensions, log })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    fn log(&self, entry: Value) {
        if let Some(f) = &self.log {
            let mut f = f.lock().unwrap_or_else(|p| p.into_inner());
            let _ = writeln!(f, "{entry}");
        }
    }

    /// POSTs `body`, retrying connection failures, timeouts, 429 and 5xx with
    /// exponential backoff.
    fn post(&self, path: &str, body: &Value, meta: &RequestMeta) -> Result<Outcome, LlmError> {
        let url = self.cfg.url(path);
        let mut delay = Duration::from_millis(self.cfg.backoff_initial_ms);
        let attempts = self.cfg.max_retries_transport + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay = (delay * 2).min(BACKOFF_CAP);
            }
            let started = Instant::now();
            let mut req = self.http.post(&url).json(body);
            if let Some(t) = &self.token {
                req = req.bearer_auth(t);
            }
            let result = req.send();
            let elapsed_ms = started.elapsed().as_millis() as u64;
            let resp = match result {
                Ok(r) => r,
                Err(e) => {
                    last_error = e.to_string();
                    tracing::warn!(url = url.as_str(), attempt, error = %e, "request failed");
                    self.log(json!({"url": url, "chat_id": meta.chat_id, "turn": meta.turn, "attempt": meta.attempt,
                        "transport_attempt": attempt, "request": body, "error": last_error, "elapsed_ms": elapsed_ms}));
                    continue;
                }
            };
            let status = resp.status().as_u16();
            let text = resp.text().unwrap_or_default();
            self.log(json!({"url": url, "chat_id": meta.chat_id, "turn": meta.turn, "attempt": meta.attempt,
                "transport_attempt": attempt, "request": body, "status": status, "response": text, "elapsed_ms": elapsed_ms}));
            match status {
                200..=299 => {
                    return serde_json::from_str(&text)
                        .map(Outcome::Ok)
                        .map_err(|e| LlmError::Protocol(format!("response is not JSON: {e}")))
                }
                400 | 422 => return Ok(Outcome::Rejected(status, text)),
                429 | 500..=599 => {
                    last_error = format!("HTTP {status}: {}", truncate(&text, 200));
                    tracing::warn!(url = url.as_str(), attempt, status, "retryable status");
                }
                _ => return Err(LlmError::Http { status, body: truncate(&text, 500) }),
            }
        }
        Err(LlmError::Transport { attempts, message: last_error })
    }

    fn chat_body(&self, req: &ChatRequest, extensions: bool) -> Value {
        let p = &req.params;
        let mut body = json!({
            "model": self.cfg.model_id,
            "messages": req.messages,
            "temperature": p.temperature,
            "top_p": p.top_p,
        });
        if let Some(m) = p.max_tokens {
            body["max_tokens"] = json!(m);
        }
        if extensions {
            body["top_k"] = json!(p.top_k);
            body["min_p"] = json!(p.min_p);
            body["repetition_penalty"] = json!(p.repetition_penalty);
        }
        body
    }

    /// Echoed prompt log-probabilities from `/v1/completions`. Tokens without
    /// a log-probability (the first one) and special tokens are dropped.
    pub fn score_logprobs(&self, text: &str) -> Result<Vec<(String, f64)>, LlmError> {
        if text.trim().is_empty() {
            return Ok(Vec::new());
        }
        let body = json!({
            "model": self.cfg.model_id,
            "prompt": text,
            "echo": true,
            "logprobs": 1,
            "max_tokens": 1,
            "temperature": 0.0,
        });
        let meta = RequestMeta::default();
        let v = match self.post("v1/completions", &body, &meta)? {
            Outcome::Ok(v) => v,
            Outcome::Rejected(status, body) => {
                return Err(LlmError::UnsupportedCapability(format!("echo logprobs rejected (HTTP {status}): {}", truncate(&body, 200))))
            }
        };
        parse_echo_logprobs(&v, text.len())
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}…", &s[..i]),
        None => s.to_string(),
    }
}

fn is_special_token(t: &str) -> bool {
    (t.starts_with("<|") && t.ends_with("|>")) || matches!(t, "<s>" | "</s>" | "<bos>" | "<eos>" | "<pad>" | "[CLS]" | "[SEP]")
}

/// Extracts the prompt part of an echo response. With `text_offset` present
/// only tokens starting inside the prompt are kept; otherwise the single
/// generated token at the end is dropped.
pub fn parse_echo_logprobs(v: &Value, prompt_len: usize) -> Result<Vec<(String, f64)>, LlmError> {
    let lp = v
        .pointer("/choices/0/logprobs")
        .ok_or_else(|| LlmError::UnsupportedCapability("response carries no logprobs".into()))?;
    let tokens = lp
        .get("tokens")
        .and_then(Value::as_array)
        .ok_or_else(|| LlmError::Protocol("logprobs.tokens missing".into()))?;
    let values = lp
        .get("token_logprobs")
        .and_then(Value::as_array)
        .ok_or_else(|| LlmError::Protocol("logprobs.token_logprobs missing".into()))?;
    if tokens.len() != values.len() {
        return Err(LlmError::Protocol("tokens and token_logprobs differ in length".into()));
    }
    let offsets = lp.get("text_offset").and_then(Value::as_array);
    let keep = match offsets {
        Some(o) => o.iter().take_while(|x| x.as_u64().is_some_and(|x| (x as usize) < prompt_len)).count(),
        None => tokens.len().saturating_sub(1),
    };
    let mut out = Vec::new();
    for (t, x) in tokens.iter().zip(values).take(keep) {
        let t = t.as_str().unwrap_or_default();
        let Some(x) = x.as_f64() else { continue };
        if is_special_token(t) {
            continue;
        }
        out.push((t.to_string(), x));
    }
    Ok(out)
}

impl ChatBackend for HttpBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let with_ext = self.extensions.load(Ordering::Relaxed);
        let mut outcome = self.post("v1/chat/completions", &self.chat_body(req, with_ext), &req.meta)?;
        if let (Outcome::Rejected(status, _), true) = (&outcome, with_ext) {
            tracing::warn!(status, "server rejected sampling extensions; dropping top_k, min_p and repetition_penalty");
            self.extensions.store(false, Ordering::Relaxed);
            outcome = self.post("v1/chat/completions", &self.chat_body(req, false), &req.meta)?;
        }
        let v = match outcome {
            Outcome::Ok(v) => v,
            Outcome::Rejected(status, body) => return Err(LlmError::Http { status, body: truncate(&body, 500) }),
        };
        parse_chat_response(&v)
    }
}

pub fn parse_chat_response(v: &Value) -> Result<ChatResponse, LlmError> {
    let choice = v.pointer("/choices/0").ok_or_else(|| LlmError::Protocol("no choices in response".into()))?;
    let text = match choice.pointer("/message/content") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Null) | None => String::new(),
        Some(other) => return Err(LlmError::Protocol(format!("message.content is not a string: {other}"))),
    };
    if text.trim().is_empty() {
        return Err(LlmError::EmptyCompletion);
    }
    let logprobs = choice
        .pointer("/logprobs/content")
        .and_then(Value::as_array)
        .map(|items| items.iter().filter_map(|i| i.get("logprob").and_then(Value::as_f64)).collect());
    let usage = v.get("usage").map(|u| Usage {
        prompt_tokens: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: u.get("completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    });
    Ok(ChatResponse { text, logprobs, usage })
}
