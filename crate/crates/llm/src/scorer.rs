//! Surprisal scorers backed by processes or services outside this crate.
//!
//! The external protocol is one JSON object per request, `{"text": ...}`,
//! answered by `{"tokens": [...], "logprobs": [...]}` or `{"error": ...}`.
//! Over stdio each object is a single line.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use driftlab_core::surprisal::{ScoreError, Scorer, TokenScores};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::client::{EndpointConfig, HttpBackend};
use crate::mock::FixedScorer;
use crate::LlmError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScorerConfig {
    /// Echoed prompt log-probabilities from an OpenAI-style completions
    /// endpoint serving a causal model.
    Echo { endpoint: EndpointConfig },
    /// A service implementing the JSON protocol over HTTP POST.
    Http {
        url: String,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
    },
    /// A child process implementing the protocol on stdin/stdout.
    Stdio { command: Vec<String> },
    /// Constant log-probability per token, for dry runs.
    Fixed { logprob: f64 },
}

fn default_timeout() -> f64 {
    60.0
}

impl ScorerConfig {
    pub fn build(&self) -> Result<Box<dyn Scorer + Send + Sync>, LlmError> {
        Ok(match self {
            ScorerConfig::Echo { endpoint } => Box::new(EchoScorer::new(HttpBackend::new(endpoint.clone())?)),
            ScorerConfig::Http { url, timeout_secs } => Box::new(HttpScorer::new(url, *timeout_secs)?),
            ScorerConfig::Stdio { command } => Box::new(StdioScorer::spawn(command)?),
            ScorerConfig::Fixed { logprob } => Box::new(FixedScorer { logprob: *logprob }),
        })
    }
}

/// Parses a protocol reply.
pub fn parse_reply(v: &Value) -> Result<TokenScores, ScoreError> {
    if let Some(e) = v.get("error") {
        return Err(ScoreError::Rejected(e.as_str().map(str::to_string).unwrap_or_else(|| e.to_string())));
    }
    let scores: TokenScores =
        serde_json::from_value(v.clone()).map_err(|e| ScoreError::Rejected(format!("malformed reply: {e}")))?;
    if scores.tokens.len() != scores.logprobs.len() {
        return Err(ScoreError::Rejected("tokens and logprobs differ in length".into()));
    }
    if scores.logprobs.iter().any(|x| !x.is_finite() || *x > 0.0) {
        return Err(ScoreError::Rejected("log-probabilities must be finite and non-positive".into()));
    }
    Ok(scores)
}

fn transport_to_score(e: LlmError) -> ScoreError {
    match e {
        LlmError::Transport { .. } | LlmError::UnsupportedCapability(_) | LlmError::Io(_) => {
            ScoreError::Unavailable(e.to_string())
        }
        other => ScoreError::Rejected(other.to_string()),
    }
}

pub struct EchoScorer {
    backend: HttpBackend,
}

impl EchoScorer {
    pub fn new(backend: HttpBackend) -> Self {
        Self { backend }
    }
}

impl Scorer for EchoScorer {
    fn score(&self, text: &str) -> Result<TokenScores, ScoreError> {
        let pairs = self.backend.score_logprobs(text).map_err(transport_to_score)?;
        let (tokens, logprobs) = pairs.into_iter().unzip();
        Ok(TokenScores { tokens, logprobs })
    }
}

pub struct HttpScorer {
    url: String,
    http: reqwest::blocking::Client,
}

impl HttpScorer {
    pub fn new(url: &str, timeout_secs: f64) -> Result<Self, LlmError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(timeout_secs))
            .build()
            .map_err(|e| LlmError::Transport { attempts: 0, message: e.to_string() })?;
        Ok(Self { url: url.to_string(), http })
    }
}

impl Scorer for HttpScorer {
    fn score(&self, text: &str) -> Result<TokenScores, ScoreError> {
        let resp = self
            .http
            .post(&self.url)
            .json(&json!({ "text": text }))
            .send()
            .map_err(|e| ScoreError::Unavailable(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(ScoreError::Unavailable(format!("HTTP {status}")));
        }
        let v: Value = resp.json().map_err(|e| ScoreError::Rejected(format!("reply is not JSON: {e}")))?;
        if !status.is_success() && v.get("error").is_none() {
            return Err(ScoreError::Rejected(format!("HTTP {status}")));
        }
        parse_reply(&v)
    }
}

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Keeps one child process alive and talks to it a line at a time.
pub struct StdioScorer {
    pipe: Mutex<Option<Pipe>>,
}

impl StdioScorer {
    pub fn spawn(command: &[String]) -> Result<Self, LlmError> {
        let (prog, args) = command
            .split_first()
            .ok_or_else(|| LlmError::InvalidParams("stdio scorer command is empty".into()))?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| LlmError::Io(format!("cannot start {prog}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self { pipe: Mutex::new(Some(Pipe { child, stdin, stdout })) })
    }
}

impl Scorer for StdioScorer {
    fn score(&self, text: &str) -> Result<TokenScores, ScoreError> {
        let mut guard = self.pipe.lock().unwrap_or_else(|p| p.into_inner());
        let pipe = guard.as_mut().ok_or_else(|| ScoreError::Unavailable("scorer process has exited".into()))?;
        let mut line = json!({ "text": text }).to_string();
        line.push('\n');
        let mut reply = String::new();
        let io = pipe
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| pipe.stdin.flush())
            .and_then(|_| pipe.stdout.read_line(&mut reply));
        match io {
            Ok(n) if n > 0 => {}
            other => {
                let why = match other {
                    Err(e) => e.to_string(),
                    _ => "end of output".to_string(),
                };
                if let Some(mut p) = guard.take() {
                    let _ = p.child.kill();
                    let _ = p.child.wait();
                }
                return Err(ScoreError::Unavailable(format!("scorer process: {why}")));
            }
        }
        let v: Value =
            serde_json::from_str(reply.trim()).map_err(|e| ScoreError::Rejected(format!("reply is not JSON: {e}")))?;
        parse_reply(&v)
    }
}

impl Drop for StdioScorer {
    fn drop(&mut self) {
        let guard = self.pipe.get_mut().unwrap_or_else(|p| p.into_inner());
        if let Some(mut p) = guard.take() {
            drop(p.stdin);
            let _ = p.child.wait();
        }
    }
}
