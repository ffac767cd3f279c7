use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use driftlab_core::surprisal::{message_surprisal, ScoreError, Scorer};
use driftlab_core::{ChatHistory, Message, Role};
use driftlab_llm::client::complete;
use driftlab_llm::scorer::{EchoScorer, HttpScorer, ScorerConfig, StdioScorer};
use driftlab_llm::{ChatBackend, EndpointConfig, HttpBackend, LlmError, RequestMeta, SamplingParams};
use serde_json::{json, Value};

struct Seen {
    path: String,
    headers: Vec<String>,
    body: Value,
}

type Handler = dyn Fn(&Seen, usize) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server: one request per connection.
struct Stub {
    url: String,
    seen: Arc<Mutex<Vec<Seen>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<Seen> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let path = line.split_whitespace().nth(1)?.to_string();
    let mut headers = Vec::new();
    let mut len = 0usize;
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).ok()?;
        let h = h.trim_end().to_string();
        if h.is_empty() {
            break;
        }
        if let Some(v) = h.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().ok()?;
        }
        headers.push(h);
    }
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body).ok()?;
    Some(Seen { path, headers, body: serde_json::from_slice(&body).unwrap_or(Value::Null) })
}

impl Stub {
    fn start(handler: Box<Handler>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let seen: Arc<Mutex<Vec<Seen>>> = Arc::default();
        let log = Arc::clone(&seen);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { break };
                let Some(req) = read_request(&mut stream) else { continue };
                let n = log.lock().unwrap().len();
                let (status, body) = handler(&req, n);
                log.lock().unwrap().push(req);
                let resp = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(resp.as_bytes());
            }
        });
        Self { url, seen }
    }

    fn bodies(&self) -> Vec<Value> {
        self.seen.lock().unwrap().iter().map(|s| s.body.clone()).collect()
    }
}

fn chat_ok(text: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": text}}], "usage": {"prompt_tokens": 5, "completion_tokens": 2}})
        .to_string()
}

fn fast(url: &str) -> EndpointConfig {
    EndpointConfig { backoff_initial_ms: 1, max_retries_transport: 2, timeout_secs: 5.0, ..EndpointConfig::new(url, "test-model") }
}

fn tutor_history() -> ChatHistory {
    ChatHistory::new(Role::Tutor, "Eres profesor.").unwrap().append(Message::new(Role::Student, "Hola").unwrap()).unwrap()
}

fn meta(turn: u32) -> RequestMeta {
    RequestMeta { chat_id: "c".into(), turn, attempt: 0, speaker: Some(Role::Tutor) }
}

#[test]
fn student_opener_is_sent_as_user_to_the_tutor() {
    let stub = Stub::start(Box::new(|_, _| (200, chat_ok("¡Hola! ¿Cómo estás?"))));
    let backend = HttpBackend::new(fast(&stub.url)).unwrap();
    let r = complete(&backend, &tutor_history(), SamplingParams::default(), meta(1)).unwrap();
    assert_eq!(r.text, "¡Hola! ¿Cómo estás?");
    let body = &stub.bodies()[0];
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["messages"][0], json!({"role": "system", "content": "Eres profesor."}));
    assert_eq!(body["messages"][1], json!({"role": "user", "content": "Hola"}));
    assert_eq!(body["top_k"], 50);
    assert_eq!(stub.seen.lock().unwrap()[0].path, "/v1/chat/completions");
}

#[test]
fn rejected_extensions_are_dropped_once_and_for_all() {
    let stub = Stub::start(Box::new(|req, _| {
        if req.body.get("top_k").is_some() {
            (400, json!({"error": "unknown field top_k"}).to_string())
        } else {
            (200, chat_ok("Bien."))
        }
    }));
    let backend = HttpBackend::new(fast(&stub.url)).unwrap();
    let h = tutor_history();
    assert_eq!(complete(&backend, &h, SamplingParams::default(), meta(1)).unwrap().text, "Bien.");
    assert_eq!(complete(&backend, &h, SamplingParams::default(), meta(2)).unwrap().text, "Bien.");
    let bodies = stub.bodies();
    assert_eq!(bodies.len(), 3);
    assert!(bodies[0].get("min_p").is_some());
    for b in &bodies[1..] {
        assert!(b.get("top_k").is_none() && b.get("min_p").is_none() && b.get("repetition_penalty").is_none());
        assert_eq!(b["temperature"], 1.0);
    }
}

#[test]
fn unreachable_endpoint_fails_after_the_retry_limit() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let backend = HttpBackend::new(fast(&format!("http://127.0.0.1:{port}"))).unwrap();
    let err = complete(&backend, &tutor_history(), SamplingParams::default(), meta(1)).unwrap_err();
    assert!(matches!(err, LlmError::Transport { attempts: 3, .. }), "{err:?}");
}

#[test]
fn server_errors_are_retried() {
    let stub = Stub::start(Box::new(|_, n| if n < 2 { (503, "{}".into()) } else { (200, chat_ok("Vale.")) }));
    let backend = HttpBackend::new(fast(&stub.url)).unwrap();
    assert_eq!(complete(&backend, &tutor_history(), SamplingParams::default(), meta(1)).unwrap().text, "Vale.");
    assert_eq!(stub.bodies().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let stub = Stub::start(Box::new(|_, _| (404, "{}".into())));
    let backend = HttpBackend::new(fast(&stub.url)).unwrap();
    let err = complete(&backend, &tutor_history(), SamplingParams::default(), meta(1)).unwrap_err();
    assert!(matches!(err, LlmError::Http { status: 404, .. }));
    assert_eq!(stub.bodies().len(), 1);
}

#[test]
fn empty_completion_is_reported() {
    let stub = Stub::start(Box::new(|_, _| (200, chat_ok(""))));
    let backend = HttpBackend::new(fast(&stub.url)).unwrap();
    let req = driftlab_llm::ChatRequest::from_history(&tutor_history(), SamplingParams::default(), meta(1));
    assert_eq!(backend.complete(&req), Err(LlmError::EmptyCompletion));
}

#[test]
fn bearer_token_and_request_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("requests.jsonl");
    std::env::set_var("DRIFTLAB_TEST_TOKEN", "s3cret");
    let stub = Stub::start(Box::new(|_, _| (200, chat_ok("Sí."))));
    let cfg = EndpointConfig {
        auth_token_env: Some("DRIFTLAB_TEST_TOKEN".into()),
        request_log: Some(log.clone()),
        ..fast(&stub.url)
    };
    let backend = HttpBackend::new(cfg).unwrap();
    complete(&backend, &tutor_history(), SamplingParams::default(), meta(4)).unwrap();
    let headers = stub.seen.lock().unwrap()[0].headers.join("\n").to_ascii_lowercase();
    assert!(headers.contains("authorization: bearer s3cret"));
    let line: Value = serde_json::from_str(std::fs::read_to_string(&log).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(line["turn"], 4);
    assert_eq!(line["status"], 200);
}

#[test]
fn echo_logprobs_feed_surprisal() {
    let stub = Stub::start(Box::new(|req, _| {
        let prompt = req.body["prompt"].as_str().unwrap().to_string();
        let words: Vec<&str> = prompt.split_inclusive(' ').collect();
        let mut tokens = vec!["<s>".to_string()];
        let mut offsets = vec![0usize];
        let mut lps = vec![Value::Null];
        let mut off = 0;
        for w in words {
            tokens.push(w.to_string());
            offsets.push(off);
            lps.push(json!(-2.0));
            off += w.len();
        }
        tokens.push("X".into());
        offsets.push(prompt.len());
        lps.push(json!(-9.0));
        let body = json!({"choices": [{"text": prompt, "logprobs": {"tokens": tokens, "token_logprobs": lps, "text_offset": offsets}}]});
        (200, body.to_string())
    }));
    let backend = HttpBackend::new(fast(&stub.url)).unwrap();
    assert!(backend.score_logprobs("").unwrap().is_empty());
    let scorer = EchoScorer::new(backend);
    let s = message_surprisal("Hola amigo. ¿Qué tal estás hoy?", &scorer).unwrap();
    assert_eq!(s.sentences.len(), 2);
    assert!((s.value - 2.0).abs() < 1e-12, "{}", s.value);
    let body = &stub.bodies()[0];
    assert_eq!(body["echo"], true);
    assert_eq!(stub.seen.lock().unwrap()[0].path, "/v1/completions");
}

#[test]
fn http_scorer_protocol() {
    let stub = Stub::start(Box::new(|req, _| {
        let text = req.body["text"].as_str().unwrap();
        if text.contains("malo") {
            (422, json!({"error": "cannot score"}).to_string())
        } else {
            let toks: Vec<&str> = text.split_whitespace().collect();
            (200, json!({"tokens": toks, "logprobs": vec![-1.0; toks.len()]}).to_string())
        }
    }));
    let scorer = HttpScorer::new(&stub.url, 5.0).unwrap();
    assert_eq!(scorer.score("uno dos").unwrap().logprobs, vec![-1.0, -1.0]);
    assert!(matches!(scorer.score("algo malo"), Err(ScoreError::Rejected(_))));
    let s = message_surprisal("Esto es bueno. Esto es malo.", &scorer).unwrap();
    assert_eq!(s.skipped.len(), 1);
    assert_eq!(s.value, 1.0);
}

#[test]
fn stdio_scorer_protocol() {
    let script = r#"
import json, sys
for line in sys.stdin:
    text = json.loads(line)["text"]
    if "malo" in text:
        print(json.dumps({"error": "no"}), flush=True)
    else:
        toks = text.split()
        print(json.dumps({"tokens": toks, "logprobs": [-0.5] * len(toks)}), flush=True)
"#;
    let cfg = ScorerConfig::Stdio { command: vec!["python3".into(), "-c".into(), script.into()] };
    let scorer = cfg.build().unwrap();
    assert_eq!(scorer.score("a b c").unwrap().logprobs, vec![-0.5; 3]);
    assert!(matches!(scorer.score("malo"), Err(ScoreError::Rejected(_))));
    assert_eq!(scorer.score("otra vez").unwrap().tokens, vec!["otra", "vez"]);

    let dead = StdioScorer::spawn(&["true".to_string()]).unwrap();
    assert!(matches!(dead.score("hola"), Err(ScoreError::Unavailable(_))));
}
