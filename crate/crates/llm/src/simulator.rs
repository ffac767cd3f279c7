//! Teacher–student dialogue simulation.
//!
//! Each dialogue keeps two histories, one per participant, holding the same
//! messages under different system prompts. The student opens with a fixed
//! greeting (round 0); every following round is a tutor reply and, except
//! after the last round, a student reply. Tutor replies pass through the
//! language gate and are regenerated when they contain banned-language
//! sentences.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use driftlab_core::langdetect::{default_banned, language_gate};
use driftlab_core::{ChatError, ChatHistory, LangVerdict, Language, Level, Message, PromptSet, Role, Transcript, TranscriptEntry};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::client::{ChatBackend, ChatRequest, RequestMeta};
use crate::persist::{sha256_hex, write_atomic};
use crate::{LlmError, SamplingParams};

fn default_chats() -> u32 {
    10
}

fn default_rounds() -> u32 {
    9
}

fn default_opener() -> String {
    "Hola".to_string()
}

fn default_regens() -> u32 {
    5
}

/// One model × level cell of a simulation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub model_id: String,
    pub level: Level,
    #[serde(default = "default_chats")]
    pub n_chats: u32,
    #[serde(default = "default_rounds")]
    pub rounds: u32,
    #[serde(default = "default_opener")]
    pub opener: String,
    #[serde(default = "default_banned")]
    pub banned_languages: BTreeSet<Language>,
    #[serde(default = "default_regens")]
    pub max_regens: u32,
    #[serde(default)]
    pub params: SamplingParams,
}

impl SimulationConfig {
    pub fn new(model_id: impl Into<String>, level: Level) -> Self {
        Self {
            model_id: model_id.into(),
            level,
            n_chats: default_chats(),
            rounds: default_rounds(),
            opener: default_opener(),
            banned_languages: default_banned(),
            max_regens: default_regens(),
            params: SamplingParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.model_id.trim().is_empty() || self.model_id.contains(['/', '\\', ':']) {
            return bad(format!("model_id {:?} must be non-empty and free of '/', '\\' and ':'", self.model_id));
        }
        if self.n_chats == 0 {
            return bad("n_chats must be at least 1".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.opener.trim().is_empty() {
            return bad("opener must not be empty".into());
        }
        self.params.validate().map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn chat_id(&self, idx: u32) -> String {
        format!("{}-{}-{idx:03}", self.model_id, self.level)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{chat_id}: tutor turn {turn} failed after {attempts} attempts")]
    RegenExhausted { chat_id: String, turn: u32, attempts: u32, partial: Box<Transcript> },
    #[error("{chat_id}: backend error at turn {turn}: {source}")]
    Backend {
        chat_id: String,
        turn: u32,
        #[source]
        source: LlmError,
        partial: Box<Transcript>,
    },
    #[error(transparent)]
    Chat(#[from] ChatError),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl SimError {
    /// The dialogue up to the failure, when there is one.
    pub fn partial(&self) -> Option<&Transcript> {
        match self {
            SimError::RegenExhausted { partial, .. } | SimError::Backend { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Hooks into a running dialogue. All methods default to doing nothing.
pub trait DialogueObserver {
    /// Called after each completed round with both histories.
    fn on_round(&mut self, _round: u32, _tutor: &ChatHistory, _student: &ChatHistory) {}
    /// Called when a tutor reply is rejected and will be regenerated.
    fn on_regen(&mut self, _turn: u32, _attempt: u32, _verdicts: &[LangVerdict]) {}
}

impl DialogueObserver for () {}

struct Dialogue<'a> {
    cfg: &'a SimulationConfig,
    chat_id: &'a str,
    tutor: ChatHistory,
    student: ChatHistory,
    transcript: Transcript,
}

impl Dialogue<'_> {
    fn push(&mut self, turn: u32, msg: Message, verdicts: Vec<LangVerdict>) -> Result<(), ChatError> {
        self.tutor.push(msg.clone())?;
        self.student.push(msg.clone())?;
        self.transcript.entries.push(TranscriptEntry { turn_index: turn, message: msg, gate_verdicts: verdicts });
        Ok(())
    }

    fn backend_error(&self, turn: u32, source: LlmError) -> SimError {
        SimError::Backend { chat_id: self.chat_id.into(), turn, source, partial: Box::new(self.transcript.clone()) }
    }

    /// Requests a message from `speaker`, regenerating on empty completions
    /// and, for the tutor, on gate failures.
    fn generate(
        &self,
        backend: &dyn ChatBackend,
        speaker: Role,
        turn: u32,
        observer: &mut dyn DialogueObserver,
    ) -> Result<(Message, Vec<LangVerdict>), SimError> {
        let history = if speaker == Role::Tutor { &self.tutor } else { &self.student };
        for attempt in 0..=self.cfg.max_regens {
            let meta = RequestMeta { chat_id: self.chat_id.to_string(), turn, attempt, speaker: Some(speaker) };
            let req = ChatRequest::from_history(history, self.cfg.params, meta);
            let text = match backend.complete(&req) {
                Ok(r) => r.text.trim().to_string(),
                Err(LlmError::EmptyCompletion) => String::new(),
                Err(e) => return Err(self.backend_error(turn, e)),
            };
            if text.is_empty() {
                tracing::warn!(chat_id = self.chat_id, turn, attempt, %speaker, "empty completion; regenerating");
                observer.on_regen(turn, attempt, &[]);
                continue;
            }
            let verdicts = if speaker == Role::Tutor {
                let (ok, verdicts) = language_gate(&text, &self.cfg.banned_languages);
                if !ok {
                    tracing::info!(chat_id = self.chat_id, turn, attempt, "tutor reply failed the language gate");
                    observer.on_regen(turn, attempt, &verdicts);
                    continue;
                }
                verdicts
            } else {
                Vec::new()
            };
            return Ok((Message::with_retries(speaker, text, attempt)?, verdicts));
        }
        Err(SimError::RegenExhausted {
            chat_id: self.chat_id.into(),
            turn,
            attempts: self.cfg.max_regens + 1,
            partial: Box::new(self.transcript.clone()),
        })
    }
}

/// Runs one dialogue to completion.
pub fn run_dialogue(
    cfg: &SimulationConfig,
    chat_id: &str,
    backend: &dyn ChatBackend,
    prompts: &PromptSet,
    observer: &mut dyn DialogueObserver,
) -> Result<Transcript, SimError> {
    cfg.validate()?;
    let mut d = Dialogue {
        cfg,
        chat_id,
        tutor: ChatHistory::new(Role::Tutor, prompts.render_tutor_prompt(cfg.level)?)?,
        student: ChatHistory::new(Role::Student, prompts.student_prompt())?,
        transcript: Transcript {
            chat_id: chat_id.to_string(),
            model_id: cfg.model_id.clone(),
            level: cfg.level,
            opener: cfg.opener.clone(),
            entries: Vec::new(),
            created_at: chrono::Utc::now().to_rfc3339(),
            config_fingerprint: String::new(),
        },
    };
    d.push(0, Message::new(Role::Student, cfg.opener.clone())?, Vec::new())?;
    for round in 1..=cfg.rounds {
        let (msg, verdicts) = d.generate(backend, Role::Tutor, round, observer)?;
        d.push(round, msg, verdicts)?;
        if round < cfg.rounds {
            let (msg, _) = d.generate(backend, Role::Student, round, observer)?;
            d.push(round, msg, Vec::new())?;
        }
        observer.on_round(round, &d.tutor, &d.student);
    }
    Ok(d.transcript)
}

/// One line of a transcript file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub chat_id: String,
    pub model_id: String,
    pub level: Level,
    pub turn_index: u32,
    pub role: Role,
    pub content: String,
    pub retries: u32,
    #[serde(default)]
    pub gate_verdicts: Vec<LangVerdict>,
}

pub fn transcript_to_jsonl(t: &Transcript) -> String {
    let mut out = String::new();
    for e in &t.entries {
        let rec = TranscriptRecord {
            chat_id: t.chat_id.clone(),
            model_id: t.model_id.clone(),
            level: t.level,
            turn_index: e.turn_index,
            role: e.message.role,
            content: e.message.content.clone(),
            retries: e.message.retries,
            gate_verdicts: e.gate_verdicts.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("transcript has no records")]
    Empty,
}

/// Parses a transcript file. The opener is taken from the first record;
/// creation time and fingerprint live in the run manifest and are left empty.
pub fn transcript_from_jsonl(src: &str) -> Result<Transcript, TranscriptParseError> {
    let mut t: Option<Transcript> = None;
    for (i, line) in src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let err = |message: String| TranscriptParseError::Line { line: i + 1, message };
        let rec: TranscriptRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let t = t.get_or_insert_with(|| Transcript {
            chat_id: rec.chat_id.clone(),
            model_id: rec.model_id.clone(),
            level: rec.level,
            opener: rec.content.clone(),
            entries: Vec::new(),
            created_at: String::new(),
            config_fingerprint: String::new(),
        });
        if rec.chat_id != t.chat_id {
            return Err(err(format!("chat_id {} differs from {}", rec.chat_id, t.chat_id)));
        }
        let message = Message::with_retries(rec.role, rec.content, rec.retries).map_err(|e| err(e.to_string()))?;
        t.entries.push(TranscriptEntry { turn_index: rec.turn_index, message, gate_verdicts: rec.gate_verdicts });
    }
    t.ok_or(TranscriptParseError::Empty)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub chat_id: String,
    pub model_id: String,
    pub level: Level,
    pub turn: Option<u32>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub configs: Vec<SimulationConfig>,
    pub started_at: String,
    pub finished_at: String,
    pub completed: Vec<String>,
    pub failures: Vec<FailureRecord>,
    pub tool_version: String,
    pub config_fingerprint: String,
}

#[derive(Debug, Clone, Default)]
pub struct CampaignOptions {
    /// Worker threads; 0 means one per available CPU.
    pub parallelism: usize,
    /// Where transcripts and the manifest go. Nothing is written if unset.
    pub out_dir: Option<PathBuf>,
    /// Re-run chats whose transcript already exists instead of loading it.
    pub force: bool,
    /// Extra settings that shape the requests, such as backend endpoints,
    /// folded into the fingerprint.
    pub fingerprint_extra: Option<serde_json::Value>,
}

#[derive(Debug)]
pub struct CampaignResult {
    /// Completed transcripts in configuration order.
    pub transcripts: Vec<Transcript>,
    pub manifest: RunManifest,
}

/// Hash of everything that determines a campaign's requests: configurations,
/// the rendered system prompts and any caller-supplied extras.
pub fn config_fingerprint(
    configs: &[SimulationConfig],
    prompts: &PromptSet,
    extra: Option<&serde_json::Value>,
) -> Result<String, ChatError> {
    let levels: BTreeSet<Level> = configs.iter().map(|c| c.level).collect();
    let mut tutor = serde_json::Map::new();
    for l in levels {
        tutor.insert(l.to_string(), json!(prompts.render_tutor_prompt(l)?));
    }
    let doc = json!({
        "configs": configs,
        "tutor_prompts": tutor,
        "student_prompt": prompts.student_prompt(),
        "extra": extra,
    });
    Ok(sha256_hex(doc.to_string().as_bytes()))
}

pub fn transcript_path(out_dir: &Path, chat_id: &str) -> PathBuf {
    out_dir.join("transcripts").join(format!("{chat_id}.jsonl"))
}

pub fn failed_path(out_dir: &Path, chat_id: &str) -> PathBuf {
    out_dir.join("transcripts").join(format!("{chat_id}.failed.jsonl"))
}

fn io_err(p: &Path, e: std::io::Error) -> SimError {
    SimError::Io(format!("{}: {e}", p.display()))
}

/// Runs every chat of every configuration, each configuration against its
/// own backend. Chat failures are recorded in the manifest and do not stop
/// the campaign.
pub fn run_campaign(
    jobs: &[(SimulationConfig, &dyn ChatBackend)],
    prompts: &PromptSet,
    opts: &CampaignOptions,
) -> Result<CampaignResult, SimError> {
    let configs: Vec<SimulationConfig> = jobs.iter().map(|(c, _)| c.clone()).collect();
    for c in &configs {
        c.validate()?;
    }
    let mut seen = BTreeSet::new();
    for c in &configs {
        if !seen.insert((c.model_id.clone(), c.level)) {
            return Err(SimError::Config(format!("{} / {} configured twice", c.model_id, c.level)));
        }
    }
    let fingerprint = config_fingerprint(&configs, prompts, opts.fingerprint_extra.as_ref())?;
    let started_at = chrono::Utc::now().to_rfc3339();

    let work: Vec<(usize, u32)> = jobs.iter().enumerate().flat_map(|(j, (c, _))| (0..c.n_chats).map(move |i| (j, i))).collect();
    let results: Mutex<Vec<Option<Result<Transcript, SimError>>>> = Mutex::new((0..work.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let threads = match opts.parallelism {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(work.len().max(1));

    let run_one = |(j, idx): (usize, u32)| -> Result<Transcript, SimError> {
        let (cfg, backend) = &jobs[j];
        let chat_id = cfg.chat_id(idx);
        if let (Some(dir), false) = (&opts.out_dir, opts.force) {
            let p = transcript_path(dir, &chat_id);
            if p.exists() {
                let src = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
                let mut t = transcript_from_jsonl(&src).map_err(|e| SimError::Io(format!("{}: {e}", p.display())))?;
                if t.check_complete(cfg.rounds).is_ok() {
                    tracing::info!(chat_id = chat_id.as_str(), "transcript exists; skipping");
                    t.config_fingerprint = fingerprint.clone();
                    return Ok(t);
                }
            }
        }
        let result = run_dialogue(cfg, &chat_id, *backend, prompts, &mut ());
        if let Some(dir) = &opts.out_dir {
            match &result {
                Ok(t) => {
                    let p = transcript_path(dir, &chat_id);
                    write_atomic(&p, transcript_to_jsonl(t).as_bytes()).map_err(|e| io_err(&p, e))?;
                    let _ = fs::remove_file(failed_path(dir, &chat_id));
                }
                Err(e) => {
                    if let Some(partial) = e.partial() {
                        let p = failed_path(dir, &chat_id);
                        write_atomic(&p, transcript_to_jsonl(partial).as_bytes()).map_err(|e| io_err(&p, e))?;
                    }
                }
            }
        }
        result.map(|mut t| {
            t.config_fingerprint = fingerprint.clone();
            t
        })
    };

    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&item) = work.get(k) else { break };
                let r = run_one(item);
                results.lock().unwrap_or_else(|p| p.into_inner())[k] = Some(r);
            });
        }
    });

    let mut transcripts = Vec::new();
    let mut failures = Vec::new();
    for (k, r) in results.into_inner().unwrap_or_else(|p| p.into_inner()).into_iter().enumerate() {
        let (j, idx) = work[k];
        let cfg = &jobs[j].0;
        match r.expect("every work item ran") {
            Ok(t) => transcripts.push(t),
            Err(SimError::Io(m)) => return Err(SimError::Io(m)),
            Err(e) => {
                tracing::error!(error = %e, "chat failed");
                let turn = match &e {
                    SimError::RegenExhausted { turn, .. } | SimError::Backend { turn, .. } => Some(*turn),
                    _ => None,
                };
                failures.push(FailureRecord {
                    chat_id: cfg.chat_id(idx),
                    model_id: cfg.model_id.clone(),
                    level: cfg.level,
                    turn,
                    error: e.to_string(),
                });
            }
        }
    }
    let manifest = RunManifest {
        configs,
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        completed: transcripts.iter().map(|t| t.chat_id.clone()).collect(),
        failures,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_fingerprint: fingerprint,
    };
    if let Some(dir) = &opts.out_dir {
        let p = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomic(&p, body.as_bytes()).map_err(|e| io_err(&p, e))?;
    }
    Ok(CampaignResult { transcripts, manifest })
}

/// Loads every `*.jsonl` transcript under `dir`, skipping `.failed.jsonl`
/// files, sorted by chat id.
pub fn load_transcripts(dir: &Path) -> Result<Vec<Transcript>, SimError> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    for entry in entries {
        let p = entry.map_err(|e| io_err(dir, e))?.path();
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if !name.ends_with(".jsonl") || name.ends_with(".failed.jsonl") {
            continue;
        }
        let src = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        out.push(transcript_from_jsonl(&src).map_err(|e| SimError::Io(format!("{}: {e}", p.display())))?);
    }
    out.sort_by(|a, b| a.chat_id.cmp(&b.chat_id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mock::{CannedBackend, ScriptedBackend, Step, UnreachableBackend};

    fn cfg(level: Level) -> SimulationConfig {
        SimulationConfig { n_chats: 2, ..SimulationConfig::new("mock", level) }
    }

    #[test]
    fn dialogue_shape() {
        let t = run_dialogue(&cfg(Level::A1), "c", &CannedBackend::new(1), &PromptSet::default(), &mut ()).unwrap();
        t.check_complete(9).unwrap();
        assert_eq!(t.entries.len(), 18);
        assert_eq!(t.entries[0].message.content, "Hola");
        let turns: Vec<u32> = t.tutor_messages().map(|e| e.turn_index).collect();
        assert_eq!(turns, (1..=9).collect::<Vec<_>>());
    }

    #[test]
    fn english_reply_is_regenerated_once() {
        let b = ScriptedBackend::new();
        b.reply("c", Role::Tutor, 3, "Sorry, I will switch to English now because it is easier.");
        let t = run_dialogue(&cfg(Level::B1), "c", &b, &PromptSet::default(), &mut ()).unwrap();
        let retries: Vec<u32> = t.tutor_messages().map(|e| e.message.retries).collect();
        assert_eq!(retries, vec![0, 0, 1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(t.total_retries(), 1);
    }

    #[test]
    fn persistent_failure_exhausts_regens() {
        let b = ScriptedBackend::new();
        for _ in 0..6 {
            b.push("c", Role::Tutor, 2, Step::Fail(LlmError::EmptyCompletion));
        }
        let err = run_dialogue(&cfg(Level::C1), "c", &b, &PromptSet::default(), &mut ()).unwrap_err();
        match &err {
            SimError::RegenExhausted { turn, attempts, partial, .. } => {
                assert_eq!((*turn, *attempts), (2, 6));
                assert_eq!(partial.entries.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let t = run_dialogue(&cfg(Level::A1), "c", &CannedBackend::new(3), &PromptSet::default(), &mut ()).unwrap();
        let src = transcript_to_jsonl(&t);
        let back = transcript_from_jsonl(&src).unwrap();
        assert_eq!(back.entries, t.entries);
        assert_eq!(transcript_to_jsonl(&back), src);
    }

    #[test]
    fn campaign_records_failures_and_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let canned = CannedBackend::new(0);
        let down = UnreachableBackend;
        let jobs: Vec<(SimulationConfig, &dyn ChatBackend)> = vec![(cfg(Level::A1), &canned), (cfg(Level::C1), &down)];
        let opts = CampaignOptions { parallelism: 3, out_dir: Some(dir.path().into()), ..Default::default() };
        let r = run_campaign(&jobs, &PromptSet::default(), &opts).unwrap();
        assert_eq!(r.transcripts.len(), 2);
        assert_eq!(r.manifest.failures.len(), 2);
        assert_eq!(r.manifest.config_fingerprint.len(), 64);
        assert!(transcript_path(dir.path(), "mock-A1-001").exists());
        assert!(failed_path(dir.path(), "mock-C1-000").exists());
        assert!(dir.path().join("manifest.json").exists());
        assert_eq!(load_transcripts(&dir.path().join("transcripts")).unwrap().len(), 2);
    }

    #[test]
    fn config_validation() {
        assert!(SimulationConfig { rounds: 0, ..cfg(Level::A1) }.validate().is_err());
        assert!(SimulationConfig { model_id: "a/b".into(), ..cfg(Level::A1) }.validate().is_err());
        assert_eq!(cfg(Level::B1).chat_id(7), "mock-B1-007");
    }
}
