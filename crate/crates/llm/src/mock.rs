//! Offline backends for tests, demos and dry runs.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use driftlab_core::surprisal::{ScoreError, Scorer, TokenScores};
use driftlab_core::{Level, Role};
use sha2::{Digest, Sha256};

use crate::client::{ChatBackend, ChatRequest, ChatResponse};
use crate::LlmError;

const TUTOR_A1: &[&str] = &[
    "¡Hola! Me llamo Ana.",
    "¿Cómo te llamas?",
    "Yo vivo en Madrid.",
    "¿Dónde vives tú?",
    "Me gusta el café.",
    "¿Qué comes hoy?",
    "Mi casa es pequeña.",
    "¿Tienes un perro?",
    "Hoy hace sol.",
    "¿Te gusta leer?",
    "Muy bien, gracias.",
    "Yo tengo dos hermanos.",
];

const TUTOR_B1: &[&str] = &[
    "Me parece muy interesante lo que cuentas sobre tu trabajo.",
    "¿Qué sueles hacer los fines de semana cuando tienes tiempo libre?",
    "El verano pasado viajé a la costa con mi familia y lo pasamos muy bien.",
    "¿Has visitado alguna vez un país de habla hispana?",
    "Cuando era niña, me encantaba ir al mercado con mi abuela.",
    "¿Qué planes tienes para las próximas vacaciones?",
    "Creo que aprender un idioma requiere paciencia y práctica diaria.",
    "¿Podrías describirme cómo es un día normal para ti?",
    "A mí también me gusta cocinar, aunque no siempre tengo tiempo.",
    "¿Por qué decidiste estudiar español?",
];

const TUTOR_C1: &[&str] = &[
    "Resulta fascinante comprobar cómo las transformaciones tecnológicas han modificado profundamente nuestras costumbres cotidianas.",
    "¿Consideras que la globalización contribuye a homogeneizar las identidades culturales o, por el contrario, favorece su diversificación?",
    "Desde una perspectiva sociolingüística, la coexistencia de variedades dialectales enriquece extraordinariamente el patrimonio comunicativo de una comunidad.",
    "No obstante, convendría matizar que las políticas educativas desempeñan un papel determinante en la preservación de las lenguas minoritarias.",
    "¿Hasta qué punto crees que la literatura contemporánea refleja las preocupaciones existenciales de las generaciones más jóvenes?",
    "La interpretación de los acontecimientos históricos depende considerablemente del marco ideológico desde el que se examinan.",
    "¿Qué argumentos esgrimirías para defender la necesidad de una regulación internacional de la inteligencia artificial?",
    "Indudablemente, la sostenibilidad medioambiental constituye uno de los desafíos más apremiantes de nuestra época.",
];

const STUDENT: &[&str] = &[
    "Me llamo Pablo y vivo en una ciudad pequeña.",
    "Sí, me gusta mucho.",
    "No sé, creo que sí.",
    "Los fines de semana juego al fútbol con mis amigos.",
    "Estudio español porque quiero viajar a México.",
    "Mi comida favorita es la pizza.",
    "Tengo un gato que se llama Luna.",
    "Ayer fui al cine con mi hermana.",
    "Es difícil, pero me gusta aprender.",
    "Trabajo en una oficina en el centro.",
];

fn digest(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

/// Guesses the prompted level from the level word in a tutor system prompt.
pub fn level_from_prompt(system: &str) -> Option<Level> {
    let s = system.to_lowercase();
    if s.contains("beginner") {
        Some(Level::A1)
    } else if s.contains("intermediate") {
        Some(Level::B1)
    } else if s.contains("advanced") {
        Some(Level::C1)
    } else {
        None
    }
}

/// Deterministic replies drawn from fixed Spanish pools. Tutor replies get
/// longer and more complex with the prompted level; the choice depends only
/// on the seed, chat id, turn, attempt and speaker.
#[derive(Debug, Clone, Default)]
pub struct CannedBackend {
    pub seed: u64,
}

impl CannedBackend {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn reply(&self, req: &ChatRequest) -> String {
        let m = &req.meta;
        let speaker = m.speaker.unwrap_or(Role::Tutor);
        let h = digest(&[
            &self.seed.to_le_bytes(),
            m.chat_id.as_bytes(),
            &m.turn.to_le_bytes(),
            &m.attempt.to_le_bytes(),
            speaker.to_string().as_bytes(),
        ]);
        let (pool, n) = match speaker {
            Role::Student => (STUDENT, 1),
            _ => match req.system_prompt().and_then(level_from_prompt).unwrap_or(Level::B1) {
                Level::A1 => (TUTOR_A1, 3),
                Level::B1 => (TUTOR_B1, 2),
                Level::C1 => (TUTOR_C1, 2),
            },
        };
        let start = (h % pool.len() as u64) as usize;
        let step = 1 + ((h >> 32) % (pool.len() as u64 - 1)) as usize;
        let mut picked: Vec<&str> = Vec::with_capacity(n);
        let mut i = start;
        while picked.len() < n {
            while picked.contains(&pool[i]) {
                i = (i + 1) % pool.len();
            }
            picked.push(pool[i]);
            i = (i + step) % pool.len();
        }
        picked.join(" ")
    }
}

impl ChatBackend for CannedBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        Ok(ChatResponse { text: self.reply(req), logprobs: None, usage: None })
    }
}

/// One scripted outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Reply(String),
    Fail(LlmError),
}

/// Replays queued steps keyed by `(chat_id, speaker, turn)`, with `"*"`
/// matching any chat id. Requests with nothing queued go to the fallback.
/// Every request is recorded.
pub struct ScriptedBackend<B = CannedBackend> {
    script: Mutex<HashMap<(String, Role, u32), VecDeque<Step>>>,
    fallback: B,
    log: Mutex<Vec<ChatRequest>>,
}

impl ScriptedBackend<CannedBackend> {
    pub fn new() -> Self {
        Self::with_fallback(CannedBackend::default())
    }
}

impl Default for ScriptedBackend<CannedBackend> {
    fn default() -> Self {
        Self::new()
    }
}

impl<B: ChatBackend> ScriptedBackend<B> {
    pub fn with_fallback(fallback: B) -> Self {
        Self { script: Mutex::new(HashMap::new()), fallback, log: Mutex::new(Vec::new()) }
    }

    pub fn push(&self, chat_id: &str, speaker: Role, turn: u32, step: Step) -> &Self {
        self.script
            .lock()
            .expect("script lock")
            .entry((chat_id.to_string(), speaker, turn))
            .or_default()
            .push_back(step);
        self
    }

    pub fn reply(&self, chat_id: &str, speaker: Role, turn: u32, text: &str) -> &Self {
        self.push(chat_id, speaker, turn, Step::Reply(text.to_string()))
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.log.lock().expect("log lock").clone()
    }

    fn next_step(&self, req: &ChatRequest) -> Option<Step> {
        let speaker = req.meta.speaker?;
        let mut script = self.script.lock().expect("script lock");
        for id in [req.meta.chat_id.as_str(), "*"] {
            if let Some(q) = script.get_mut(&(id.to_string(), speaker, req.meta.turn)) {
                if let Some(step) = q.pop_front() {
                    return Some(step);
                }
            }
        }
        None
    }
}

impl<B: ChatBackend> ChatBackend for ScriptedBackend<B> {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        self.log.lock().expect("log lock").push(req.clone());
        match self.next_step(req) {
            Some(Step::Reply(text)) if text.trim().is_empty() => Err(LlmError::EmptyCompletion),
            Some(Step::Reply(text)) => Ok(ChatResponse { text, logprobs: None, usage: None }),
            Some(Step::Fail(e)) => Err(e),
            None => self.fallback.complete(req),
        }
    }
}

/// Always fails as an unreachable endpoint would.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnreachableBackend;

impl ChatBackend for UnreachableBackend {
    fn complete(&self, _req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        Err(LlmError::Transport { attempts: 1, message: "connection refused".into() })
    }
}

/// Assigns the same log-probability to every whitespace-separated token.
#[derive(Debug, Clone, Copy)]
pub struct FixedScorer {
    pub logprob: f64,
}

impl Scorer for FixedScorer {
    fn score(&self, text: &str) -> Result<TokenScores, ScoreError> {
        let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        let logprobs = vec![self.logprob; tokens.len()];
        Ok(TokenScores { tokens, logprobs })
    }
}
