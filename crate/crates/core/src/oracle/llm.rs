//! Membership oracle backed by a chat-completion endpoint.

use std::io::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::prompt::{membership_question, AnswerFormat, TaskPrompt};
use crate::automata::{Alphabet, Symbol};
use crate::learner::{Answer, MembershipOracle, OracleError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub content: String,
}

/// Ordered turns: the rendered task prompt, then one question and one reply
/// per membership query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Conversation {
    pub turns: Vec<Turn>,
}

impl Conversation {
    pub fn start(prompt: &TaskPrompt) -> Self {
        Self {
            turns: vec![Turn {
                role: Role::System,
                content: prompt.render(),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn push(&mut self, role: Role, content: impl Into<String>) {
        self.turns.push(Turn {
            role,
            content: content.into(),
        });
    }

    /// Re-parses every assistant turn. Unparseable replies read as Unsure,
    /// which is what the oracle answered for them.
    pub fn replay_answers(&self, prompt: &TaskPrompt) -> Vec<Answer> {
        self.turns
            .iter()
            .filter(|t| t.role == Role::Assistant)
            .map(|t| prompt.parse_answer(&t.content).unwrap_or(Answer::Unsure))
            .collect()
    }

    /// One JSON object per turn.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.turns {
            out.push_str(&serde_json::to_string(t).expect("turn serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let turns = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { turns })
    }
}

/// Appends `word` as a membership question to `history`.
pub fn render_membership_prompt(alphabet: &Alphabet, history: &Conversation, word: &[Symbol]) -> Conversation {
    let mut c = history.clone();
    c.push(Role::User, membership_question(alphabet, word));
    c
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmEndpointConfig {
    /// Base URL of an OpenAI-compatible API, e.g. `http://localhost:8080/v1`.
    pub base_url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub model: String,
    pub timeout_secs: u64,
    /// Attempts per request before the oracle reports itself unavailable.
    pub retries: u32,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop: Vec<String>,
    /// Send a GBNF `grammar` field restricting the reply shape. Only for
    /// servers that accept it.
    pub use_grammar: bool,
    /// Approximate token cap on the request context (4 characters per
    /// token). Oldest question/answer pairs are left out of the request
    /// beyond it; the task prompt is always sent.
    pub context_token_budget: Option<usize>,
}

impl Default for LlmEndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8080/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            model: "gpt-4-turbo".into(),
            timeout_secs: 60,
            retries: 3,
            temperature: 0.0,
            max_tokens: 512,
            stop: Vec::new(),
            use_grammar: false,
            context_token_budget: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

/// Chat-completion request body.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stop: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grammar: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("http status {0}")]
    Status(u16),
    #[error("transport: {0}")]
    Other(String),
}

pub trait Transport {
    /// Sends one request and returns the first choice's message content.
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Blocking HTTP transport for `POST {base_url}/chat/completions`.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(config: &LlmEndpointConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        Self {
            agent,
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            api_key: std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty()),
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

impl Transport for HttpTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut req = self.agent.post(&self.url).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = match req.send_json(request) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => return Err(TransportError::Status(code)),
            Err(ureq::Error::Transport(t)) => {
                let msg = t.to_string();
                return Err(if msg.contains("timed out") {
                    TransportError::Timeout
                } else {
                    TransportError::Other(msg)
                });
            }
        };
        let body: ChatResponse = resp.into_json().map_err(|e| TransportError::Other(e.to_string()))?;
        body.choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| TransportError::Other("response has no message content".into()))
    }
}

/// GBNF grammar for the reply shape of `prompt`.
pub fn answer_grammar(prompt: &TaskPrompt) -> String {
    let answers = if prompt.allow_unsure {
        r#""yes" | "no" | "unsure""#
    } else {
        r#""yes" | "no""#
    };
    match prompt.format {
        AnswerFormat::FinalAnswerMarker => {
            format!("root ::= work \"FINAL_ANSWER: \" answer\nwork ::= [^\\x00]*\nanswer ::= {answers}\n")
        }
        AnswerFormat::Bare => {
            let bare = if prompt.allow_unsure {
                r#""true" | "false" | "unsure""#
            } else {
                r#""true" | "false""#
            };
            format!("root ::= {bare}\n")
        }
    }
}

/// Membership oracle that asks a language model, one conversation per
/// oracle. Each query adds one question and one reply to the conversation.
/// A reply that does not parse gets one corrective follow-up; if that also
/// fails the answer is Unsure. In the stored conversation the follow-up
/// exchange is collapsed so that the last reply stands for the query.
pub struct LlmOracle<T> {
    prompt: TaskPrompt,
    alphabet: Alphabet,
    config: LlmEndpointConfig,
    transport: T,
    conversation: Conversation,
    log: Option<Box<dyn Write + Send>>,
    malformed: usize,
}

impl<T: Transport> LlmOracle<T> {
    pub fn new(prompt: TaskPrompt, alphabet: Alphabet, config: LlmEndpointConfig, transport: T) -> Self {
        let conversation = Conversation::start(&prompt);
        Self {
            prompt,
            alphabet,
            config,
            transport,
            conversation,
            log: None,
            malformed: 0,
        }
    }

    /// Writes each committed turn to `log` as a JSON line, starting with the
    /// task prompt.
    pub fn with_log(mut self, mut log: Box<dyn Write + Send>) -> Self {
        for t in &self.conversation.turns {
            write_turn(&mut log, t);
        }
        self.log = Some(log);
        self
    }

    pub fn conversation(&self) -> &Conversation {
        &self.conversation
    }

    pub fn prompt(&self) -> &TaskPrompt {
        &self.prompt
    }

    /// Replies that stayed unparseable after the corrective follow-up.
    pub fn malformed_count(&self) -> usize {
        self.malformed
    }

    fn request(&self, turns: &[Turn]) -> ChatRequest {
        let mut messages: Vec<ChatMessage> = turns
            .iter()
            .map(|t| ChatMessage {
                role: t.role,
                content: t.content.clone(),
            })
            .collect();
        if let Some(budget) = self.config.context_token_budget {
            let tokens = |m: &[ChatMessage]| m.iter().map(|x| x.content.len().div_ceil(4)).sum::<usize>();
            // messages[0] is the task prompt; drop the oldest question/reply pairs after it.
            while messages.len() > 3 && tokens(&messages) > budget {
                messages.drain(1..3);
            }
        }
        ChatRequest {
            model: self.config.model.clone(),
            messages,
            temperature: self.config.temperature.max(0.0),
            max_tokens: self.config.max_tokens,
            stop: self.config.stop.clone(),
            grammar: self.config.use_grammar.then(|| answer_grammar(&self.prompt)),
        }
    }

    fn send(&mut self, turns: &[Turn]) -> Result<String, OracleError> {
        let request = self.request(turns);
        let attempts = self.config.retries.max(1);
        let mut last = None;
        for attempt in 1..=attempts {
            match self.transport.complete(&request) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    log::warn!("chat request attempt {attempt}/{attempts} failed: {e}");
                    last = Some(e);
                }
            }
        }
        Err(OracleError::Unavailable(last.map(|e| e.to_string()).unwrap_or_default()))
    }

    fn commit(&mut self, role: Role, content: String) {
        let turn = Turn { role, content };
        if let Some(log) = self.log.as_mut() {
            write_turn(log, &turn);
        }
        self.conversation.turns.push(turn);
    }
}

fn write_turn(log: &mut Box<dyn Write + Send>, turn: &Turn) {
    let line = serde_json::to_string(turn).expect("turn serializes");
    if let Err(e) = writeln!(log, "{line}").and_then(|_| log.flush()) {
        log::warn!("conversation log write failed: {e}");
    }
}

impl<T: Transport> MembershipOracle for LlmOracle<T> {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        let question = membership_question(&self.alphabet, word);
        let mut turns = self.conversation.turns.clone();
        turns.push(Turn {
            role: Role::User,
            content: question.clone(),
        });
        let reply = self.send(&turns)?;
        let (reply, answer) = match self.prompt.parse_answer(&reply) {
            Ok(a) => (reply, a),
            Err(first) => {
                if !self.config.use_grammar {
                    log::info!("reply not in answer grammar ({first}); asking again");
                }
                turns.push(Turn {
                    role: Role::Assistant,
                    content: reply,
                });
                turns.push(Turn {
                    role: Role::User,
                    content: self.prompt.corrective_reminder(),
                });
                let retry = self.send(&turns)?;
                match self.prompt.parse_answer(&retry) {
                    Ok(a) => (retry, a),
                    Err(e) => {
                        log::warn!("reply for {question:?} still malformed ({e}); treating as unsure");
                        self.malformed += 1;
                        (retry, Answer::Unsure)
                    }
                }
            }
        };
        self.commit(Role::User, question);
        self.commit(Role::Assistant, reply);
        Ok(answer)
    }

    fn is_live(&self) -> bool {
        true
    }
}
