//! Concrete membership oracles: language-model, scripted and human.

mod human;
mod llm;
mod prompt;
mod scripted;

use serde::Serialize;

pub use human::HumanOracle;
pub use llm::{
    answer_grammar, render_membership_prompt, ChatMessage, ChatRequest, Conversation, HttpTransport, LlmEndpointConfig,
    LlmOracle, Role, Transport, TransportError, Turn,
};
pub use prompt::{
    membership_question, parse_bare_answer, parse_final_answer, AnswerFormat, ParseError, TaskPrompt,
    FINAL_ANSWER_MARKER,
};
pub use scripted::{PredicateAction, ScriptedOracle, WordPredicate};

use crate::automata::{Dfa, Symbol};
use crate::learner::{Answer, QueryRecord};

/// Answer quality of an oracle transcript against a ground truth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HallucinationStats {
    pub total: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub unsure: usize,
}

impl HallucinationStats {
    /// `incorrect / total`; zero for an empty transcript.
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.incorrect as f64 / self.total as f64
        }
    }
}

pub fn measure_hallucination<'a, I>(answers: I, truth: &Dfa) -> HallucinationStats
where
    I: IntoIterator<Item = (&'a [Symbol], Answer)>,
{
    let mut s = HallucinationStats::default();
    for (word, answer) in answers {
        s.total += 1;
        match answer.label() {
            None => s.unsure += 1,
            Some(l) if l == truth.accepts(word) => s.correct += 1,
            Some(_) => s.incorrect += 1,
        }
    }
    s
}

/// Stats over the fresh (inner-oracle) records of a learner transcript.
pub fn measure_transcript(records: &[QueryRecord], truth: &Dfa) -> Result<HallucinationStats, crate::automata::DfaError> {
    let a = truth.alphabet();
    let words = records
        .iter()
        .filter(|r| r.fresh)
        .map(|r| {
            let w = r.word.iter().map(|n| a.symbol(n)).collect::<Result<Vec<_>, _>>()?;
            Ok((w, r.answer))
        })
        .collect::<Result<Vec<_>, crate::automata::DfaError>>()?;
    Ok(measure_hallucination(words.iter().map(|(w, a)| (w.as_slice(), *a)), truth))
}
