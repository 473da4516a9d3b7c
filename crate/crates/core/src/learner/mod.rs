//! Active learning drivers over three-valued membership oracles.

mod cache;
mod equivalence;
mod lstar;
mod version_space;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::automata::{Alphabet, Dfa, Symbol};
use crate::identify::IdentifyError;

pub use cache::{CacheEntry, CachingOracle, QueryCache};
pub use equivalence::{
    equivalence_by_candidate_elimination, equivalence_by_random_sampling, EquivalenceOutcome,
    EquivalenceStrategy,
};
pub use lstar::{lstar, LstarOptions, UnsureMapping};
pub use version_space::{guess_dfa_vl, VersionSpaceOptions};

/// Answer to an extended membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unsure,
}

impl Answer {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    /// `Some(label)` for Yes/No, `None` for Unsure.
    pub fn label(self) -> Option<bool> {
        match self {
            Answer::Yes => Some(true),
            Answer::No => Some(false),
            Answer::Unsure => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unsure => "unsure",
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle unavailable: {0}")]
    Unavailable(String),
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("oracle answer for {word} contradicts the seed examples")]
    Contradiction { word: String },
}

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error(transparent)]
    Dfa(#[from] crate::automata::DfaError),
}

/// Where a known answer came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SeedExample,
    Oracle,
    Conjectured,
}

/// Source of extended membership answers.
pub trait MembershipOracle {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError>;

    /// An answer that can be given without contacting any external source.
    fn lookup(&self, _word: &[Symbol]) -> Option<(Answer, Provenance)> {
        None
    }

    /// Whether answers come from a live source (model endpoint, person) whose
    /// latency is worth recording. Simulated oracles report zero latency so
    /// their transcripts are reproducible.
    fn is_live(&self) -> bool {
        false
    }
}

impl<O: MembershipOracle + ?Sized> MembershipOracle for Box<O> {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        (**self).query(word)
    }

    fn lookup(&self, word: &[Symbol]) -> Option<(Answer, Provenance)> {
        (**self).lookup(word)
    }

    fn is_live(&self) -> bool {
        (**self).is_live()
    }
}

impl<O: MembershipOracle + ?Sized> MembershipOracle for &mut O {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        (**self).query(word)
    }

    fn lookup(&self, word: &[Symbol]) -> Option<(Answer, Provenance)> {
        (**self).lookup(word)
    }

    fn is_live(&self) -> bool {
        (**self).is_live()
    }
}

/// Answers membership directly from a DFA.
#[derive(Clone, Debug)]
pub struct DfaOracle(pub Dfa);

impl MembershipOracle for DfaOracle {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        Ok(Answer::from_bool(self.0.accepts(word)))
    }
}

/// One query as seen by a learner session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub word: Vec<String>,
    pub answer: Answer,
    pub provenance: Provenance,
    /// `false` when the answer was served without an inner call.
    pub fresh: bool,
    pub latency_ms: f64,
}

/// Per-session view of an oracle with a cap on inner calls. Answers the
/// oracle already knows are free; anything else counts against the budget,
/// and once it is spent the query fails with [`OracleError::BudgetExhausted`].
pub struct BudgetedOracle<'a> {
    inner: &'a mut dyn MembershipOracle,
    alphabet: Alphabet,
    allowed: usize,
    used: usize,
    transcript: Vec<QueryRecord>,
}

impl<'a> BudgetedOracle<'a> {
    pub fn new(inner: &'a mut dyn MembershipOracle, alphabet: Alphabet, allowed: usize) -> Self {
        Self {
            inner,
            alphabet,
            allowed,
            used: 0,
            transcript: Vec::new(),
        }
    }

    pub fn queries_used(&self) -> usize {
        self.used
    }

    pub fn queries_allowed(&self) -> usize {
        self.allowed
    }

    pub fn remaining(&self) -> usize {
        self.allowed - self.used
    }

    pub fn is_known(&self, word: &[Symbol]) -> bool {
        self.inner.lookup(word).is_some()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        let names = || word.iter().map(|&s| self.alphabet.name(s).to_owned()).collect();
        if let Some((answer, provenance)) = self.inner.lookup(word) {
            self.transcript.push(QueryRecord {
                word: names(),
                answer,
                provenance,
                fresh: false,
                latency_ms: 0.0,
            });
            return Ok(answer);
        }
        if self.used >= self.allowed {
            return Err(OracleError::BudgetExhausted);
        }
        self.used += 1;
        let start = Instant::now();
        let answer = self.inner.query(word)?;
        let latency = if self.inner.is_live() {
            start.elapsed()
        } else {
            Duration::ZERO
        };
        self.transcript.push(QueryRecord {
            word: names(),
            answer,
            provenance: Provenance::Oracle,
            fresh: true,
            latency_ms: duration_ms(latency),
        });
        Ok(answer)
    }

    pub fn into_transcript(self) -> Vec<QueryRecord> {
        self.transcript
    }
}

fn duration_ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Result of one learner session.
#[derive(Clone, Debug)]
pub struct LearnerReport {
    pub dfa: Dfa,
    /// Learner-visible examples at the end of the session.
    pub examples: crate::identify::LabeledExamples,
    pub transcript: Vec<QueryRecord>,
    /// Size of the working hypothesis after each round.
    pub candidate_sizes: Vec<usize>,
    /// Inner oracle calls spent.
    pub queries_spent: usize,
    pub converged: bool,
}

impl LearnerReport {
    /// JSON lines, one per transcript record.
    pub fn transcript_jsonl(&self) -> String {
        transcript_jsonl(&self.transcript)
    }
}

pub fn transcript_jsonl(records: &[QueryRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Counter(usize);

    impl MembershipOracle for Counter {
        fn query(&mut self, _word: &[Symbol]) -> Result<Answer, OracleError> {
            self.0 += 1;
            Ok(Answer::Unsure)
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut inner = Counter(0);
        let a = Alphabet::binary();
        let mut b = BudgetedOracle::new(&mut inner, a.clone(), 2);
        let w = a.parse_word("0").unwrap();
        assert_eq!(b.query(&w), Ok(Answer::Unsure));
        assert_eq!(b.query(&w), Ok(Answer::Unsure));
        assert_eq!(b.query(&w), Err(OracleError::BudgetExhausted));
        assert_eq!(b.queries_used(), 2);
        assert_eq!(b.into_transcript().len(), 2);
        assert_eq!(inner.0, 2);
    }

    #[test]
    fn answer_labels() {
        assert_eq!(Answer::from_bool(true).label(), Some(true));
        assert_eq!(Answer::Unsure.label(), None);
        assert_eq!(Answer::No.to_string(), "no");
    }
}
