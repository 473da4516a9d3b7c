use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::IdentifyError;
use crate::automata::{Alphabet, Dfa, Word};

/// Disjoint sets of positive and negative words over one alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledExamples {
    alphabet: Alphabet,
    positive: BTreeSet<Word>,
    negative: BTreeSet<Word>,
}

impl LabeledExamples {
    pub fn new(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            positive: BTreeSet::new(),
            negative: BTreeSet::new(),
        }
    }

    pub fn from_words<P, N>(alphabet: Alphabet, positive: P, negative: N) -> Result<Self, IdentifyError>
    where
        P: IntoIterator<Item = Word>,
        N: IntoIterator<Item = Word>,
    {
        let mut ex = Self::new(alphabet);
        for w in positive {
            ex.insert(w, true)?;
        }
        for w in negative {
            ex.insert(w, false)?;
        }
        Ok(ex)
    }

    /// Parses words written as comma-separated symbol names.
    pub fn parse(alphabet: Alphabet, positive: &[&str], negative: &[&str]) -> Result<Self, IdentifyError> {
        let pos = positive
            .iter()
            .map(|t| alphabet.parse_word(t))
            .collect::<Result<Vec<_>, _>>()?;
        let neg = negative
            .iter()
            .map(|t| alphabet.parse_word(t))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_words(alphabet, pos, neg)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn positive(&self) -> &BTreeSet<Word> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<Word> {
        &self.negative
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Some(true)` for positives, `Some(false)` for negatives.
    pub fn label(&self, word: &[crate::automata::Symbol]) -> Option<bool> {
        let w = Word::from(word);
        if self.positive.contains(&w) {
            Some(true)
        } else if self.negative.contains(&w) {
            Some(false)
        } else {
            None
        }
    }

    /// Adds a labelled word. Re-adding with the same label is a no-op; adding
    /// with the opposite label is a contradiction.
    pub fn insert(&mut self, word: Word, positive: bool) -> Result<bool, IdentifyError> {
        self.alphabet.check(&word)?;
        let (same, other) = if positive {
            (&mut self.positive, &self.negative)
        } else {
            (&mut self.negative, &self.positive)
        };
        if other.contains(&word) {
            return Err(IdentifyError::Contradiction(self.alphabet.render(&word)));
        }
        Ok(same.insert(word))
    }

    /// Moves `word` to the given side, dropping any opposite label.
    pub fn relabel(&mut self, word: Word, positive: bool) {
        if positive {
            self.negative.remove(&word);
            self.positive.insert(word);
        } else {
            self.positive.remove(&word);
            self.negative.insert(word);
        }
    }

    /// Iterates `(word, label)` with positives first.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, bool)> {
        self.positive
            .iter()
            .map(|w| (w, true))
            .chain(self.negative.iter().map(|w| (w, false)))
    }

    /// `true` iff `dfa` accepts every positive and rejects every negative.
    pub fn is_consistent(&self, dfa: &Dfa) -> bool {
        self.positive.iter().all(|w| dfa.accepts(w)) && self.negative.iter().all(|w| !dfa.accepts(w))
    }

    /// Total number of symbols across all example words.
    pub fn total_symbols(&self) -> usize {
        self.iter().map(|(w, _)| w.len()).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct ExamplesFile {
    alphabet: Vec<String>,
    #[serde(default)]
    positive: Vec<String>,
    #[serde(default)]
    negative: Vec<String>,
}

/// Reads the TOML examples format:
///
/// ```toml
/// alphabet = ["red", "yellow", "blue", "green"]
/// positive = ["blue,green,yellow", "yellow"]
/// negative = ["blue", ""]   # "" is the empty word
/// ```
pub fn parse_examples(text: &str) -> Result<LabeledExamples, IdentifyError> {
    let file: ExamplesFile = toml::from_str(text).map_err(|e| IdentifyError::Format(e.to_string()))?;
    let alphabet = Alphabet::new(file.alphabet)?;
    let pos: Vec<&str> = file.positive.iter().map(String::as_str).collect();
    let neg: Vec<&str> = file.negative.iter().map(String::as_str).collect();
    LabeledExamples::parse(alphabet, &pos, &neg)
}

pub fn write_examples(examples: &LabeledExamples) -> String {
    let a = &examples.alphabet;
    let file = ExamplesFile {
        alphabet: a.names().to_vec(),
        positive: examples.positive.iter().map(|w| a.render_compact(w)).collect(),
        negative: examples.negative.iter().map(|w| a.render_compact(w)).collect(),
    };
    toml::to_string(&file).expect("serializable")
}
