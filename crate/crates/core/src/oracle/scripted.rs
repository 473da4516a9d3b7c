use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{stutter_collapse, Dfa, Symbol};
use crate::learner::{Answer, MembershipOracle, OracleError};

/// Predicate over stutter-collapsed words.
#[derive(Clone)]
pub struct WordPredicate(Arc<dyn Fn(&[Symbol]) -> bool + Send + Sync>);

impl WordPredicate {
    pub fn new(f: impl Fn(&[Symbol]) -> bool + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn never() -> Self {
        Self::new(|_| false)
    }

    pub fn always() -> Self {
        Self::new(|_| true)
    }

    pub fn mentions(symbol: Symbol) -> Self {
        Self::new(move |w| w.contains(&symbol))
    }

    pub fn test(&self, word: &[Symbol]) -> bool {
        (self.0)(word)
    }
}

impl fmt::Debug for WordPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WordPredicate(..)")
    }
}

/// What the scripted oracle does on words matching its predicate.
#[derive(Clone, Debug)]
pub enum PredicateAction {
    Unsure,
    /// Answer confidently from a different DFA, simulating a model that
    /// misreads part of the task.
    AnswerFrom(Dfa),
}

/// Deterministic stand-in for a model: answers from a ground-truth DFA,
/// except on predicate words, and flips Yes/No with probability
/// `error_rate` using its own seeded generator.
#[derive(Clone, Debug)]
pub struct ScriptedOracle {
    truth: Dfa,
    predicate: WordPredicate,
    action: PredicateAction,
    error_rate: f64,
    rng: ChaCha8Rng,
}

impl ScriptedOracle {
    pub fn new(truth: Dfa, unsure_predicate: WordPredicate, error_rate: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&error_rate), "error rate must be a probability");
        Self {
            truth,
            predicate: unsure_predicate,
            action: PredicateAction::Unsure,
            error_rate,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn exact(truth: Dfa) -> Self {
        Self::new(truth, WordPredicate::never(), 0.0, 0)
    }

    pub fn with_action(mut self, action: PredicateAction) -> Self {
        self.action = action;
        self
    }

    pub fn truth(&self) -> &Dfa {
        &self.truth
    }
}

impl MembershipOracle for ScriptedOracle {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        if self.predicate.test(&stutter_collapse(word)) {
            match &self.action {
                PredicateAction::Unsure => return Ok(Answer::Unsure),
                PredicateAction::AnswerFrom(d) => return Ok(Answer::from_bool(d.accepts(word))),
            }
        }
        let mut label = self.truth.accepts(word);
        if self.error_rate > 0.0 && self.rng.gen_bool(self.error_rate) {
            label = !label;
        }
        Ok(Answer::from_bool(label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Alphabet;

    fn ones_only() -> Dfa {
        Dfa::new(Alphabet::binary(), vec![vec![1, 0], vec![1, 1]], 0, [0]).unwrap()
    }

    #[test]
    fn error_rate_one_negates() {
        let a = Alphabet::binary();
        let mut o = ScriptedOracle::new(ones_only(), WordPredicate::never(), 1.0, 3);
        for w in crate::automata::all_words(&a, 4) {
            assert_eq!(o.query(&w).unwrap().label(), Some(!ones_only().accepts(&w)));
        }
    }

    #[test]
    fn predicate_sees_collapsed_word() {
        let a = Alphabet::binary();
        let zero = a.symbol("0").unwrap();
        let pred = WordPredicate::new(move |w| w.len() == 1 && w[0] == zero);
        let mut o = ScriptedOracle::new(ones_only(), pred, 0.0, 0);
        assert_eq!(o.query(&a.parse_word("0,0,0").unwrap()), Ok(Answer::Unsure));
        assert_eq!(o.query(&a.parse_word("0,1").unwrap()), Ok(Answer::No));
    }

    #[test]
    fn answer_from_alternative() {
        let a = Alphabet::binary();
        let mut o = ScriptedOracle::new(ones_only(), WordPredicate::always(), 0.0, 0)
            .with_action(PredicateAction::AnswerFrom(Dfa::universal(a.clone())));
        assert_eq!(o.query(&a.parse_word("0").unwrap()), Ok(Answer::Yes));
    }
}
