//! Approximate equivalence queries built from membership queries.

use std::collections::BTreeSet;

use rand::Rng;

use super::version_space::draw_distinguishing;
use super::{BudgetedOracle, LearnerError, OracleError};
use crate::automata::{Dfa, Word, WordSampler};
use crate::identify::{find_minimal_dfas_with, IdentifyError, IdentifyOptions, LabeledExamples};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceOutcome {
    /// A word whose known label disagrees with the hypothesis.
    Counterexample(Word),
    /// The search finished without finding a disagreement.
    Equivalent,
    /// The query budget ran out first.
    Unverified,
}

#[derive(Clone, Debug)]
pub enum EquivalenceStrategy {
    CandidateElimination {
        /// Competing DFAs may have up to this many more states than the
        /// hypothesis.
        slack: usize,
        /// ...and never fewer than this many in total. A small hypothesis
        /// that agrees with every short word can only be refuted by a
        /// competitor large enough to reject a longer one.
        floor: usize,
    },
    RandomSampling {
        samples: usize,
        sampler: WordSampler,
    },
    /// Candidate elimination on `ce_fraction` of the remaining budget, then
    /// random sampling.
    Mixed {
        ce_fraction: f64,
        slack: usize,
        floor: usize,
        samples: usize,
        sampler: WordSampler,
    },
}

impl Default for EquivalenceStrategy {
    fn default() -> Self {
        EquivalenceStrategy::CandidateElimination { slack: 1, floor: 0 }
    }
}

impl EquivalenceStrategy {
    pub fn run<R: Rng + ?Sized>(
        &self,
        hypothesis: &Dfa,
        knowledge: &mut LabeledExamples,
        oracle: &mut BudgetedOracle<'_>,
        rng: &mut R,
    ) -> Result<EquivalenceOutcome, LearnerError> {
        match self {
            EquivalenceStrategy::CandidateElimination { slack, floor } => {
                let budget = oracle.remaining();
                let bound = (hypothesis.num_states() + slack).max(*floor);
                equivalence_by_candidate_elimination(hypothesis, knowledge, oracle, budget, bound, rng)
            }
            EquivalenceStrategy::RandomSampling { samples, sampler } => {
                equivalence_by_random_sampling(hypothesis, knowledge, oracle, sampler, *samples, rng)
            }
            EquivalenceStrategy::Mixed {
                ce_fraction,
                slack,
                floor,
                samples,
                sampler,
            } => {
                let ce_budget = ((oracle.remaining() as f64) * ce_fraction.clamp(0.0, 1.0)).round() as usize;
                if ce_budget > 0 {
                    let out = equivalence_by_candidate_elimination(
                        hypothesis,
                        knowledge,
                        oracle,
                        ce_budget,
                        (hypothesis.num_states() + slack).max(*floor),
                        rng,
                    )?;
                    if matches!(out, EquivalenceOutcome::Counterexample(_)) {
                        return Ok(out);
                    }
                }
                equivalence_by_random_sampling(hypothesis, knowledge, oracle, sampler, *samples, rng)
            }
        }
    }
}

/// Looks for the smallest DFA that fits every Yes/No label in `knowledge`
/// but differs from `hypothesis`, and asks the oracle about a word on which
/// the two disagree. Answers that side with the hypothesis are added to
/// `knowledge` (eliminating that competitor) and the search repeats; an
/// answer that contradicts it is returned as a counterexample.
///
/// At most `max_queries` inner calls are spent. Competitors are searched up
/// to `max_states` states; when none is left the hypothesis is reported
/// equivalent.
pub fn equivalence_by_candidate_elimination<R: Rng + ?Sized>(
    hypothesis: &Dfa,
    knowledge: &mut LabeledExamples,
    oracle: &mut BudgetedOracle<'_>,
    max_queries: usize,
    max_states: usize,
    rng: &mut R,
) -> Result<EquivalenceOutcome, LearnerError> {
    if max_queries == 0 {
        return Ok(EquivalenceOutcome::Unverified);
    }
    if let Some(w) = known_disagreement(hypothesis, knowledge) {
        return Ok(EquivalenceOutcome::Counterexample(w));
    }
    let start = oracle.queries_used();
    let mut skipped: BTreeSet<Word> = BTreeSet::new();
    let mut attempt = 0;
    // Cached answers are free, so bound the rounds separately.
    let max_rounds = 4 * max_queries + 4;
    for _ in 0..max_rounds {
        if oracle.queries_used() - start >= max_queries {
            return Ok(EquivalenceOutcome::Unverified);
        }
        let opts = IdentifyOptions {
            k: 1,
            max_states,
            min_states: 1,
            exclude: vec![hypothesis.clone()],
        };
        let competitor = match find_minimal_dfas_with(knowledge, &opts) {
            Ok(mut r) => r.dfas.remove(0),
            Err(IdentifyError::BoundExceeded { .. }) => return Ok(EquivalenceOutcome::Equivalent),
            Err(e) => return Err(e.into()),
        };
        let diff = hypothesis.symmetric_difference(&competitor)?;
        let Some(word) = draw_distinguishing(&diff, &skipped, attempt, rng) else {
            return Ok(EquivalenceOutcome::Unverified);
        };
        match oracle.query(&word) {
            Ok(answer) => match answer.label() {
                Some(label) => {
                    attempt = 0;
                    knowledge.insert(word.clone(), label)?;
                    if label != hypothesis.accepts(&word) {
                        return Ok(EquivalenceOutcome::Counterexample(word));
                    }
                }
                None => {
                    attempt += 1;
                    skipped.insert(word);
                }
            },
            Err(OracleError::BudgetExhausted) => return Ok(EquivalenceOutcome::Unverified),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(EquivalenceOutcome::Unverified)
}

/// Queries `samples` random words and returns the first Yes/No answer that
/// disagrees with the hypothesis. Unsure answers are skipped.
pub fn equivalence_by_random_sampling<R: Rng + ?Sized>(
    hypothesis: &Dfa,
    knowledge: &mut LabeledExamples,
    oracle: &mut BudgetedOracle<'_>,
    sampler: &WordSampler,
    samples: usize,
    rng: &mut R,
) -> Result<EquivalenceOutcome, LearnerError> {
    let alphabet = hypothesis.alphabet().clone();
    for _ in 0..samples {
        let word = sampler.sample(&alphabet, rng);
        let answer = match knowledge.label(&word) {
            Some(label) => Some(label),
            None => match oracle.query(&word) {
                Ok(a) => a.label(),
                Err(OracleError::BudgetExhausted) => return Ok(EquivalenceOutcome::Unverified),
                Err(e) => return Err(e.into()),
            },
        };
        if let Some(label) = answer {
            knowledge.insert(word.clone(), label)?;
            if label != hypothesis.accepts(&word) {
                return Ok(EquivalenceOutcome::Counterexample(word));
            }
        }
    }
    Ok(EquivalenceOutcome::Equivalent)
}

/// Shortest (then lexicographically first) labelled word the hypothesis
/// gets wrong.
fn known_disagreement(hypothesis: &Dfa, knowledge: &LabeledExamples) -> Option<Word> {
    knowledge
        .iter()
        .filter(|(w, label)| hypothesis.accepts(w) != *label)
        .map(|(w, _)| w.clone())
        .min_by(|a, b| a.length_lex_cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Alphabet, Symbol};
    use crate::learner::{Answer, DfaOracle, MembershipOracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones_only() -> Dfa {
        Dfa::new(Alphabet::binary(), vec![vec![1, 0], vec![1, 1]], 0, [0]).unwrap()
    }

    #[test]
    fn zero_budget_is_unverified() {
        let mut o = DfaOracle(ones_only());
        let a = Alphabet::binary();
        let mut b = BudgetedOracle::new(&mut o, a.clone(), 0);
        let mut k = LabeledExamples::new(a.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out =
            equivalence_by_candidate_elimination(&Dfa::universal(a), &mut k, &mut b, 0, 2, &mut rng).unwrap();
        assert_eq!(out, EquivalenceOutcome::Unverified);
    }

    #[test]
    fn finds_counterexample_for_wrong_hypothesis() {
        let mut o = DfaOracle(ones_only());
        let a = Alphabet::binary();
        let mut b = BudgetedOracle::new(&mut o, a.clone(), 20);
        let mut k = LabeledExamples::new(a.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out =
            equivalence_by_candidate_elimination(&Dfa::universal(a), &mut k, &mut b, 20, 2, &mut rng).unwrap();
        let EquivalenceOutcome::Counterexample(w) = out else { panic!("{out:?}") };
        assert!(!ones_only().accepts(&w));
    }

    #[test]
    fn random_sampling_catches_universal_hypothesis() {
        let mut o = DfaOracle(ones_only());
        let a = Alphabet::binary();
        let mut b = BudgetedOracle::new(&mut o, a.clone(), 100);
        let mut k = LabeledExamples::new(a.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let out = equivalence_by_random_sampling(
            &Dfa::universal(a.clone()),
            &mut k,
            &mut b,
            &WordSampler::default(),
            100,
            &mut rng,
        )
        .unwrap();
        let EquivalenceOutcome::Counterexample(w) = out else { panic!("{out:?}") };
        assert!(w.contains(&Symbol(0)));
    }

    #[test]
    fn unsure_answers_are_skipped() {
        struct Unsure;
        impl MembershipOracle for Unsure {
            fn query(&mut self, _: &[Symbol]) -> Result<Answer, OracleError> {
                Ok(Answer::Unsure)
            }
        }
        let a = Alphabet::binary();
        let mut o = Unsure;
        let mut b = BudgetedOracle::new(&mut o, a.clone(), 5);
        let mut k = LabeledExamples::new(a.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out =
            equivalence_by_candidate_elimination(&Dfa::universal(a), &mut k, &mut b, 5, 2, &mut rng).unwrap();
        assert_eq!(out, EquivalenceOutcome::Unverified);
        assert_eq!(b.queries_used(), 5);
    }
}
