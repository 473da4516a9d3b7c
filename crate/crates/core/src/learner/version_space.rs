use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BudgetedOracle, LearnerError, LearnerReport, MembershipOracle, OracleError};
use crate::automata::{accepted_words, sample_accepted, Dfa, Word, WordSampler};
use crate::identify::{find_minimal_dfas_with, IdentifyError, IdentifyOptions, LabeledExamples, DEFAULT_MAX_STATES};

#[derive(Clone, Debug)]
pub struct VersionSpaceOptions {
    pub max_states: usize,
    /// Extra distinguishing words tried in a round after an Unsure answer.
    pub unsure_retries: usize,
    /// Share of the budget spent on distinguishing queries; the rest labels
    /// words drawn from `sampler`.
    pub ce_fraction: f64,
    pub sampler: WordSampler,
    /// Rounds are capped at this multiple of the budget, since rounds whose
    /// query is answered from a cache cost nothing.
    pub round_factor: usize,
    /// A competitor is searched for only up to this many states above the
    /// smallest consistent DFA; `None` searches up to `max_states`. Proving
    /// that no competitor exists at every larger size dominates run time once
    /// the hypothesis is right.
    pub competitor_slack: Option<usize>,
    pub seed: u64,
}

impl Default for VersionSpaceOptions {
    fn default() -> Self {
        Self {
            max_states: DEFAULT_MAX_STATES,
            unsure_retries: 3,
            ce_fraction: 1.0,
            sampler: WordSampler::default(),
            round_factor: 4,
            competitor_slack: Some(1),
            seed: 0,
        }
    }
}

/// Version-space learner: repeatedly asks the oracle about a word on which
/// the two smallest consistent DFAs disagree, then returns the smallest DFA
/// consistent with everything labelled.
///
/// Unsure answers add nothing; the word is set aside and another
/// distinguishing word is tried (shortest remaining first, then random) up
/// to `unsure_retries` times before the round is given up.
pub fn guess_dfa_vl(
    examples: &LabeledExamples,
    oracle: &mut dyn MembershipOracle,
    query_budget: usize,
    opts: &VersionSpaceOptions,
) -> Result<LearnerReport, LearnerError> {
    let alphabet = examples.alphabet().clone();
    let mut ex = examples.clone();
    let mut session = BudgetedOracle::new(oracle, alphabet.clone(), query_budget);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut skipped: BTreeSet<Word> = BTreeSet::new();
    let mut candidate_sizes = Vec::new();
    let mut min_states = 1;
    let mut converged = false;
    let ce_budget = ((query_budget as f64) * opts.ce_fraction.clamp(0.0, 1.0)).round() as usize;
    let max_rounds = query_budget.saturating_mul(opts.round_factor.max(1));
    let mut rounds = 0;

    'rounds: while rounds < max_rounds && session.queries_used() < ce_budget {
        rounds += 1;
        let first = find_minimal_dfas_with(
            &ex,
            &IdentifyOptions {
                k: 1,
                max_states: opts.max_states,
                min_states,
                exclude: Vec::new(),
            },
        )?;
        let hypothesis = &first.dfas[0];
        assert!(ex.is_consistent(hypothesis), "identified DFA must be consistent");
        min_states = first.sizes[0];
        candidate_sizes.push(min_states);
        let ceiling = opts
            .competitor_slack
            .map_or(opts.max_states, |slack| opts.max_states.min(min_states + slack));
        let second = find_minimal_dfas_with(
            &ex,
            &IdentifyOptions {
                k: 1,
                max_states: ceiling,
                min_states,
                exclude: vec![hypothesis.clone()],
            },
        );
        let competitor = match second {
            Ok(mut r) => r.dfas.remove(0),
            Err(IdentifyError::BoundExceeded { .. }) => {
                converged = true;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        assert!(ex.is_consistent(&competitor), "identified DFA must be consistent");
        let found = [hypothesis.clone(), competitor];
        let diff = found[0].symmetric_difference(&found[1])?;
        for attempt in 0..=opts.unsure_retries {
            let Some(word) = draw_distinguishing(&diff, &skipped, attempt, &mut rng) else {
                break;
            };
            match session.query(&word) {
                Ok(answer) => match answer.label() {
                    Some(label) => {
                        ex.insert(word, label)?;
                        break;
                    }
                    None => {
                        skipped.insert(word);
                    }
                },
                Err(OracleError::BudgetExhausted) => break 'rounds,
                Err(e) => return Err(e.into()),
            }
        }
    }

    // Remaining budget labels randomly drawn words.
    while rounds < max_rounds && session.queries_used() < query_budget {
        rounds += 1;
        let word = opts.sampler.sample(&alphabet, &mut rng);
        if ex.label(&word).is_some() || skipped.contains(&word) {
            continue;
        }
        match session.query(&word) {
            Ok(answer) => match answer.label() {
                Some(label) => {
                    ex.insert(word, label)?;
                }
                None => {
                    skipped.insert(word);
                }
            },
            Err(OracleError::BudgetExhausted) => break,
            Err(e) => return Err(e.into()),
        }
    }

    let final_dfa = find_minimal_dfas_with(
        &ex,
        &IdentifyOptions {
            k: 1,
            max_states: opts.max_states,
            min_states,
            exclude: Vec::new(),
        },
    )?
    .dfas
    .remove(0);
    assert!(ex.is_consistent(&final_dfa));
    candidate_sizes.push(final_dfa.num_states());
    let queries_spent = session.queries_used();
    Ok(LearnerReport {
        dfa: final_dfa,
        examples: ex,
        transcript: session.into_transcript(),
        candidate_sizes,
        queries_spent,
        converged,
    })
}

/// Picks a word accepted by `diff` (a symmetric difference) that is not in
/// `skipped`: the shortest such word on the first two attempts, a random one
/// of nearly minimal length afterwards.
pub(crate) fn draw_distinguishing<R: Rng + ?Sized>(
    diff: &Dfa,
    skipped: &BTreeSet<Word>,
    attempt: usize,
    rng: &mut R,
) -> Option<Word> {
    let shortest = diff.shortest_accepted()?;
    if attempt >= 2 {
        for _ in 0..8 {
            let len = shortest.len() + rng.gen_range(0..=2);
            if let Some(w) = sample_accepted(diff, len, rng) {
                if !skipped.contains(&w) {
                    return Some(w);
                }
            }
        }
    }
    accepted_words(diff, shortest.len() + 8).find(|w| !skipped.contains(w))
}
