//! Minimal DFA identification from labelled examples via SAT.
//!
//! [`find_minimal_dfas`] searches state counts `n = 1, 2, ...` for a DFA
//! consistent with the examples. Each further DFA must be consistent and
//! disagree with every DFA already returned on at least one word; the search
//! for it resumes at the current size and grows when that size is exhausted.

mod apta;
mod encode;
mod examples;
mod sat;

use std::time::Duration;

pub use apta::{build_apta, Apta, AptaNode, NodeLabel};
pub use encode::{encode, Cnf, DfaEncoding};
pub use examples::{parse_examples, write_examples, LabeledExamples};
pub use sat::SatSession;

use crate::automata::{Dfa, DfaError};

pub const DEFAULT_MAX_STATES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentifyError {
    #[error("word {0} is labelled both positive and negative")]
    Contradiction(String),
    #[error("no consistent DFA with at most {max_states} states")]
    BoundExceeded { max_states: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("examples file: {0}")]
    Format(String),
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

#[derive(Clone, Debug)]
pub struct IdentifyOptions {
    pub k: usize,
    pub max_states: usize,
    /// Smallest state count tried. Callers that know a lower bound (for
    /// example from a previous call on a subset of the examples) skip the
    /// unsatisfiable prefix of the search.
    pub min_states: usize,
    /// Every returned DFA must also differ in language from each of these.
    pub exclude: Vec<Dfa>,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        Self {
            k: 1,
            max_states: DEFAULT_MAX_STATES,
            min_states: 1,
            exclude: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct IdentifyStats {
    pub solver_calls: usize,
    pub solve_time: Duration,
    /// Fewer than `k` DFAs were found before reaching `max_states`.
    pub bound_hit: bool,
}

#[derive(Clone, Debug)]
pub struct IdentifyResult {
    /// Canonically numbered minimal DFAs, pairwise language-distinct.
    pub dfas: Vec<Dfa>,
    pub sizes: Vec<usize>,
    pub stats: IdentifyStats,
}

/// Finds up to `k` pairwise non-equivalent DFAs of minimal size consistent
/// with `examples`.
pub fn find_minimal_dfas(
    examples: &LabeledExamples,
    k: usize,
    max_states: usize,
) -> Result<IdentifyResult, IdentifyError> {
    find_minimal_dfas_with(
        examples,
        &IdentifyOptions {
            k,
            max_states,
            ..IdentifyOptions::default()
        },
    )
}

pub fn find_minimal_dfas_with(
    examples: &LabeledExamples,
    opts: &IdentifyOptions,
) -> Result<IdentifyResult, IdentifyError> {
    if opts.k == 0 {
        return Err(IdentifyError::InvalidArgument("k must be at least 1"));
    }
    let apta = build_apta(examples)?;
    let mut found: Vec<Dfa> = Vec::new();
    let mut stats = IdentifyStats::default();
    let mut n = opts.min_states.max(1);

    'sizes: while n <= opts.max_states {
        let mut enc = encode(&apta, n);
        for d in opts.exclude.iter().chain(&found) {
            enc.require_difference(d);
        }
        let mut session = SatSession::new();
        loop {
            let model = session.solve(&enc.cnf);
            let Some(model) = model else { break };
            let dfa = enc.decode(&model);
            debug_assert!(examples.is_consistent(&dfa));
            enc.require_difference(&dfa);
            found.push(dfa.minimize());
            if found.len() == opts.k {
                stats.solver_calls += session.calls();
                stats.solve_time += session.elapsed();
                break 'sizes;
            }
        }
        stats.solver_calls += session.calls();
        stats.solve_time += session.elapsed();
        n += 1;
    }

    if found.is_empty() {
        return Err(IdentifyError::BoundExceeded {
            max_states: opts.max_states,
        });
    }
    stats.bound_hit = found.len() < opts.k;
    let sizes = found.iter().map(Dfa::num_states).collect();
    Ok(IdentifyResult {
        dfas: found,
        sizes,
        stats,
    })
}

/// The first DFA of [`find_minimal_dfas`] with `k = 1`.
pub fn minimal_dfa(examples: &LabeledExamples, max_states: usize) -> Result<Dfa, IdentifyError> {
    Ok(find_minimal_dfas(examples, 1, max_states)?.dfas.remove(0))
}

/// Every `n`-state BFS-canonical DFA consistent with `examples`, up to
/// `limit` of them, found by repeatedly blocking the previous assignment.
pub fn enumerate_consistent(
    examples: &LabeledExamples,
    n: usize,
    limit: usize,
) -> Result<Vec<Dfa>, IdentifyError> {
    let apta = build_apta(examples)?;
    let mut enc = encode(&apta, n);
    let mut session = SatSession::new();
    let mut out = Vec::new();
    while out.len() < limit {
        let Some(model) = session.solve(&enc.cnf) else { break };
        let dfa = enc.decode(&model);
        enc.block_solution(&dfa);
        out.push(dfa);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Alphabet, Word};

    #[test]
    fn empty_examples_give_one_state() {
        let ex = LabeledExamples::new(Alphabet::binary());
        let r = find_minimal_dfas(&ex, 1, 4).unwrap();
        assert_eq!(r.sizes, vec![1]);
    }

    #[test]
    fn single_letter_examples_need_two_states() {
        let a = Alphabet::binary();
        let ex = LabeledExamples::parse(a, &["1"], &["0"]).unwrap();
        let r = find_minimal_dfas(&ex, 1, 4).unwrap();
        assert_eq!(r.sizes, vec![2]);
        assert!(ex.is_consistent(&r.dfas[0]));
    }

    #[test]
    fn k_results_are_distinct_and_sorted() {
        let a = Alphabet::binary();
        let ex = LabeledExamples::parse(a, &["1", "1,1"], &["0"]).unwrap();
        let r = find_minimal_dfas(&ex, 4, 6).unwrap();
        assert_eq!(r.dfas.len(), 4);
        for (i, d) in r.dfas.iter().enumerate() {
            assert!(ex.is_consistent(d));
            for e in &r.dfas[..i] {
                assert!(!d.equivalent(e).unwrap());
            }
        }
        assert!(r.sizes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn bound_exceeded_and_bound_hit() {
        let a = Alphabet::binary();
        let words: Vec<Word> = ["", "0", "0,0", "0,0,0"].iter().map(|t| a.parse_word(t).unwrap()).collect();
        // Alternating labels along 0* need 2 states.
        let ex = LabeledExamples::from_words(a, [words[0].clone(), words[2].clone()], [words[1].clone(), words[3].clone()]).unwrap();
        assert_eq!(
            find_minimal_dfas(&ex, 1, 1).unwrap_err(),
            IdentifyError::BoundExceeded { max_states: 1 }
        );
        let r = find_minimal_dfas(&ex, 50, 2).unwrap();
        assert!(r.stats.bound_hit);
        assert!(r.dfas.len() < 50);
    }

    #[test]
    fn excluded_languages_are_skipped() {
        let a = Alphabet::binary();
        let ex = LabeledExamples::new(a.clone());
        let opts = IdentifyOptions {
            exclude: vec![Dfa::universal(a.clone())],
            ..IdentifyOptions::default()
        };
        let r = find_minimal_dfas_with(&ex, &opts).unwrap();
        assert_eq!(r.dfas[0], Dfa::empty(a));
    }

    #[test]
    fn zero_k_rejected() {
        let ex = LabeledExamples::new(Alphabet::binary());
        assert!(matches!(find_minimal_dfas(&ex, 0, 3), Err(IdentifyError::InvalidArgument(_))));
    }

    #[test]
    fn min_states_hint_is_respected() {
        let ex = LabeledExamples::new(Alphabet::binary());
        let opts = IdentifyOptions {
            k: 1,
            max_states: 5,
            min_states: 3,
            ..IdentifyOptions::default()
        };
        let r = find_minimal_dfas_with(&ex, &opts).unwrap();
        // A 3-state reachable DFA was found, then minimised.
        assert_eq!(r.sizes.len(), 1);
        assert!(r.sizes[0] <= 3);
    }
}
