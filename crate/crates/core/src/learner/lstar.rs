//! Angluin-style observation-table learning with three-valued answers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    BudgetedOracle, EquivalenceOutcome, EquivalenceStrategy, LearnerError, LearnerReport, MembershipOracle,
    OracleError,
};
use crate::automata::{Alphabet, Dfa, Word};
use crate::identify::{minimal_dfa, LabeledExamples, DEFAULT_MAX_STATES};

/// How Unsure membership answers enter the observation table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnsureMapping {
    /// The cell is filled with `false`.
    #[default]
    False,
    /// The cell reads as `false` for now and is asked again before each
    /// later hypothesis.
    Skip,
}

#[derive(Clone, Debug)]
pub struct LstarOptions {
    pub equivalence: EquivalenceStrategy,
    pub unsure_as: UnsureMapping,
    /// Learning stops once a hypothesis would exceed this many states.
    pub max_states: usize,
    pub seed: u64,
}

impl Default for LstarOptions {
    fn default() -> Self {
        Self {
            equivalence: EquivalenceStrategy::default(),
            unsure_as: UnsureMapping::False,
            max_states: 64,
            seed: 0,
        }
    }
}

struct Stop;

struct Table<'s, 'o> {
    alphabet: Alphabet,
    prefixes: Vec<Word>,
    prefix_set: BTreeSet<Word>,
    suffixes: Vec<Word>,
    /// Table cells answered Unsure.
    pending: BTreeSet<Word>,
    unsure_cells: HashMap<Word, bool>,
    knowledge: &'s mut LabeledExamples,
    oracle: &'s mut BudgetedOracle<'o>,
}

impl Table<'_, '_> {
    fn member(&mut self, word: &Word) -> Result<bool, LearnerError> {
        if let Some(label) = self.knowledge.label(word) {
            return Ok(label);
        }
        if let Some(&v) = self.unsure_cells.get(word) {
            return Ok(v);
        }
        match self.oracle.query(word) {
            Ok(answer) => match answer.label() {
                Some(label) => {
                    self.knowledge.insert(word.clone(), label)?;
                    Ok(label)
                }
                None => {
                    self.unsure_cells.insert(word.clone(), false);
                    self.pending.insert(word.clone());
                    Ok(false)
                }
            },
            Err(e) => Err(e.into()),
        }
    }

    /// Cell value without asking the oracle; unknown cells read `false`.
    fn peek(&self, word: &Word) -> bool {
        self.knowledge
            .label(word)
            .or_else(|| self.unsure_cells.get(word).copied())
            .unwrap_or(false)
    }

    fn row(&mut self, prefix: &Word) -> Result<Vec<bool>, LearnerError> {
        let suffixes = self.suffixes.clone();
        suffixes.iter().map(|e| self.member(&prefix.concat(e))).collect()
    }

    fn peek_row(&self, prefix: &Word) -> Vec<bool> {
        self.suffixes.iter().map(|e| self.peek(&prefix.concat(e))).collect()
    }

    fn add_prefix(&mut self, w: Word) {
        if self.prefix_set.insert(w.clone()) {
            self.prefixes.push(w);
        }
    }

    /// Repairs closedness and consistency until both hold.
    fn close(&mut self) -> Result<(), LearnerError> {
        'repair: loop {
            let mut rows: BTreeMap<Vec<bool>, Word> = BTreeMap::new();
            let prefixes = self.prefixes.clone();
            for s in &prefixes {
                let r = self.row(s)?;
                if let Some(other) = rows.get(&r).cloned() {
                    // Consistency: equal rows must stay equal after every symbol.
                    for a in self.alphabet.symbols() {
                        let suffixes = self.suffixes.clone();
                        for e in &suffixes {
                            let mut ae = Word::from(vec![a]);
                            ae = ae.concat(e);
                            if self.member(&s.concat(&ae))? != self.member(&other.concat(&ae))? {
                                self.suffixes.push(ae);
                                continue 'repair;
                            }
                        }
                    }
                } else {
                    rows.insert(r, s.clone());
                }
            }
            for s in &prefixes {
                for a in self.alphabet.symbols() {
                    let sa = s.concat(&[a]);
                    let r = self.row(&sa)?;
                    if !rows.contains_key(&r) {
                        self.add_prefix(sa);
                        continue 'repair;
                    }
                }
            }
            return Ok(());
        }
    }

    /// Asks every pending Unsure cell once more. Returns whether any of
    /// them now has a label.
    fn retry_pending(&mut self) -> Result<bool, LearnerError> {
        let pending = std::mem::take(&mut self.pending);
        let mut changed = false;
        for w in pending {
            match self.oracle.query(&w)? {
                a if a.label().is_some() => {
                    self.unsure_cells.remove(&w);
                    self.knowledge.insert(w, a.label().unwrap())?;
                    changed = true;
                }
                _ => {}
            }
        }
        Ok(changed)
    }

    /// DFA whose states are the distinct prefix rows. A successor row that
    /// is missing (table not closed) goes to the most similar state.
    fn hypothesis(&self) -> Dfa {
        let mut index: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
        let mut reps: Vec<Word> = Vec::new();
        for s in &self.prefixes {
            let r = self.peek_row(s);
            if !index.contains_key(&r) {
                index.insert(r, reps.len());
                reps.push(s.clone());
            }
        }
        let rows: Vec<Vec<bool>> = reps.iter().map(|s| self.peek_row(s)).collect();
        let lookup = |r: &Vec<bool>| -> usize {
            index.get(r).copied().unwrap_or_else(|| {
                (0..rows.len())
                    .max_by_key(|&i| (rows[i].iter().zip(r).filter(|(x, y)| x == y).count(), usize::MAX - i))
                    .expect("at least one state")
            })
        };
        let initial = lookup(&self.peek_row(&Word::empty()));
        let accepting: Vec<usize> = (0..reps.len()).filter(|&i| rows[i][0]).collect();
        Dfa::from_fn(self.alphabet.clone(), reps.len(), initial, accepting, |q, a| {
            lookup(&self.peek_row(&reps[q].concat(&[a])))
        })
        .expect("well-formed hypothesis")
    }
}

/// Learns a DFA from membership queries with an observation table.
/// `seed` labels are used without asking the oracle. Counterexamples add all
/// of their prefixes to the table. If the budget runs out first, the
/// current hypothesis is returned with `converged = false`; when that
/// hypothesis misclassifies a known label, the smallest DFA consistent with
/// all known labels is returned instead.
pub fn lstar(
    seed: &LabeledExamples,
    oracle: &mut dyn MembershipOracle,
    query_budget: usize,
    opts: &LstarOptions,
) -> Result<LearnerReport, LearnerError> {
    let alphabet = seed.alphabet().clone();
    let mut knowledge = seed.clone();
    let mut session = BudgetedOracle::new(oracle, alphabet.clone(), query_budget);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut candidate_sizes = Vec::new();

    let (dfa, converged) = {
        let mut table = Table {
            alphabet: alphabet.clone(),
            prefixes: vec![Word::empty()],
            prefix_set: BTreeSet::from([Word::empty()]),
            suffixes: vec![Word::empty()],
            pending: BTreeSet::new(),
            unsure_cells: HashMap::new(),
            knowledge: &mut knowledge,
            oracle: &mut session,
        };
        let outcome = run_table(&mut table, opts, &mut candidate_sizes, &mut rng);
        let hyp = table.hypothesis();
        match outcome {
            Ok(true) => (hyp, true),
            Ok(false) | Err(Stop) => (hyp, false),
        }
    };
    let dfa = dfa.minimize();
    let dfa = if knowledge.is_consistent(&dfa) {
        dfa
    } else {
        minimal_dfa(&knowledge, DEFAULT_MAX_STATES.max(dfa.num_states()))?
    };
    candidate_sizes.push(dfa.num_states());
    let queries_spent = session.queries_used();
    Ok(LearnerReport {
        dfa,
        examples: knowledge,
        transcript: session.into_transcript(),
        candidate_sizes,
        queries_spent,
        converged,
    })
}

/// `Ok(true)` when an equivalence check passed, `Ok(false)` when it could
/// not be completed, `Err(Stop)` on budget exhaustion or state cap.
fn run_table(
    table: &mut Table<'_, '_>,
    opts: &LstarOptions,
    sizes: &mut Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<bool, Stop> {
    let stop = |e: LearnerError| -> Stop {
        if !matches!(e, LearnerError::Oracle(OracleError::BudgetExhausted)) {
            log::warn!("L* stopped: {e}");
        }
        Stop
    };
    loop {
        table.close().map_err(stop)?;
        if opts.unsure_as == UnsureMapping::Skip && !table.pending.is_empty() {
            if table.retry_pending().map_err(stop)? {
                continue;
            }
        }
        let hyp = table.hypothesis();
        sizes.push(hyp.num_states());
        if hyp.num_states() > opts.max_states {
            return Err(Stop);
        }
        let outcome = opts
            .equivalence
            .run(&hyp, &mut *table.knowledge, &mut *table.oracle, rng)
            .map_err(stop)?;
        match outcome {
            EquivalenceOutcome::Counterexample(w) => {
                for i in 1..=w.len() {
                    table.add_prefix(Word::from(&w[..i]));
                }
            }
            EquivalenceOutcome::Equivalent => return Ok(true),
            EquivalenceOutcome::Unverified => return Ok(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Symbol;
    use crate::learner::{Answer, DfaOracle};

    fn ones_only() -> Dfa {
        Dfa::new(Alphabet::binary(), vec![vec![1, 0], vec![1, 1]], 0, [0]).unwrap()
    }

    #[test]
    fn learns_ones_only() {
        let seed = LabeledExamples::new(Alphabet::binary());
        let r = lstar(&seed, &mut DfaOracle(ones_only()), 100, &LstarOptions::default()).unwrap();
        assert!(r.dfa.equivalent(&ones_only()).unwrap());
        assert_eq!(r.dfa.num_states(), 2);
    }

    #[test]
    fn unsure_everywhere_gives_empty_language() {
        struct Unsure;
        impl MembershipOracle for Unsure {
            fn query(&mut self, _: &[Symbol]) -> Result<Answer, OracleError> {
                Ok(Answer::Unsure)
            }
        }
        let seed = LabeledExamples::new(Alphabet::binary());
        let r = lstar(&seed, &mut Unsure, 30, &LstarOptions::default()).unwrap();
        assert!(r.dfa.is_empty_language());
        assert!(!r.converged);
    }

    #[test]
    fn budget_exhaustion_returns_consistent_hypothesis() {
        let seed = LabeledExamples::new(Alphabet::binary());
        let target = Dfa::new(
            Alphabet::binary(),
            vec![vec![1, 0], vec![2, 1], vec![0, 2]],
            0,
            [0],
        )
        .unwrap();
        let r = lstar(&seed, &mut DfaOracle(target), 3, &LstarOptions::default()).unwrap();
        assert!(!r.converged);
        assert!(r.queries_spent <= 3);
        assert!(r.examples.is_consistent(&r.dfa));
    }
}
