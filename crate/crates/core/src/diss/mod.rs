//! Demonstration-informed specification search.
//!
//! Each iteration learns a DFA from the current example hypothesis (asking
//! the oracle within a query budget), scores it by energy, accepts or
//! rejects the hypothesis by simulated annealing, and conjectures a
//! relabelled word that should make the demonstrations less surprising.
//! The lowest-energy DFA seen is returned.

mod conjecture;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use conjecture::{candidate_flips, conjecture_examples, Conjecture, ConjectureParams, Flip};

use crate::automata::{Alphabet, Dfa, DfaError, Symbol, Word};
use crate::identify::{IdentifyError, LabeledExamples};
use crate::learner::{
    guess_dfa_vl, lstar, Answer, EquivalenceStrategy, LearnerError, LearnerReport, LstarOptions, MembershipOracle,
    OracleError, Provenance, QueryRecord, UnsureMapping, VersionSpaceOptions,
};
use crate::planner::{energy, EnergyParams, EnergyReport, PlanError};
use crate::world::{Demonstration, GridWorld, WorldError};
use crate::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum DissError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Dfa(#[from] DfaError),
    #[error("planning horizon is shorter than a demonstration")]
    HorizonTooShort,
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    #[serde(alias = "vl")]
    VersionSpace,
    Lstar,
}

/// Settings of one search run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DissConfig {
    pub max_iterations: usize,
    /// Oracle queries allowed per iteration.
    pub query_budget: usize,
    /// Share of each budget spent on distinguishing queries.
    pub ce_fraction: f64,
    pub lambda: f64,
    /// `None`: longest demonstration plus the planner's default slack.
    pub horizon: Option<usize>,
    pub accept_reward: f64,
    pub backend: Backend,
    /// Recorded for the oracle set-up; the search itself does not read it.
    pub allow_unsure: bool,
    /// Recorded for the oracle set-up; the search itself does not read it.
    pub all_rules: bool,
    pub seed: u64,
    pub initial_temperature: f64,
    pub temperature_decay: f64,
    /// Exploration probability is this times the current temperature.
    pub exploration: f64,
    pub top_k: usize,
    pub max_states: usize,
}

impl Default for DissConfig {
    fn default() -> Self {
        Self {
            max_iterations: 30,
            query_budget: 0,
            ce_fraction: 1.0,
            lambda: crate::planner::DEFAULT_LAMBDA,
            horizon: None,
            accept_reward: crate::planner::DEFAULT_ACCEPT_REWARD,
            backend: Backend::VersionSpace,
            allow_unsure: false,
            all_rules: true,
            seed: 0,
            initial_temperature: 1.0,
            temperature_decay: 0.9,
            exploration: 0.2,
            top_k: 3,
            max_states: 8,
        }
    }
}

impl DissConfig {
    pub fn validate(&self) -> Result<(), DissError> {
        let bad = |m: &str| Err(DissError::Config(m.to_owned()));
        if !(0.0..=1.0).contains(&self.ce_fraction) {
            return bad("ce_fraction must lie in [0, 1]");
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if !(self.accept_reward > 0.0) {
            return bad("accept_reward must be positive");
        }
        if self.horizon == Some(0) {
            return bad("horizon must be at least 1");
        }
        if !(self.initial_temperature > 0.0) || !(0.0..=1.0).contains(&self.temperature_decay) {
            return bad("temperature must start positive and decay by a factor in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.exploration) {
            return bad("exploration must lie in [0, 1]");
        }
        if self.max_states == 0 {
            return bad("max_states must be at least 1");
        }
        Ok(())
    }

    pub fn energy_params<T: Scalar>(&self) -> EnergyParams<T> {
        EnergyParams {
            lambda: T::of(self.lambda),
            horizon: self.horizon,
            accept_reward: T::of(self.accept_reward),
        }
    }
}

/// Example hypothesis under annealing, plus the labels it may never flip.
#[derive(Clone, Debug)]
pub struct ExampleBuffer<T> {
    current: LabeledExamples,
    protected: LabeledExamples,
    history: Vec<(LabeledExamples, T)>,
    temperature: T,
}

impl<T: Scalar> ExampleBuffer<T> {
    pub fn new(initial: LabeledExamples, protected: LabeledExamples, temperature: T) -> Self {
        Self {
            current: initial,
            protected,
            history: Vec::new(),
            temperature,
        }
    }

    pub fn current(&self) -> &LabeledExamples {
        &self.current
    }

    pub fn protected(&self) -> &LabeledExamples {
        &self.protected
    }

    /// Accepted hypotheses and their energies, oldest first.
    pub fn history(&self) -> &[(LabeledExamples, T)] {
        &self.history
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn current_energy(&self) -> Option<T> {
        self.history.last().map(|(_, e)| *e)
    }

    /// Adds an oracle-stated label; conjectures may not contradict it.
    fn protect(&mut self, word: Word, label: bool) {
        if self.protected.label(&word).is_none() {
            self.protected.relabel(word, label);
        }
    }

    fn accept(&mut self, examples: LabeledExamples, energy: T) {
        assert!(
            examples.positive().is_disjoint(examples.negative()),
            "hypothesis must be consistent"
        );
        self.current = examples.clone();
        self.history.push((examples, energy));
    }

    fn cool(&mut self, decay: T) {
        self.temperature = self.temperature * decay;
    }
}

/// One search iteration.
#[derive(Clone, Debug)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub candidate: Dfa,
    pub energy: EnergyReport<T>,
    /// Examples the learner ended with (proposal plus oracle labels).
    pub examples: LabeledExamples,
    pub queries_spent: usize,
    pub accepted: bool,
    pub best_so_far: T,
    /// Word relabelled for the next iteration, if any.
    pub conjectured: Option<Flip<T>>,
}

#[derive(Clone, Debug)]
pub struct DissReport<T> {
    pub iterations: Vec<IterationRecord<T>>,
    pub best_dfa: Dfa,
    pub best_energy: EnergyReport<T>,
    pub ground_truth_energy: Option<EnergyReport<T>>,
    pub transcript: Vec<QueryRecord>,
}

impl<T: Scalar> DissReport<T> {
    pub fn total_queries(&self) -> usize {
        self.iterations.iter().map(|r| r.queries_spent).sum()
    }

    /// Best-so-far energy after each iteration.
    pub fn best_trace(&self) -> Vec<T> {
        self.iterations.iter().map(|r| r.best_so_far).collect()
    }

    /// Whether the best energy reached the ground-truth energy within
    /// `iterations` iterations; `None` without a ground truth.
    pub fn reached_ground_truth_within(&self, iterations: usize) -> Option<bool> {
        let gt = self.ground_truth_energy?.total;
        Some(self.iterations.iter().take(iterations).any(|r| r.best_so_far <= gt))
    }
}

pub const ENERGY_TRACE_HEADER: &str = "iteration,candidate_energy,best_energy,ground_truth_energy";

/// CSV with one row per iteration; the last column is empty without a
/// ground truth.
pub fn energy_trace<T: Scalar>(report: &DissReport<T>) -> String {
    let mut out = format!("{ENERGY_TRACE_HEADER}\n");
    let gt = report
        .ground_truth_energy
        .map(|e| format!("{:.9}", e.total.as_f64()))
        .unwrap_or_default();
    for r in &report.iterations {
        out.push_str(&format!(
            "{},{:.9},{:.9},{}\n",
            r.iteration,
            r.energy.total.as_f64(),
            r.best_so_far.as_f64(),
            gt
        ));
    }
    out
}

/// Per-candidate energy rows (`iteration,candidate,nll,size_term,total`).
pub fn energy_rows<T: Scalar>(report: &DissReport<T>) -> String {
    let mut out = format!("{}\n", EnergyReport::<T>::CSV_HEADER);
    for r in &report.iterations {
        out.push_str(&r.energy.csv_row(r.iteration, r.iteration));
        out.push('\n');
    }
    out
}

/// Counts fresh inner calls, so spending is known even when a learner
/// session fails part-way.
struct Counted<'a> {
    inner: &'a mut dyn MembershipOracle,
    calls: usize,
}

impl MembershipOracle for Counted<'_> {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        self.calls += 1;
        self.inner.query(word)
    }

    fn lookup(&self, word: &[Symbol]) -> Option<(Answer, Provenance)> {
        self.inner.lookup(word)
    }

    fn is_live(&self) -> bool {
        self.inner.is_live()
    }
}

fn learn(
    config: &DissConfig,
    proposal: &LabeledExamples,
    oracle: &mut dyn MembershipOracle,
    budget: usize,
    seed: u64,
) -> Result<LearnerReport, LearnerError> {
    match config.backend {
        Backend::VersionSpace => guess_dfa_vl(
            proposal,
            oracle,
            budget,
            &VersionSpaceOptions {
                max_states: config.max_states,
                ce_fraction: config.ce_fraction,
                seed,
                ..Default::default()
            },
        ),
        Backend::Lstar => {
            let samples = budget - (budget as f64 * config.ce_fraction).round() as usize;
            let equivalence = if samples == 0 {
                EquivalenceStrategy::CandidateElimination { slack: 1, floor: 0 }
            } else {
                EquivalenceStrategy::Mixed {
                    ce_fraction: config.ce_fraction,
                    slack: 1,
                    floor: 0,
                    samples,
                    sampler: Default::default(),
                }
            };
            lstar(
                proposal,
                oracle,
                budget,
                &LstarOptions {
                    equivalence,
                    unsure_as: UnsureMapping::False,
                    max_states: 4 * config.max_states,
                    seed,
                },
            )
        }
    }
}

/// Runs the search. `protected` holds labels conjectures may never
/// contradict (the oracle's own seed examples); with a zero query budget
/// the oracle is never consulted and `protected` is ignored.
pub fn run_diss<T: Scalar>(
    config: &DissConfig,
    world: &GridWorld,
    demos: &[Demonstration],
    alphabet: &Alphabet,
    oracle: &mut dyn MembershipOracle,
    protected: &LabeledExamples,
    ground_truth: Option<&Dfa>,
) -> Result<DissReport<T>, DissError> {
    config.validate()?;
    if demos.is_empty() {
        return Err(DissError::Config("at least one demonstration is required".into()));
    }
    let params: EnergyParams<T> = config.energy_params();
    let horizon = params.horizon_for(demos);
    if let Some(d) = demos.iter().find(|d| d.len() > horizon) {
        return Err(PlanError::DemoTooLong { len: d.len(), horizon }.into());
    }
    let ground_truth_energy = ground_truth
        .map(|d| energy(d, world, demos, &params))
        .transpose()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let guarded = if config.query_budget > 0 {
        protected.clone()
    } else {
        LabeledExamples::new(alphabet.clone())
    };
    let mut buffer = ExampleBuffer::new(LabeledExamples::new(alphabet.clone()), guarded, T::of(config.initial_temperature));
    let mut proposal = buffer.current().clone();
    let mut accepted_dfa: Option<Dfa> = None;
    let mut budget = config.query_budget;
    let mut iterations: Vec<IterationRecord<T>> = Vec::new();
    let mut transcript = Vec::new();
    let mut best: Option<(Dfa, EnergyReport<T>)> = None;

    for it in 0..config.max_iterations {
        let learner_seed = config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(it as u64);
        let mut counted = Counted {
            inner: &mut *oracle,
            calls: 0,
        };
        let mut report = match learn(config, &proposal, &mut counted, budget, learner_seed) {
            Err(LearnerError::Oracle(OracleError::Unavailable(msg))) => {
                log::warn!("oracle unavailable at iteration {it}: {msg}; continuing without queries");
                budget = 0;
                learn(config, &proposal, &mut counted, 0, learner_seed)?
            }
            Err(LearnerError::Identify(IdentifyError::BoundExceeded { max_states })) => {
                // the proposal plus oracle labels needs too many states; fall
                // back to the accepted hypothesis without further queries
                log::info!("iteration {it}: no DFA within {max_states} states, reverting the proposal");
                proposal = buffer.current().clone();
                learn(config, &proposal, &mut counted, 0, learner_seed)?
            }
            other => other?,
        };
        report.queries_spent = counted.calls;
        if budget > 0 {
            for r in &report.transcript {
                if let Some(label) = r.answer.label() {
                    let word: Word = r.word.iter().map(|n| alphabet.symbol(n)).collect::<Result<_, _>>()?;
                    buffer.protect(word, label);
                }
            }
        }
        assert!(
            report.examples.is_consistent(&report.dfa),
            "learned DFA must be consistent with its examples"
        );
        let e = energy(&report.dfa, world, demos, &params)?;

        let accepted = match buffer.current_energy() {
            None => true,
            Some(cur) if e.total < cur => true,
            Some(cur) => {
                let p = (-(e.total - cur) / buffer.temperature()).exp().as_f64();
                rng.gen_bool(p.clamp(0.0, 1.0))
            }
        };
        if accepted {
            buffer.accept(report.examples.clone(), e.total);
            accepted_dfa = Some(report.dfa.clone());
        }
        if best.as_ref().is_none_or(|(_, b)| e.total < b.total) {
            best = Some((report.dfa.clone(), e));
        }
        buffer.cool(T::of(config.temperature_decay));

        let cparams = ConjectureParams {
            energy: params,
            top_k: config.top_k,
            explore_probability: T::of(config.exploration) * buffer.temperature(),
            max_states: config.max_states,
        };
        let candidate = accepted_dfa.as_ref().expect("first iteration is always accepted");
        let next = conjecture_examples(candidate, world, demos, &buffer, &cparams, &mut rng)?;
        log::debug!(
            "iteration {it}: energy {:.4} accepted {accepted} flip {:?}",
            e.total.as_f64(),
            next.flip.as_ref().map(|f| (alphabet.render(&f.word), f.label))
        );
        proposal = next.examples;

        transcript.extend(report.transcript);
        iterations.push(IterationRecord {
            iteration: it,
            candidate: report.dfa,
            energy: e,
            examples: report.examples,
            queries_spent: report.queries_spent,
            accepted,
            best_so_far: best.as_ref().expect("set above").1.total,
            conjectured: next.flip,
        });
    }

    let (best_dfa, best_energy) = match best {
        Some(b) => b,
        None => {
            let d = crate::identify::minimal_dfa(&LabeledExamples::new(alphabet.clone()), 1)?;
            let e = energy(&d, world, demos, &params)?;
            (d, e)
        }
    };
    Ok(DissReport {
        iterations,
        best_dfa,
        best_energy,
        ground_truth_energy,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::DfaOracle;
    use crate::world::{color_alphabet, ground_truth_dfa, load_world, Action, Cell};

    fn tiny() -> (GridWorld, Vec<Demonstration>) {
        let w = load_world("...y\n.b.g\n....").unwrap();
        let d = Demonstration::from_actions(&w, Cell::new(0, 0), &[Action::Right, Action::Right, Action::Right]).unwrap();
        (w, vec![d])
    }

    #[test]
    fn single_degenerate_iteration() {
        let (w, demos) = tiny();
        let a = color_alphabet();
        let cfg = DissConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let mut o = DfaOracle(ground_truth_dfa());
        let r: DissReport<f64> = run_diss(&cfg, &w, &demos, &a, &mut o, &LabeledExamples::new(a.clone()), None).unwrap();
        assert_eq!(r.iterations.len(), 1);
        assert_eq!(r.best_dfa.num_states(), 1);
        assert_eq!(r.total_queries(), 0);
        let csv = energy_trace(&r);
        assert_eq!(csv.lines().count(), 2);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[1], row[2]);
        assert_eq!(row[3], "");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = DissConfig {
            query_budget: 32,
            backend: Backend::Lstar,
            horizon: Some(20),
            ..Default::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<DissConfig>(&text).unwrap(), cfg);
        let partial: DissConfig = toml::from_str("query_budget = 4\nbackend = \"vl\"").unwrap();
        assert_eq!(partial.query_budget, 4);
        assert_eq!(partial.max_iterations, 30);
        assert!(toml::from_str::<DissConfig>("bogus = 1").is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        for cfg in [
            DissConfig {
                lambda: -1.0,
                ..Default::default()
            },
            DissConfig {
                ce_fraction: 2.0,
                ..Default::default()
            },
            DissConfig {
                horizon: Some(0),
                ..Default::default()
            },
        ] {
            assert!(matches!(cfg.validate(), Err(DissError::Config(_))));
        }
    }
}
