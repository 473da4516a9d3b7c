//! The seven Tomita grammars over `{0, 1}`: hand-built automata, reference
//! predicates, their natural-language prompts and a query benchmark.

use std::io::Write;

use serde::Serialize;

use crate::automata::{Alphabet, Dfa, Symbol, Word};
use crate::diss::Backend;
use crate::identify::LabeledExamples;
use crate::learner::{
    guess_dfa_vl, lstar, EquivalenceStrategy, LstarOptions, MembershipOracle, OracleError, QueryRecord,
    UnsureMapping, VersionSpaceOptions,
};
use crate::oracle::{measure_transcript, HallucinationStats, TaskPrompt};

const META_PROMPT: &str = include_str!("../../fixtures/tomita/meta_prompt.txt");
const RULE_SLOT: &str = "{rule}";
const UNSURE_SENTENCE: &str = "If you are unsure \nor do not know the answer, respond \"unsure\". \n";
const GRAMMAR_PROMPTS: [&str; 7] = [
    include_str!("../../fixtures/tomita/grammar_1.txt"),
    include_str!("../../fixtures/tomita/grammar_2.txt"),
    include_str!("../../fixtures/tomita/grammar_3.txt"),
    include_str!("../../fixtures/tomita/grammar_4.txt"),
    include_str!("../../fixtures/tomita/grammar_5.txt"),
    include_str!("../../fixtures/tomita/grammar_6.txt"),
    include_str!("../../fixtures/tomita/grammar_7.txt"),
];

/// Default number of membership queries per grammar.
pub const DEFAULT_QUERIES: usize = 30;
pub const DEFAULT_EQUIVALENCE_SAMPLES: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TomitaError {
    #[error("Tomita grammars are numbered 1 to 7, got {0}")]
    Index(usize),
}

#[derive(Clone, Debug)]
pub struct TomitaGrammar {
    pub index: usize,
    pub dfa: Dfa,
    /// Rule description with its good and bad example lists.
    pub prompt: &'static str,
}

impl TomitaGrammar {
    /// The example words listed in the prompt.
    pub fn prompt_examples(&self) -> LabeledExamples {
        let a = Alphabet::binary();
        let mut ex = LabeledExamples::new(a.clone());
        let mut label = None;
        for line in self.prompt.lines() {
            let line = line.trim();
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("good examples") {
                label = Some(true);
            } else if lower.starts_with("bad examples") {
                label = Some(false);
            } else if let (Some(l), Some(item)) = (label, line.strip_prefix("- ")) {
                let w = a.parse_word(item).expect("prompt examples are binary words");
                ex.insert(w, l).expect("prompt examples are consistent");
            }
        }
        ex
    }

    /// The full prompt sent to a language model.
    pub fn task_prompt(&self, allow_unsure: bool) -> TaskPrompt {
        TaskPrompt::bare(meta_prompt(self.prompt, allow_unsure), allow_unsure)
    }
}

/// The meta-prompt with `rule` filled in. Without `allow_unsure` the
/// sentence offering "unsure" is left out.
pub fn meta_prompt(rule: &str, allow_unsure: bool) -> String {
    let frame = if allow_unsure {
        META_PROMPT.to_owned()
    } else {
        META_PROMPT.replacen(UNSURE_SENTENCE, "", 1)
    };
    frame.replacen(RULE_SLOT, rule.trim_end(), 1)
}

fn check(index: usize) -> Result<(), TomitaError> {
    if (1..=7).contains(&index) {
        Ok(())
    } else {
        Err(TomitaError::Index(index))
    }
}

fn binary_dfa(n: usize, accepting: &[usize], next: impl Fn(usize, bool) -> usize) -> Dfa {
    Dfa::from_fn(Alphabet::binary(), n, 0, accepting.iter().copied(), |q, s| next(q, s.0 == 1))
        .expect("well-formed Tomita automaton")
}

/// Hand-built minimal automaton of grammar `index`. Every automaton with a
/// failure state uses the highest state number for it.
pub fn tomita_dfa(index: usize) -> Result<Dfa, TomitaError> {
    check(index)?;
    Ok(match index {
        // 1*
        1 => binary_dfa(2, &[0], |q, one| if q == 0 && one { 0 } else { 1 }),
        // (10)*; 0 between pairs, 1 after a 1.
        2 => binary_dfa(3, &[0], |q, one| match (q, one) {
            (0, true) => 1,
            (1, false) => 0,
            _ => 2,
        }),
        // 0 even 1-run, 1 odd 1-run, 2 odd 0-run after an odd 1-run,
        // 3 even 0-run after an odd 1-run.
        3 => binary_dfa(5, &[0, 1, 3], |q, one| match (q, one) {
            (0, true) => 1,
            (0, false) => 0,
            (1, true) => 0,
            (1, false) => 2,
            (2, true) => 4,
            (2, false) => 3,
            (3, true) => 1,
            (3, false) => 2,
            _ => 4,
        }),
        // State counts trailing zeros.
        4 => binary_dfa(4, &[0, 1, 2], |q, one| match (q, one) {
            (3, _) => 3,
            (_, true) => 0,
            (q, false) => q + 1,
        }),
        // Bit 0 is the parity of zeros, bit 1 the parity of ones.
        5 => binary_dfa(4, &[0], |q, one| if one { q ^ 2 } else { q ^ 1 }),
        // (#0 - #1) mod 3.
        6 => binary_dfa(3, &[0], |q, one| if one { (q + 2) % 3 } else { (q + 1) % 3 }),
        // Phase of 1*0*1*0*.
        7 => binary_dfa(5, &[0, 1, 2, 3], |q, one| match (q, one) {
            (0, true) | (2, true) => q,
            (1, false) | (3, false) => q,
            (4, _) => 4,
            (q, _) => q + 1,
        }),
        _ => unreachable!(),
    })
}

/// Reference membership test of grammar `index`, written directly from its
/// definition.
pub fn tomita_predicate(index: usize, word: &[Symbol]) -> Result<bool, TomitaError> {
    check(index)?;
    let bits: Vec<bool> = word.iter().map(|s| s.0 == 1).collect();
    let zeros = bits.iter().filter(|&&b| !b).count();
    let ones = bits.len() - zeros;
    Ok(match index {
        1 => zeros == 0,
        2 => bits.len() % 2 == 0 && bits.chunks(2).all(|p| p == [true, false]),
        3 => {
            let mut runs: Vec<(bool, usize)> = Vec::new();
            for &b in &bits {
                match runs.last_mut() {
                    Some((v, n)) if *v == b => *n += 1,
                    _ => runs.push((b, 1)),
                }
            }
            !runs
                .windows(2)
                .any(|w| w[0].0 && !w[1].0 && w[0].1 % 2 == 1 && w[1].1 % 2 == 1)
        }
        4 => !bits.windows(3).any(|w| w == [false, false, false]),
        5 => zeros % 2 == 0 && ones % 2 == 0,
        6 => (zeros as i64 - ones as i64).rem_euclid(3) == 0,
        7 => bits.windows(2).filter(|w| *w == [false, true]).count() <= 1,
        _ => unreachable!(),
    })
}

pub fn tomita_grammar(index: usize) -> Result<TomitaGrammar, TomitaError> {
    Ok(TomitaGrammar {
        index,
        dfa: tomita_dfa(index)?,
        prompt: GRAMMAR_PROMPTS[index - 1],
    })
}

pub fn all_grammars() -> Vec<TomitaGrammar> {
    (1..=7).map(|i| tomita_grammar(i).expect("index in range")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchResult {
    pub grammar: usize,
    pub records: Vec<QueryRecord>,
    pub stats: HallucinationStats,
    #[serde(skip)]
    pub dfa: Option<Dfa>,
    pub equivalent: bool,
    /// Set when the oracle or learner failed; the other fields then hold
    /// whatever was gathered before.
    pub error: Option<String>,
}

impl BenchResult {
    pub fn learned_states(&self) -> Option<usize> {
        self.dfa.as_ref().map(Dfa::num_states)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BenchOptions {
    pub backend: Backend,
    pub allow_unsure: bool,
    /// Membership queries per grammar.
    pub queries: usize,
    /// Random words an L* equivalence check labels after candidate
    /// elimination finds no competitor.
    pub equivalence_samples: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Lstar,
            allow_unsure: false,
            queries: DEFAULT_QUERIES,
            equivalence_samples: DEFAULT_EQUIVALENCE_SAMPLES,
            seed: 0,
        }
    }
}

/// Oracle for one grammar; a fresh one is built per grammar.
pub type OracleFactory<'a> =
    dyn Fn(&TomitaGrammar, bool) -> Result<Box<dyn MembershipOracle + Send>, OracleError> + Sync + 'a;

/// Learns every grammar from its own oracle session with a per-grammar query
/// budget. Grammars run on separate threads; results are in grammar order.
/// Failures are recorded per grammar and do not stop the others.
pub fn run_tomita_bench(factory: &OracleFactory<'_>, opts: &BenchOptions) -> Vec<BenchResult> {
    let grammars = all_grammars();
    std::thread::scope(|scope| {
        let handles: Vec<_> = grammars
            .iter()
            .map(|g| scope.spawn(move || bench_one(factory, g, opts)))
            .collect();
        handles
            .into_iter()
            .zip(&grammars)
            .map(|(h, g)| {
                h.join().unwrap_or_else(|_| BenchResult {
                    grammar: g.index,
                    records: Vec::new(),
                    stats: HallucinationStats::default(),
                    dfa: None,
                    equivalent: false,
                    error: Some("benchmark thread panicked".into()),
                })
            })
            .collect()
    })
}

/// Candidate elimination against competitors one state larger than the
/// hypothesis, then random sampling. Elimination alone cannot refute a
/// one-state hypothesis that agrees with every short word (Tomita 4 and 7).
pub fn lstar_equivalence(samples: usize) -> EquivalenceStrategy {
    EquivalenceStrategy::Mixed {
        ce_fraction: 1.0,
        slack: 1,
        floor: 0,
        samples,
        sampler: Default::default(),
    }
}

fn bench_one(factory: &OracleFactory<'_>, g: &TomitaGrammar, opts: &BenchOptions) -> BenchResult {
    let mut result = BenchResult {
        grammar: g.index,
        records: Vec::new(),
        stats: HallucinationStats::default(),
        dfa: None,
        equivalent: false,
        error: None,
    };
    let mut oracle = match factory(g, opts.allow_unsure) {
        Ok(o) => o,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    let seed = LabeledExamples::new(Alphabet::binary());
    let seed_rng = opts.seed.wrapping_add(g.index as u64);
    let report = match opts.backend {
        Backend::Lstar => lstar(
            &seed,
            &mut *oracle,
            opts.queries,
            &LstarOptions {
                equivalence: lstar_equivalence(opts.equivalence_samples),
                unsure_as: UnsureMapping::False,
                seed: seed_rng,
                ..LstarOptions::default()
            },
        ),
        Backend::VersionSpace => guess_dfa_vl(
            &seed,
            &mut *oracle,
            opts.queries,
            &VersionSpaceOptions {
                seed: seed_rng,
                ..VersionSpaceOptions::default()
            },
        ),
    };
    match report {
        Ok(r) => {
            result.stats = measure_transcript(&r.transcript, &g.dfa).expect("transcript words are binary");
            result.equivalent = r.dfa.equivalent(&g.dfa).expect("same alphabet");
            result.records = r.transcript;
            result.dfa = Some(r.dfa);
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

pub const BENCH_CSV_HEADER: &str = "query,word,answer,truth,verdict";

/// One row per fresh query: the word, the oracle's answer, the true label
/// and whether the answer was correct, incorrect or unsure.
pub fn bench_csv(result: &BenchResult) -> String {
    let g = tomita_dfa(result.grammar).expect("result of a valid grammar");
    let a = g.alphabet();
    let mut out = format!("{BENCH_CSV_HEADER}\n");
    for (i, r) in result.records.iter().filter(|r| r.fresh).enumerate() {
        let word: Vec<Symbol> = r.word.iter().map(|n| a.symbol(n).expect("binary word")).collect();
        let truth = g.accepts(&word);
        let verdict = match r.answer.label() {
            None => "unsure",
            Some(l) if l == truth => "correct",
            Some(_) => "incorrect",
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            a.render_compact(&word),
            r.answer,
            truth,
            verdict
        ));
    }
    out
}

pub const SUMMARY_HEADER: &str = "grammar,states,correct,incorrect,unsure,hallucination_rate,equivalent";

/// Per-grammar answer counts, in the layout of the Correct/Incorrect/Unsure
/// tables.
pub fn bench_summary(results: &[BenchResult]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in results {
        let states = r.learned_states().map_or_else(String::new, |n| n.to_string());
        out.push_str(&format!(
            "Tomita {},{},{},{},{},{:.2},{}\n",
            r.grammar,
            states,
            r.stats.correct,
            r.stats.incorrect,
            r.stats.unsure,
            100.0 * r.stats.rate(),
            r.equivalent
        ));
    }
    out
}

/// Writes `tomita_<i>.csv` per grammar and `summary.csv` into `dir`.
pub fn write_bench(dir: &std::path::Path, results: &[BenchResult]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for r in results {
        std::fs::write(dir.join(format!("tomita_{}.csv", r.grammar)), bench_csv(r))?;
    }
    let mut f = std::fs::File::create(dir.join("summary.csv"))?;
    f.write_all(bench_summary(results).as_bytes())
}

/// Words of the canonical order up to `max_len`, for exhaustive checks.
pub fn words_up_to(max_len: usize) -> impl Iterator<Item = Word> {
    crate::automata::all_words(&Alphabet::binary(), max_len)
}
