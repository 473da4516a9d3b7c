//! Complete deterministic finite automata over small named alphabets.
//!
//! Every [`Dfa`] is total: the transition table has one entry for each
//! `(state, symbol)` pair and all of them point at valid states. Values are
//! immutable once built, so they can be shared freely between threads.

mod io;
mod minimize;
mod words;

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

pub use io::{parse_dfa, to_dot, write_dfa};
pub use words::{accepted_words, all_words, count_accepted, sample_accepted, WordSampler};

/// Errors raised while building or combining automata.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DfaError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("alphabet contains duplicate symbol '{0}'")]
    DuplicateSymbol(String),
    #[error("symbol name '{0}' is empty or contains reserved characters")]
    BadSymbolName(String),
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("symbol index {index} outside alphabet of size {size}")]
    SymbolOutOfRange { index: usize, size: usize },
    #[error("state {state} is outside 0..{num_states}")]
    InvalidState { state: usize, num_states: usize },
    #[error("a DFA needs at least one state")]
    NoStates,
    #[error("state {state} has {found} transitions, expected {expected}")]
    TransitionArity { state: usize, found: usize, expected: usize },
    #[error("automata are defined over different alphabets")]
    AlphabetMismatch,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Index of a symbol inside its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u16);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered, duplicate-free list of symbol names.
///
/// The order is canonical: it drives tie-breaking in every search over words
/// and is preserved by serialization. Cloning is cheap.
#[derive(Clone)]
pub struct Alphabet {
    names: Arc<[String]>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, DfaError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(DfaError::EmptyAlphabet);
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty()
                || name
                    .chars()
                    .any(|c| c == ',' || c == '[' || c == ']' || c.is_whitespace())
            {
                return Err(DfaError::BadSymbolName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(DfaError::DuplicateSymbol(name.clone()));
            }
        }
        if names.len() > u16::MAX as usize {
            return Err(DfaError::SymbolOutOfRange {
                index: names.len(),
                size: u16::MAX as usize,
            });
        }
        Ok(Self {
            names: names.into(),
        })
    }

    /// The binary alphabet `{0, 1}` used by the Tomita grammars.
    pub fn binary() -> Self {
        Self::new(["0", "1"]).expect("valid alphabet")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, symbol: Symbol) -> &str {
        &self.names[symbol.index()]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + Clone {
        (0..self.names.len() as u16).map(Symbol)
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol, DfaError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Symbol(i as u16))
            .ok_or_else(|| DfaError::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        symbol.index() < self.names.len()
    }

    /// Checks that every symbol of `word` belongs to this alphabet.
    pub fn check(&self, word: &[Symbol]) -> Result<(), DfaError> {
        match word.iter().find(|s| !self.contains(**s)) {
            Some(s) => Err(DfaError::SymbolOutOfRange {
                index: s.index(),
                size: self.len(),
            }),
            None => Ok(()),
        }
    }

    /// Parses a comma-separated list of symbol names, optionally wrapped in
    /// square brackets. `""` and `"[]"` are the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word, DfaError> {
        let text = text.trim();
        let inner = text
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(text)
            .trim();
        if inner.is_empty() {
            return Ok(Word::empty());
        }
        inner
            .split(',')
            .map(|name| self.symbol(name.trim()))
            .collect()
    }

    /// Renders a word as `[a, b, c]`.
    pub fn render(&self, word: &[Symbol]) -> String {
        let mut out = String::from("[");
        for (i, s) in word.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(self.name(*s));
        }
        out.push(']');
        out
    }

    /// Renders a word as `a,b,c` with no brackets or spaces.
    pub fn render_compact(&self, word: &[Symbol]) -> String {
        word.iter()
            .map(|s| self.name(*s))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.names, &other.names) || self.names == other.names
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names.iter()).finish()
    }
}

/// A finite sequence of symbols. The empty word is valid.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn push(&mut self, symbol: Symbol) {
        self.0.push(symbol);
    }

    pub fn concat(&self, suffix: &[Symbol]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(suffix);
        Word(v)
    }

    /// Shorter words first, then lexicographic by symbol index.
    pub fn length_lex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.0
    }
}

impl std::ops::Deref for Word {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl std::borrow::Borrow<[Symbol]> for Word {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Self(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Self(v.to_vec())
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.iter().map(|s| s.0))
            .finish()
    }
}

/// Replaces every maximal run of equal adjacent symbols by one symbol.
pub fn stutter_collapse(word: &[Symbol]) -> Word {
    let mut out: Vec<Symbol> = Vec::with_capacity(word.len());
    for &s in word {
        if out.last() != Some(&s) {
            out.push(s);
        }
    }
    Word(out)
}

/// How [`size`] measures an automaton.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeKind {
    #[default]
    StateCount,
    EncodingBits,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeMeasure {
    pub kind: SizeKind,
    pub value: f64,
}

/// Size of the minimal automaton for `dfa`'s language.
///
/// `EncodingBits` counts a transition table of `n * |alphabet|` entries of
/// `ceil(log2 n)` bits each plus one accepting bit per state.
pub fn size(dfa: &Dfa, kind: SizeKind) -> SizeMeasure {
    let min = dfa.minimize();
    let n = min.num_states();
    let value = match kind {
        SizeKind::StateCount => n as f64,
        SizeKind::EncodingBits => {
            let bits = usize::BITS - (n - 1).leading_zeros();
            (n * min.alphabet.len() * bits as usize + n) as f64
        }
    };
    SizeMeasure { kind, value }
}

/// A complete deterministic finite automaton.
#[derive(Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: usize,
    accepting: Vec<bool>,
    /// Row-major `num_states x alphabet.len()` table.
    delta: Vec<usize>,
}

impl fmt::Debug for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[usize]> = self.delta.chunks(self.alphabet.len()).collect();
        f.debug_struct("Dfa")
            .field("alphabet", &self.alphabet)
            .field("initial", &self.initial)
            .field("accepting", &self.accepting_states().collect::<Vec<_>>())
            .field("transitions", &rows)
            .finish()
    }
}

impl Dfa {
    /// Builds a DFA from one transition row per state.
    pub fn new(
        alphabet: Alphabet,
        transitions: Vec<Vec<usize>>,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self, DfaError> {
        let n = transitions.len();
        if n == 0 {
            return Err(DfaError::NoStates);
        }
        let k = alphabet.len();
        let mut delta = Vec::with_capacity(n * k);
        for (state, row) in transitions.iter().enumerate() {
            if row.len() != k {
                return Err(DfaError::TransitionArity {
                    state,
                    found: row.len(),
                    expected: k,
                });
            }
            for &t in row {
                if t >= n {
                    return Err(DfaError::InvalidState {
                        state: t,
                        num_states: n,
                    });
                }
            }
            delta.extend_from_slice(row);
        }
        Self::from_parts(alphabet, n, initial, accepting, delta)
    }

    /// Builds an `n`-state DFA whose transitions are given by `next`.
    pub fn from_fn(
        alphabet: Alphabet,
        num_states: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        mut next: impl FnMut(usize, Symbol) -> usize,
    ) -> Result<Self, DfaError> {
        let rows = (0..num_states)
            .map(|q| alphabet.symbols().map(|s| next(q, s)).collect())
            .collect();
        Self::new(alphabet, rows, initial, accepting)
    }

    fn from_parts(
        alphabet: Alphabet,
        num_states: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        delta: Vec<usize>,
    ) -> Result<Self, DfaError> {
        if initial >= num_states {
            return Err(DfaError::InvalidState {
                state: initial,
                num_states,
            });
        }
        let mut acc = vec![false; num_states];
        for q in accepting {
            if q >= num_states {
                return Err(DfaError::InvalidState {
                    state: q,
                    num_states,
                });
            }
            acc[q] = true;
        }
        Ok(Self {
            alphabet,
            initial,
            accepting: acc,
            delta,
        })
    }

    /// One state accepting every word.
    pub fn universal(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        Self {
            alphabet,
            initial: 0,
            accepting: vec![true],
            delta: vec![0; k],
        }
    }

    /// One state accepting nothing.
    pub fn empty(alphabet: Alphabet) -> Self {
        let mut d = Self::universal(alphabet);
        d.accepting[0] = false;
        d
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter_map(|(q, &a)| a.then_some(q))
    }

    #[inline]
    pub fn next(&self, state: usize, symbol: Symbol) -> usize {
        self.delta[state * self.alphabet.len() + symbol.index()]
    }

    /// `δ*(state, word)`. Panics if a symbol is outside the alphabet; use
    /// [`Dfa::try_run`] for unchecked input.
    pub fn run_from(&self, state: usize, word: &[Symbol]) -> usize {
        word.iter().fold(state, |q, &s| {
            assert!(self.alphabet.contains(s), "symbol {s:?} outside alphabet");
            self.next(q, s)
        })
    }

    pub fn run(&self, word: &[Symbol]) -> usize {
        self.run_from(self.initial, word)
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        self.accepting[self.run(word)]
    }

    pub fn try_run(&self, word: &[Symbol]) -> Result<usize, DfaError> {
        self.alphabet.check(word)?;
        Ok(self.run(word))
    }

    pub fn try_accepts(&self, word: &[Symbol]) -> Result<bool, DfaError> {
        Ok(self.accepting[self.try_run(word)?])
    }

    /// Same automaton with accepting and rejecting states swapped.
    pub fn complement(&self) -> Dfa {
        let mut d = self.clone();
        d.accepting.iter_mut().for_each(|a| *a = !*a);
        d
    }

    /// Synchronous product restricted to reachable state pairs. A pair
    /// accepts iff `combine(accepts1, accepts2)`.
    pub fn product(
        &self,
        other: &Dfa,
        combine: impl Fn(bool, bool) -> bool,
    ) -> Result<Dfa, DfaError> {
        if self.alphabet != other.alphabet {
            return Err(DfaError::AlphabetMismatch);
        }
        let k = self.alphabet.len();
        let m = other.num_states();
        let mut index = vec![usize::MAX; self.num_states() * m];
        let mut pairs = vec![(self.initial, other.initial)];
        index[self.initial * m + other.initial] = 0;
        let mut delta = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            for s in self.alphabet.symbols() {
                let (p2, q2) = (self.next(p, s), other.next(q, s));
                let slot = &mut index[p2 * m + q2];
                if *slot == usize::MAX {
                    *slot = pairs.len();
                    pairs.push((p2, q2));
                }
                delta.push(*slot);
            }
            i += 1;
        }
        debug_assert_eq!(delta.len(), pairs.len() * k);
        let accepting = pairs
            .iter()
            .map(|&(p, q)| combine(self.accepting[p], other.accepting[q]))
            .collect();
        Ok(Dfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting,
            delta,
        })
    }

    /// Accepts `L1 ⊖ L2`.
    pub fn symmetric_difference(&self, other: &Dfa) -> Result<Dfa, DfaError> {
        self.product(other, |a, b| a != b)
    }

    /// Breadth-first search from the initial state visiting symbols in
    /// canonical order. Returns, for every state, the length-lex smallest
    /// word reaching it (`None` if unreachable).
    pub fn access_words(&self) -> Vec<Option<Word>> {
        let mut words: Vec<Option<Word>> = vec![None; self.num_states()];
        words[self.initial] = Some(Word::empty());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for s in self.alphabet.symbols() {
                let t = self.next(q, s);
                if words[t].is_none() {
                    let mut w = words[q].clone().expect("visited");
                    w.push(s);
                    words[t] = Some(w);
                    queue.push_back(t);
                }
            }
        }
        words
    }

    /// States reachable from the initial state, in BFS discovery order.
    pub fn reachable_states(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for s in self.alphabet.symbols() {
                let t = self.next(q, s);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    /// A shortest accepted word, ties broken by canonical symbol order.
    pub fn shortest_accepted(&self) -> Option<Word> {
        let mut words: Vec<Option<Word>> = vec![None; self.num_states()];
        words[self.initial] = Some(Word::empty());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            if self.accepting[q] {
                return words[q].take();
            }
            for s in self.alphabet.symbols() {
                let t = self.next(q, s);
                if words[t].is_none() {
                    let mut w = words[q].clone().expect("visited");
                    w.push(s);
                    words[t] = Some(w);
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// `true` iff the automaton accepts no word.
    pub fn is_empty_language(&self) -> bool {
        self.reachable_states().iter().all(|&q| !self.accepting[q])
    }

    /// Renumbers reachable states in BFS order (canonical symbol order) and
    /// drops unreachable ones. Does not merge equivalent states.
    pub fn canonical(&self) -> Dfa {
        let order = self.reachable_states();
        let mut rename = vec![usize::MAX; self.num_states()];
        for (new, &old) in order.iter().enumerate() {
            rename[old] = new;
        }
        let k = self.alphabet.len();
        let mut delta = Vec::with_capacity(order.len() * k);
        for &old in &order {
            for s in self.alphabet.symbols() {
                delta.push(rename[self.next(old, s)]);
            }
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
            delta,
        }
    }

    /// Language-equivalent DFA with the fewest states, canonically numbered.
    pub fn minimize(&self) -> Dfa {
        minimize::minimize(self)
    }

    /// `true` iff both automata accept the same language.
    pub fn equivalent(&self, other: &Dfa) -> Result<bool, DfaError> {
        Ok(distinguishing_word(self, other)?.is_none())
    }

    /// Accepts exactly `word` and nothing else (a chain plus a sink).
    pub fn singleton(alphabet: Alphabet, word: &[Symbol]) -> Result<Dfa, DfaError> {
        alphabet.check(word)?;
        let n = word.len() + 2;
        let sink = n - 1;
        Dfa::from_fn(alphabet, n, 0, [word.len()], |q, s| {
            if q < word.len() && word[q] == s {
                q + 1
            } else {
                sink
            }
        })
    }
}

/// Shortest (then lexicographically smallest) word accepted by exactly one of
/// the automata, or `None` when their languages coincide.
pub fn distinguishing_word(d1: &Dfa, d2: &Dfa) -> Result<Option<Word>, DfaError> {
    Ok(d1.symmetric_difference(d2)?.shortest_accepted())
}

/// Uniformly random word among the shortest words in `L1 ⊖ L2`.
pub fn sample_distinguishing_word<R: rand::Rng + ?Sized>(
    d1: &Dfa,
    d2: &Dfa,
    rng: &mut R,
) -> Result<Option<Word>, DfaError> {
    let diff = d1.symmetric_difference(d2)?;
    Ok(match diff.shortest_accepted() {
        Some(w) => sample_accepted(&diff, w.len(), rng),
        None => None,
    })
}
