use rand::Rng;

use super::{Alphabet, Dfa, Symbol, Word};

/// Every word of length `<= max_len`, in length-lex order.
pub fn all_words(alphabet: &Alphabet, max_len: usize) -> AcceptedWords {
    accepted_words(&Dfa::universal(alphabet.clone()), max_len)
}

/// Accepted words of length `<= max_len`, in length-lex order. Lazy; dead
/// branches are pruned so the cost is proportional to the output.
pub fn accepted_words(dfa: &Dfa, max_len: usize) -> AcceptedWords {
    let n = dfa.num_states();
    let mut alive = vec![dfa.accepting.clone()];
    for r in 1..=max_len {
        let prev = &alive[r - 1];
        let row = (0..n)
            .map(|q| dfa.alphabet.symbols().any(|s| prev[dfa.next(q, s)]))
            .collect();
        alive.push(row);
    }
    AcceptedWords {
        dfa: dfa.clone(),
        max_len,
        len: 0,
        fresh: true,
        states: Vec::new(),
        word: Vec::new(),
        alive,
    }
}

pub struct AcceptedWords {
    dfa: Dfa,
    max_len: usize,
    len: usize,
    fresh: bool,
    /// `states[i]` is the state after reading `word[..i]`.
    states: Vec<usize>,
    word: Vec<Symbol>,
    alive: Vec<Vec<bool>>,
}

impl AcceptedWords {
    fn alive_after(&self, q: usize, s: Symbol, remaining: usize) -> bool {
        self.alive[remaining][self.dfa.next(q, s)]
    }

    /// Extends the current prefix with the smallest live symbols up to `len`.
    fn descend(&mut self) {
        while self.word.len() < self.len {
            let q = *self.states.last().expect("non-empty");
            let remaining = self.len - self.word.len() - 1;
            let s = self
                .dfa
                .alphabet
                .symbols()
                .find(|&s| self.alive_after(q, s, remaining))
                .expect("live prefix has a live extension");
            self.word.push(s);
            self.states.push(self.dfa.next(q, s));
        }
    }

    /// Moves to the next live prefix of the current length; `false` when the
    /// length is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some(last) = self.word.pop() {
            self.states.pop();
            let q = *self.states.last().expect("initial state present");
            let remaining = self.len - self.word.len() - 1;
            let next = self
                .dfa
                .alphabet
                .symbols()
                .skip(last.index() + 1)
                .find(|&s| self.alive_after(q, s, remaining));
            if let Some(s) = next {
                self.word.push(s);
                self.states.push(self.dfa.next(q, s));
                self.descend();
                return true;
            }
        }
        false
    }
}

impl Iterator for AcceptedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        loop {
            if self.len > self.max_len {
                return None;
            }
            if self.fresh {
                self.fresh = false;
                let init = self.dfa.initial;
                if self.alive[self.len][init] {
                    self.states = vec![init];
                    self.word.clear();
                    self.descend();
                    return Some(Word(self.word.clone()));
                }
            } else if self.backtrack() {
                return Some(Word(self.word.clone()));
            }
            self.len += 1;
            self.fresh = true;
        }
    }
}

/// Number of accepted words of exactly `len` symbols, per starting state
/// (saturating).
fn count_table(dfa: &Dfa, len: usize) -> Vec<Vec<u128>> {
    let n = dfa.num_states();
    let mut table = vec![dfa.accepting.iter().map(|&a| a as u128).collect::<Vec<_>>()];
    for r in 1..=len {
        let prev = &table[r - 1];
        let row = (0..n)
            .map(|q| {
                dfa.alphabet
                    .symbols()
                    .fold(0u128, |acc, s| acc.saturating_add(prev[dfa.next(q, s)]))
            })
            .collect();
        table.push(row);
    }
    table
}

/// Number of accepted words of length exactly `len` (saturating at `u128::MAX`).
pub fn count_accepted(dfa: &Dfa, len: usize) -> u128 {
    count_table(dfa, len)[len][dfa.initial]
}

/// Uniformly random accepted word of length `len`, or `None` if there is none.
pub fn sample_accepted<R: Rng + ?Sized>(dfa: &Dfa, len: usize, rng: &mut R) -> Option<Word> {
    let table = count_table(dfa, len);
    if table[len][dfa.initial] == 0 {
        return None;
    }
    let mut q = dfa.initial;
    let mut word = Vec::with_capacity(len);
    for r in (0..len).rev() {
        let total: u128 = dfa
            .alphabet
            .symbols()
            .fold(0, |acc, s| acc.saturating_add(table[r][dfa.next(q, s)]));
        let mut pick = rng.gen_range(0..total);
        for s in dfa.alphabet.symbols() {
            let c = table[r][dfa.next(q, s)];
            if pick < c {
                word.push(s);
                q = dfa.next(q, s);
                break;
            }
            pick -= c;
        }
    }
    Some(Word(word))
}

/// Random words with geometric length (`P(len = n) = p (1 - p)^n`) and
/// uniform symbols.
#[derive(Clone, Debug)]
pub struct WordSampler {
    pub stop_probability: f64,
    pub max_len: usize,
}

impl Default for WordSampler {
    fn default() -> Self {
        Self {
            stop_probability: 0.25,
            max_len: 64,
        }
    }
}

impl WordSampler {
    pub fn sample<R: Rng + ?Sized>(&self, alphabet: &Alphabet, rng: &mut R) -> Word {
        let mut word = Word::empty();
        while word.len() < self.max_len && !rng.gen_bool(self.stop_probability.clamp(0.0, 1.0)) {
            word.push(Symbol(rng.gen_range(0..alphabet.len()) as u16));
        }
        word
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    #[test]
    fn all_words_in_length_lex_order() {
        let words: Vec<String> = all_words(&ab(), 2).map(|w| ab().render_compact(&w)).collect();
        assert_eq!(words, ["", "a", "b", "a,a", "a,b", "b,a", "b,b"]);
        assert_eq!(all_words(&ab(), 10).count(), (1 << 11) - 1);
    }

    #[test]
    fn accepted_words_matches_filter() {
        // Words ending in `b`.
        let d = Dfa::new(ab(), vec![vec![0, 1], vec![0, 1]], 0, [1]).unwrap();
        let lazy: Vec<Word> = accepted_words(&d, 6).collect();
        let filtered: Vec<Word> = all_words(&ab(), 6).filter(|w| d.accepts(w)).collect();
        assert_eq!(lazy, filtered);
        assert_eq!(count_accepted(&d, 6), 32);
    }

    #[test]
    fn empty_language_yields_nothing() {
        assert_eq!(accepted_words(&Dfa::empty(ab()), 8).count(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_accepted(&Dfa::empty(ab()), 3, &mut rng), None);
    }

    #[test]
    fn sampling_is_uniform_enough() {
        let d = Dfa::universal(ab());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hist = [0usize; 4];
        for _ in 0..4000 {
            let w = sample_accepted(&d, 2, &mut rng).unwrap();
            hist[w[0].index() * 2 + w[1].index()] += 1;
        }
        assert!(hist.iter().all(|&c| (800..1200).contains(&c)), "{hist:?}");
    }

    #[test]
    fn geometric_lengths() {
        let sampler = WordSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mean = (0..4000)
            .map(|_| sampler.sample(&ab(), &mut rng).len() as f64)
            .sum::<f64>()
            / 4000.0;
        // (1 - p) / p = 3
        assert!((mean - 3.0).abs() < 0.3, "{mean}");
    }
}
