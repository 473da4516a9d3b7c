//! Reference implementations the library is checked against. Each one is
//! written from the definition, as directly as possible, and shares no code
//! with the crate beyond its data types.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use regex::Regex;
use specsearch::automata::{Alphabet, Dfa, Symbol, Word};
use specsearch::identify::LabeledExamples;
use specsearch::world::{Action, Cell, Color, GridWorld};

/// Tomita languages as regular expressions over `0`/`1` strings, counting
/// checks for the two that are not star-free.
pub fn tomita_reference(index: usize, word: &[Symbol]) -> bool {
    let s: String = word.iter().map(|x| if x.0 == 1 { '1' } else { '0' }).collect();
    let zeros = s.chars().filter(|&c| c == '0').count() as i64;
    let ones = s.len() as i64 - zeros;
    let full = |re: &str| Regex::new(re).unwrap().is_match(&s);
    match index {
        1 => full("^1*$"),
        2 => full("^(10)*$"),
        // forbidden: a maximal odd 1-block directly followed by a maximal odd 0-block
        3 => !full("(^|0)(11)*1(00)*0(1|$)"),
        4 => !s.contains("000"),
        5 => zeros % 2 == 0 && ones % 2 == 0,
        6 => (zeros - ones).rem_euclid(3) == 0,
        7 => full("^1*0*1*0*$"),
        _ => panic!("no Tomita grammar {index}"),
    }
}

/// Smallest DFA size up to `max` consistent with `ex`, by trying every
/// transition table with start state 0. Acceptance sets are implied: a table
/// works iff no state is reached by both a positive and a negative word.
pub fn brute_force_min_states(ex: &LabeledExamples, max: usize) -> Option<usize> {
    let k = ex.alphabet().len();
    let words: Vec<(Vec<usize>, bool)> =
        ex.iter().map(|(w, l)| (w.symbols().iter().map(|s| s.index()).collect(), l)).collect();
    for n in 1..=max {
        let cells = n * k;
        let mut table = vec![0usize; cells];
        loop {
            let mut label = vec![None; n];
            let ok = words.iter().all(|(w, l)| {
                let q = w.iter().fold(0, |q, &a| table[q * k + a]);
                match label[q] {
                    None => {
                        label[q] = Some(*l);
                        true
                    }
                    Some(x) => x == *l,
                }
            });
            if ok {
                return Some(n);
            }
            // odometer over all n^(n*k) tables
            let mut i = 0;
            while i < cells {
                table[i] += 1;
                if table[i] < n {
                    break;
                }
                table[i] = 0;
                i += 1;
            }
            if i == cells {
                break;
            }
        }
    }
    None
}

/// Random examples over a 1- or 2-letter alphabet: at most `max_examples`
/// words of length at most `max_len`, each labelled at random.
pub fn random_examples(rng: &mut impl Rng, max_examples: usize, max_len: usize) -> LabeledExamples {
    let alphabet = if rng.gen_bool(0.5) {
        Alphabet::binary()
    } else {
        Alphabet::new(["a"]).unwrap()
    };
    let mut ex = LabeledExamples::new(alphabet.clone());
    let count = rng.gen_range(1..=max_examples);
    for _ in 0..count {
        let len = rng.gen_range(0..=max_len);
        let w: Vec<Symbol> = (0..len).map(|_| Symbol(rng.gen_range(0..alphabet.len()) as u16)).collect();
        let w = Word::from(w);
        if ex.label(w.symbols()).is_none() {
            ex.insert(w, rng.gen_bool(0.5)).unwrap();
        }
    }
    ex
}

pub const SLIP: f64 = 1.0 / 32.0;

fn clamp_move(w: usize, h: usize, c: Cell, a: Action) -> Cell {
    let (x, y) = (c.x as i64, c.y as i64);
    let (nx, ny) = match a {
        Action::Up => (x, y - 1),
        Action::Down => (x, y + 1),
        Action::Left => (x - 1, y),
        Action::Right => (x + 1, y),
    };
    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
        c
    } else {
        Cell::new(nx as usize, ny as usize)
    }
}

/// Dynamics: the intended move, except that with probability `SLIP` the
/// wind pushes the agent down instead.
pub fn outcomes(world: &GridWorld, c: Cell, a: Action) -> Vec<(Cell, f64)> {
    let main = clamp_move(world.width(), world.height(), c, a);
    let wind = clamp_move(world.width(), world.height(), c, Action::Down);
    if main == wind {
        vec![(main, 1.0)]
    } else {
        vec![(main, 1.0 - SLIP), (wind, SLIP)]
    }
}

/// Colours seen along `cells`, uncoloured tiles skipped and repeats merged.
pub fn collapsed_colors(world: &GridWorld, cells: &[Cell]) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = Vec::new();
    for &c in cells {
        if let Some(col) = world.color(c) {
            let s = Symbol(Color::ALL.iter().position(|&x| x == col).unwrap() as u16);
            if out.last() != Some(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// Soft-optimal planning by enumerating paths: the value of a history is the
/// log-sum-exp over actions of the expected value of its extensions, and a
/// finished history earns `reward` when the DFA accepts its colours.
pub struct PathPlanner<'a> {
    pub world: &'a GridWorld,
    pub dfa: &'a Dfa,
    pub reward: f64,
    memo: HashMap<Vec<Cell>, f64>,
}

impl<'a> PathPlanner<'a> {
    pub fn new(world: &'a GridWorld, dfa: &'a Dfa, reward: f64) -> Self {
        Self {
            world,
            dfa,
            reward,
            memo: HashMap::new(),
        }
    }

    fn q(&mut self, path: &[Cell], left: usize, a: Action) -> f64 {
        let here = *path.last().unwrap();
        outcomes(self.world, here, a)
            .into_iter()
            .map(|(c, p)| {
                let mut next = path.to_vec();
                next.push(c);
                p * self.value(&next, left - 1)
            })
            .sum()
    }

    /// Value of a history with `left` steps to go.
    pub fn value(&mut self, path: &[Cell], left: usize) -> f64 {
        if left == 0 {
            let word = collapsed_colors(self.world, path);
            return if self.dfa.accepts(&word) { self.reward } else { 0.0 };
        }
        if let Some(&v) = self.memo.get(path) {
            return v;
        }
        let qs: Vec<f64> = Action::ALL.iter().map(|&a| self.q(path, left, a)).collect();
        let m = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let v = m + qs.iter().map(|q| (q - m).exp()).sum::<f64>().ln();
        self.memo.insert(path.to_vec(), v);
        v
    }

    /// π(a | history).
    pub fn prob(&mut self, path: &[Cell], left: usize, a: Action) -> f64 {
        (self.q(path, left, a) - self.value(path, left)).exp()
    }

    /// Product of the action probabilities along a demonstration.
    pub fn demo_probability(&mut self, start: Cell, steps: &[(Action, Cell)], horizon: usize) -> f64 {
        let mut path = vec![start];
        let mut p = 1.0;
        for (t, &(a, c)) in steps.iter().enumerate() {
            p *= self.prob(&path, horizon - t, a);
            path.push(c);
        }
        p
    }
}
