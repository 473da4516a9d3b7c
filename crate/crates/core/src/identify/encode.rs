//! APTA-colouring encoding of "is there an `n`-state DFA consistent with
//! these examples", with breadth-first symmetry breaking.
//!
//! Variables:
//! * `x[v][i]`: APTA node `v` is mapped to state `i`;
//! * `y[a][i][j]`: state `i` moves to `j` on symbol `a`;
//! * `z[i]`: state `i` is accepting;
//! * `t`, `p`, `m`: auxiliaries pinning states to BFS discovery order, so
//!   every solution is the canonical numbering of a DFA whose states are all
//!   reachable.

use std::fmt::Write as _;

use super::apta::{Apta, NodeLabel};
use crate::automata::{Alphabet, Dfa};

/// A propositional formula in conjunctive normal form, DIMACS-style literals.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> i32 {
        self.num_vars += 1;
        self.num_vars as i32
    }

    pub fn add(&mut self, clause: impl Into<Vec<i32>>) {
        self.clauses.push(clause.into());
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    fn at_most_one(&mut self, lits: &[i32]) {
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                self.add([-a, -b]);
            }
        }
    }

    fn exactly_one(&mut self, lits: &[i32]) {
        self.add(lits.to_vec());
        self.at_most_one(lits);
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

/// The clauses for one state count `n` plus the variable layout needed to
/// decode models.
#[derive(Clone, Debug)]
pub struct DfaEncoding {
    pub cnf: Cnf,
    alphabet: Alphabet,
    n: usize,
    x_base: i32,
    y_base: i32,
    z_base: i32,
}

impl DfaEncoding {
    pub fn num_states(&self) -> usize {
        self.n
    }

    fn x(&self, node: usize, state: usize) -> i32 {
        self.x_base + (node * self.n + state) as i32
    }

    fn y(&self, symbol: usize, from: usize, to: usize) -> i32 {
        self.y_base + ((symbol * self.n + from) * self.n + to) as i32
    }

    fn z(&self, state: usize) -> i32 {
        self.z_base + state as i32
    }

    /// Reads the DFA out of a model (`model[v]` is the value of variable `v`;
    /// index 0 unused).
    pub fn decode(&self, model: &[bool]) -> Dfa {
        let n = self.n;
        Dfa::from_fn(
            self.alphabet.clone(),
            n,
            0,
            (0..n).filter(|&i| model[self.z(i) as usize]),
            |i, a| {
                (0..n)
                    .find(|&j| model[self.y(a.index(), i, j) as usize])
                    .expect("transition function is total in every model")
            },
        )
        .expect("decoded table is well formed")
    }

    /// Adds a clause excluding exactly the `(y, z)` assignment of `dfa`,
    /// which must use this encoding's state numbering.
    pub fn block_solution(&mut self, dfa: &Dfa) {
        assert_eq!(dfa.num_states(), self.n, "DFA was not decoded from this encoding");
        let mut clause = Vec::with_capacity(self.n * (self.alphabet.len() + 1));
        for i in 0..self.n {
            for a in self.alphabet.symbols() {
                clause.push(-self.y(a.index(), i, dfa.next(i, a)));
            }
            let z = self.z(i);
            clause.push(if dfa.is_accepting(i) { -z } else { z });
        }
        self.cnf.add(clause);
    }

    /// Requires the encoded DFA to disagree with `other` on at least one
    /// word. The witness word is encoded explicitly, with length bounded by
    /// `n + m - 2`, which covers the shortest distinguishing word of any
    /// `n`-state and `m`-state pair.
    pub fn require_difference(&mut self, other: &Dfa) {
        assert_eq!(other.alphabet(), &self.alphabet);
        let n = self.n;
        let m = other.num_states();
        let k = self.alphabet.len();
        let max_len = (n + m).saturating_sub(2);
        let cnf = &mut self.cnf;

        let sym: Vec<Vec<i32>> = (0..max_len).map(|_| (0..k).map(|_| cnf.new_var()).collect()).collect();
        let end: Vec<i32> = (0..=max_len).map(|_| cnf.new_var()).collect();
        let mine: Vec<Vec<i32>> = (0..=max_len).map(|_| (0..n).map(|_| cnf.new_var()).collect()).collect();
        let theirs: Vec<Vec<i32>> = (0..=max_len).map(|_| (0..m).map(|_| cnf.new_var()).collect()).collect();

        for row in &sym {
            cnf.exactly_one(row);
        }
        cnf.exactly_one(&end);
        cnf.add([mine[0][0]]);
        cnf.add([theirs[0][other.initial()]]);
        for t in 0..max_len {
            for a in 0..k {
                for i in 0..n {
                    for j in 0..n {
                        let y = self.y_base + ((a * n + i) * n + j) as i32;
                        cnf.add([-mine[t][i], -sym[t][a], -y, mine[t + 1][j]]);
                    }
                }
                for q in 0..m {
                    let next = other.next(q, crate::automata::Symbol(a as u16));
                    cnf.add([-theirs[t][q], -sym[t][a], theirs[t + 1][next]]);
                }
            }
        }
        for t in 0..=max_len {
            for i in 0..n {
                let z = self.z_base + i as i32;
                for q in 0..m {
                    let lit = if other.is_accepting(q) { -z } else { z };
                    cnf.add([-end[t], -mine[t][i], -theirs[t][q], lit]);
                }
            }
        }
    }
}

/// Clauses whose models are exactly the BFS-numbered, fully reachable
/// `n`-state DFAs consistent with the APTA labels.
pub fn encode(apta: &Apta, n: usize) -> DfaEncoding {
    assert!(n >= 1, "need at least one state");
    let k = apta.alphabet().len();
    let nodes = apta.len();
    let mut cnf = Cnf::new();
    let x_base = 1;
    for _ in 0..nodes * n {
        cnf.new_var();
    }
    let y_base = cnf.num_vars() as i32 + 1;
    for _ in 0..k * n * n {
        cnf.new_var();
    }
    let z_base = cnf.num_vars() as i32 + 1;
    for _ in 0..n {
        cnf.new_var();
    }
    let mut enc = DfaEncoding {
        cnf,
        alphabet: apta.alphabet().clone(),
        n,
        x_base,
        y_base,
        z_base,
    };

    // Node colouring.
    for v in 0..nodes {
        let lits: Vec<i32> = (0..n).map(|i| enc.x(v, i)).collect();
        enc.cnf.exactly_one(&lits);
    }
    let root = enc.x(0, 0);
    enc.cnf.add([root]);

    // Labels.
    for v in 0..nodes {
        match apta.label(v) {
            NodeLabel::Accept => {
                for i in 0..n {
                    let c = [-enc.x(v, i), enc.z(i)];
                    enc.cnf.add(c);
                }
            }
            NodeLabel::Reject => {
                for i in 0..n {
                    let c = [-enc.x(v, i), -enc.z(i)];
                    enc.cnf.add(c);
                }
            }
            NodeLabel::Unlabeled => {}
        }
    }

    // Total, functional transitions.
    for a in 0..k {
        for i in 0..n {
            let lits: Vec<i32> = (0..n).map(|j| enc.y(a, i, j)).collect();
            enc.cnf.exactly_one(&lits);
        }
    }

    // Tree edges follow transitions.
    for (c, node) in apta.nodes().iter().enumerate() {
        let Some((p, s)) = node.parent else { continue };
        for i in 0..n {
            for j in 0..n {
                let (xp, xc, y) = (enc.x(p, i), enc.x(c, j), enc.y(s.index(), i, j));
                enc.cnf.add([-xp, -xc, y]);
                enc.cnf.add([-xp, -y, xc]);
            }
        }
    }

    if n > 1 {
        add_bfs_symmetry_breaking(&mut enc, k);
    }
    enc
}

fn add_bfs_symmetry_breaking(enc: &mut DfaEncoding, k: usize) {
    let n = enc.n;
    // t[i][j] (i < j): some symbol leads from i to j.
    let mut t = vec![vec![0i32; n]; n];
    // p[j][i] (i < j): i is the smallest state with an edge into j.
    let mut p = vec![vec![0i32; n]; n];
    // m[a][i][j] (i < j): a is the smallest symbol from i to j.
    let mut m = vec![vec![vec![0i32; n]; n]; k];
    for i in 0..n {
        for j in i + 1..n {
            t[i][j] = enc.cnf.new_var();
            p[j][i] = enc.cnf.new_var();
            for row in m.iter_mut() {
                row[i][j] = enc.cnf.new_var();
            }
        }
    }

    for i in 0..n {
        for j in i + 1..n {
            let mut clause = vec![-t[i][j]];
            for a in 0..k {
                let y = enc.y(a, i, j);
                clause.push(y);
                enc.cnf.add([-y, t[i][j]]);
            }
            enc.cnf.add(clause);
        }
    }

    for j in 1..n {
        for i in 0..j {
            enc.cnf.add([-p[j][i], t[i][j]]);
            let mut define = vec![-t[i][j], p[j][i]];
            for kk in 0..i {
                enc.cnf.add([-p[j][i], -t[kk][j]]);
                define.push(t[kk][j]);
            }
            enc.cnf.add(define);
        }
        let alo: Vec<i32> = (0..j).map(|i| p[j][i]).collect();
        enc.cnf.add(alo);
    }

    // Parents are non-decreasing in BFS order.
    for j in 1..n.saturating_sub(1) {
        for i in 0..j {
            for kk in 0..i {
                enc.cnf.add([-p[j][i], -p[j + 1][kk]]);
            }
        }
    }

    if k > 1 {
        for i in 0..n {
            for j in i + 1..n {
                for a in 0..k {
                    let y = enc.y(a, i, j);
                    enc.cnf.add([-m[a][i][j], y]);
                    let mut define = vec![-y, m[a][i][j]];
                    for b in 0..a {
                        let yb = enc.y(b, i, j);
                        enc.cnf.add([-m[a][i][j], -yb]);
                        define.push(yb);
                    }
                    enc.cnf.add(define);
                }
            }
        }
        // Siblings sharing a parent are ordered by their smallest symbol.
        for j in 1..n.saturating_sub(1) {
            for i in 0..j {
                for a in 0..k {
                    for b in 0..a {
                        enc.cnf
                            .add([-p[j][i], -p[j + 1][i], -m[a][i][j], -m[b][i][j + 1]]);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identify::{build_apta, sat::SatSession, LabeledExamples};
    use crate::automata::Word;

    fn solve(enc: &DfaEncoding) -> Option<Dfa> {
        let mut s = SatSession::new();
        s.solve(&enc.cnf).map(|m| enc.decode(&m))
    }

    #[test]
    fn one_state_cannot_accept_and_reject() {
        let a = Alphabet::new(["0"]).unwrap();
        let ex = LabeledExamples::from_words(a.clone(), [Word::empty()], [a.parse_word("0").unwrap()]).unwrap();
        assert!(solve(&encode(&build_apta(&ex).unwrap(), 1)).is_none());
        assert!(solve(&encode(&build_apta(&ex).unwrap(), 2)).is_some());
    }

    #[test]
    fn one_state_universal() {
        let a = Alphabet::new(["0"]).unwrap();
        let ex = LabeledExamples::from_words(a.clone(), [Word::empty(), a.parse_word("0").unwrap()], []).unwrap();
        let d = solve(&encode(&build_apta(&ex).unwrap(), 1)).unwrap();
        assert_eq!(d, Dfa::universal(a));
    }

    #[test]
    fn blocking_the_only_solution() {
        let a = Alphabet::new(["0"]).unwrap();
        let ex = LabeledExamples::from_words(a.clone(), [Word::empty()], []).unwrap();
        let mut enc = encode(&build_apta(&ex).unwrap(), 1);
        let d = solve(&enc).unwrap();
        assert!(d.is_accepting(0));
        enc.block_solution(&d);
        assert!(solve(&enc).is_none());
    }

    #[test]
    fn decoded_dfas_are_bfs_canonical() {
        let a = Alphabet::new(["a", "b"]).unwrap();
        let ex = LabeledExamples::parse(a, &["a,b", "b,b,a"], &["a", "b", "a,a,b"]).unwrap();
        let apta = build_apta(&ex).unwrap();
        for n in 1..=4 {
            if let Some(d) = solve(&encode(&apta, n)) {
                assert_eq!(d.canonical(), d);
                assert!(ex.is_consistent(&d));
            }
        }
    }

    #[test]
    fn difference_constraint_excludes_equivalents() {
        let a = Alphabet::new(["a", "b"]).unwrap();
        let ex = LabeledExamples::parse(a.clone(), &["a"], &["b"]).unwrap();
        let apta = build_apta(&ex).unwrap();
        let mut enc = encode(&apta, 2);
        let d1 = solve(&enc).unwrap();
        enc.require_difference(&d1);
        let d2 = solve(&enc).unwrap();
        assert!(!d1.equivalent(&d2).unwrap());
    }

    #[test]
    fn dimacs_header() {
        let mut cnf = Cnf::new();
        let v = cnf.new_var();
        cnf.add([v]);
        assert_eq!(cnf.to_dimacs(), "p cnf 1 1\n1 0\n");
    }
}
