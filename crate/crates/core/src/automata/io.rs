//! Plain-text DFA files and Graphviz export.
//!
//! ```text
//! alphabet: red,yellow,blue,green
//! states: 4
//! initial: 0
//! accepting: 2
//! 0 red -> 3
//! 0 yellow -> 2
//! ...
//! ```
//!
//! Lines starting with `#` are comments. Missing transitions are routed to a
//! fresh rejecting sink state appended after the declared states.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Alphabet, Dfa, DfaError};

pub fn write_dfa(dfa: &Dfa) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alphabet: {}", dfa.alphabet.names().join(","));
    let _ = writeln!(out, "states: {}", dfa.num_states());
    let _ = writeln!(out, "initial: {}", dfa.initial);
    let acc: Vec<String> = dfa.accepting_states().map(|q| q.to_string()).collect();
    let _ = writeln!(out, "accepting: {}", acc.join(","));
    for q in 0..dfa.num_states() {
        for s in dfa.alphabet.symbols() {
            let _ = writeln!(out, "{q} {} -> {}", dfa.alphabet.name(s), dfa.next(q, s));
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> DfaError {
    DfaError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_state(text: &str, line: usize) -> Result<usize, DfaError> {
    text.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("expected a state index, found '{}'", text.trim())))
}

pub fn parse_dfa(text: &str) -> Result<Dfa, DfaError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut num_states: Option<usize> = None;
    let mut initial: Option<usize> = None;
    let mut accepting: Option<Vec<usize>> = None;
    let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((lhs, rhs)) = line.split_once("->") {
            let alpha = alphabet
                .as_ref()
                .ok_or_else(|| parse_err(line_no, "transition before alphabet header"))?;
            let mut parts = lhs.split_whitespace();
            let (Some(from), Some(sym), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(parse_err(line_no, "expected `from symbol -> to`"));
            };
            let from = parse_state(from, line_no)?;
            let sym = alpha
                .symbol(sym)
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            let to = parse_state(rhs, line_no)?;
            if edges.insert((from, sym.index()), to).is_some() {
                return Err(parse_err(line_no, "duplicate transition"));
            }
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(parse_err(line_no, format!("unrecognised line '{line}'")));
        };
        let value = value.trim();
        match key.trim() {
            "alphabet" => {
                let names: Vec<&str> = value.split(',').map(str::trim).collect();
                alphabet = Some(Alphabet::new(names).map_err(|e| parse_err(line_no, e.to_string()))?);
            }
            "states" => num_states = Some(parse_state(value, line_no)?),
            "initial" => initial = Some(parse_state(value, line_no)?),
            "accepting" => {
                let states = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|v| parse_state(v, line_no))
                        .collect::<Result<_, _>>()?
                };
                accepting = Some(states);
            }
            other => return Err(parse_err(line_no, format!("unknown header '{other}'"))),
        }
    }

    let alphabet = alphabet.ok_or_else(|| parse_err(0, "missing `alphabet:` header"))?;
    let n = num_states.ok_or_else(|| parse_err(0, "missing `states:` header"))?;
    let initial = initial.ok_or_else(|| parse_err(0, "missing `initial:` header"))?;
    let accepting = accepting.unwrap_or_default();
    if n == 0 {
        return Err(DfaError::NoStates);
    }
    for (&(from, _), &to) in &edges {
        for q in [from, to] {
            if q >= n {
                return Err(DfaError::InvalidState {
                    state: q,
                    num_states: n,
                });
            }
        }
    }
    let k = alphabet.len();
    let complete = edges.len() == n * k;
    let sink = n;
    let total = if complete { n } else { n + 1 };
    let rows = (0..total)
        .map(|q| {
            (0..k)
                .map(|s| edges.get(&(q, s)).copied().unwrap_or(sink))
                .collect()
        })
        .collect();
    Dfa::new(alphabet, rows, initial, accepting)
}

/// Graphviz rendering: accepting states get a double periphery and the
/// initial state an incoming edge labelled `start`. Parallel edges are merged
/// into one edge with a comma-separated label.
pub fn to_dot(dfa: &Dfa) -> String {
    let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n");
    out.push_str("  __start [shape=none, label=\"\"];\n");
    let _ = writeln!(out, "  __start -> {} [label=\"start\"];", dfa.initial);
    for q in 0..dfa.num_states() {
        if dfa.is_accepting(q) {
            let _ = writeln!(out, "  {q} [peripheries=2];");
        } else {
            let _ = writeln!(out, "  {q};");
        }
    }
    for q in 0..dfa.num_states() {
        let mut grouped: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for s in dfa.alphabet.symbols() {
            grouped
                .entry(dfa.next(q, s))
                .or_default()
                .push(dfa.alphabet.name(s));
        }
        for (to, labels) in grouped {
            let _ = writeln!(out, "  {q} -> {to} [label=\"{}\"];", labels.join(","));
        }
    }
    out.push_str("}\n");
    out
}
