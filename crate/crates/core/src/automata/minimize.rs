use std::collections::HashMap;

use super::Dfa;

/// Moore partition refinement on the reachable part, followed by canonical
/// BFS renumbering of the quotient.
pub(super) fn minimize(dfa: &Dfa) -> Dfa {
    let reach = dfa.canonical();
    let n = reach.num_states();
    let k = reach.alphabet.len();

    let mut class: Vec<usize> = reach.accepting.iter().map(|&a| a as usize).collect();
    let mut num_classes = normalize(&mut class);
    loop {
        let mut signatures: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut next = vec![0; n];
        for q in 0..n {
            let mut sig = Vec::with_capacity(k + 1);
            sig.push(class[q]);
            sig.extend(reach.delta[q * k..(q + 1) * k].iter().map(|&t| class[t]));
            let fresh = signatures.len();
            next[q] = *signatures.entry(sig).or_insert(fresh);
        }
        let count = signatures.len();
        class = next;
        if count == num_classes {
            break;
        }
        num_classes = count;
    }

    let mut delta = vec![0; num_classes * k];
    let mut accepting = vec![false; num_classes];
    for q in 0..n {
        let c = class[q];
        accepting[c] = reach.accepting[q];
        for s in 0..k {
            delta[c * k + s] = class[reach.delta[q * k + s]];
        }
    }
    Dfa {
        alphabet: reach.alphabet.clone(),
        initial: class[reach.initial],
        accepting,
        delta,
    }
    .canonical()
}

/// Relabels class ids to 0..m in order of first appearance; returns m.
fn normalize(class: &mut [usize]) -> usize {
    let mut map: HashMap<usize, usize> = HashMap::new();
    for c in class.iter_mut() {
        let fresh = map.len();
        *c = *map.entry(*c).or_insert(fresh);
    }
    map.len()
}

#[cfg(test)]
mod tests {
    use crate::automata::{all_words, Alphabet, Dfa};

    #[test]
    fn merges_duplicate_states() {
        let a = Alphabet::new(["a", "b"]).unwrap();
        // States 1 and 2 are copies of each other; 3 is unreachable.
        let d = Dfa::new(
            a.clone(),
            vec![vec![1, 2], vec![1, 0], vec![2, 0], vec![3, 3]],
            0,
            [1, 2, 3],
        )
        .unwrap();
        let m = d.minimize();
        assert_eq!(m.num_states(), 2);
        for w in all_words(&a, 7) {
            assert_eq!(m.accepts(&w), d.accepts(&w));
        }
    }

    #[test]
    fn idempotent() {
        let a = Alphabet::new(["a", "b"]).unwrap();
        let d = Dfa::new(a, vec![vec![1, 0], vec![2, 0], vec![2, 2]], 0, [2]).unwrap();
        let m = d.minimize();
        assert_eq!(m.minimize(), m);
        assert_eq!(m.num_states(), 3);
    }
}
