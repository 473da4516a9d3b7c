use super::{IdentifyError, LabeledExamples};
use crate::automata::{Alphabet, Symbol, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeLabel {
    Accept,
    Reject,
    Unlabeled,
}

#[derive(Clone, Debug)]
pub struct AptaNode {
    pub parent: Option<(usize, Symbol)>,
    pub children: Vec<Option<usize>>,
    pub label: NodeLabel,
}

/// Prefix tree of all example words; node 0 is the empty word.
#[derive(Clone, Debug)]
pub struct Apta {
    alphabet: Alphabet,
    nodes: Vec<AptaNode>,
}

impl Apta {
    pub fn new(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        Self {
            alphabet,
            nodes: vec![AptaNode {
                parent: None,
                children: vec![None; k],
                label: NodeLabel::Unlabeled,
            }],
        }
    }

    /// Adds `word` with the given label, failing if the word was already
    /// added with the opposite label.
    pub fn insert(&mut self, word: &[Symbol], positive: bool) -> Result<usize, IdentifyError> {
        self.alphabet.check(word)?;
        let k = self.alphabet.len();
        let mut v = 0;
        for &s in word {
            v = match self.nodes[v].children[s.index()] {
                Some(c) => c,
                None => {
                    let c = self.nodes.len();
                    self.nodes.push(AptaNode {
                        parent: Some((v, s)),
                        children: vec![None; k],
                        label: NodeLabel::Unlabeled,
                    });
                    self.nodes[v].children[s.index()] = Some(c);
                    c
                }
            };
        }
        let label = if positive {
            NodeLabel::Accept
        } else {
            NodeLabel::Reject
        };
        match self.nodes[v].label {
            NodeLabel::Unlabeled => self.nodes[v].label = label,
            existing if existing != label => {
                return Err(IdentifyError::Contradiction(self.alphabet.render(word)));
            }
            _ => {}
        }
        Ok(v)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[AptaNode] {
        &self.nodes
    }

    pub fn label(&self, node: usize) -> NodeLabel {
        self.nodes[node].label
    }

    /// The word spelled by the path from the root to `node`.
    pub fn word(&self, mut node: usize) -> Word {
        let mut rev = Vec::new();
        while let Some((p, s)) = self.nodes[node].parent {
            rev.push(s);
            node = p;
        }
        rev.reverse();
        Word::from(rev)
    }
}

/// Prefix-tree acceptor for `examples`: positive word ends are labelled
/// accept, negative word ends reject.
pub fn build_apta(examples: &LabeledExamples) -> Result<Apta, IdentifyError> {
    let mut apta = Apta::new(examples.alphabet().clone());
    for (w, positive) in examples.iter() {
        apta.insert(w, positive)?;
    }
    Ok(apta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_word_positive_is_single_root() {
        let a = Alphabet::new(["0"]).unwrap();
        let ex = LabeledExamples::from_words(a, [Word::empty()], []).unwrap();
        let apta = build_apta(&ex).unwrap();
        assert_eq!(apta.len(), 1);
        assert_eq!(apta.label(0), NodeLabel::Accept);
    }

    #[test]
    fn two_children() {
        let a = Alphabet::new(["red", "yellow", "blue", "green"]).unwrap();
        let ex = LabeledExamples::parse(a, &["yellow"], &["blue"]).unwrap();
        let apta = build_apta(&ex).unwrap();
        assert_eq!(apta.len(), 3);
        let labels: Vec<NodeLabel> = (1..3).map(|v| apta.label(v)).collect();
        assert!(labels.contains(&NodeLabel::Accept) && labels.contains(&NodeLabel::Reject));
        assert_eq!(apta.label(0), NodeLabel::Unlabeled);
    }

    #[test]
    fn conflicting_insert() {
        let a = Alphabet::new(["x"]).unwrap();
        let mut apta = Apta::new(a.clone());
        let w = a.parse_word("x,x").unwrap();
        apta.insert(&w, true).unwrap();
        assert!(matches!(apta.insert(&w, false), Err(IdentifyError::Contradiction(_))));
        assert_eq!(apta.word(2), w);
    }
}
