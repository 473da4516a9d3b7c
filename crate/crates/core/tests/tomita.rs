mod common;

use specsearch::identify::LabeledExamples;
use specsearch::learner::{lstar, DfaOracle, LstarOptions, UnsureMapping};
use specsearch::tomita::{
    all_grammars, lstar_equivalence, tomita_predicate, words_up_to, DEFAULT_EQUIVALENCE_SAMPLES,
};
use specsearch::automata::Alphabet;

#[test]
fn dfas_match_reference_languages_to_length_12() {
    for g in all_grammars() {
        for w in words_up_to(12) {
            let want = common::tomita_reference(g.index, &w);
            assert_eq!(g.dfa.accepts(&w), want, "Tomita {} on {:?}", g.index, w);
            assert_eq!(tomita_predicate(g.index, &w).unwrap(), want, "Tomita {} on {:?}", g.index, w);
        }
    }
}

#[test]
fn dfas_are_minimal() {
    for g in all_grammars() {
        assert_eq!(g.dfa.minimize().num_states(), g.dfa.num_states(), "Tomita {}", g.index);
    }
}

/// Every listed prompt word agrees with the reference language except the
/// fifth grammar's `1,0,0,1`, which has two of each symbol.
#[test]
fn prompt_examples_agree_except_known_conflict() {
    let mut disagreements = Vec::new();
    let mut total = 0;
    for g in all_grammars() {
        let ex = g.prompt_examples();
        for (w, label) in ex.iter() {
            total += 1;
            if g.dfa.accepts(w) != label {
                disagreements.push((g.index, Alphabet::binary().render_compact(w)));
            }
        }
    }
    assert_eq!(total, 56);
    assert_eq!(disagreements, vec![(5, Alphabet::binary().render_compact(&Alphabet::binary().parse_word("1,0,0,1").unwrap()))]);
}

#[test]
fn lstar_learns_every_grammar_within_200_queries() {
    for g in all_grammars() {
        let mut oracle = DfaOracle(g.dfa.clone());
        let opts = LstarOptions {
            equivalence: lstar_equivalence(DEFAULT_EQUIVALENCE_SAMPLES),
            unsure_as: UnsureMapping::False,
            ..LstarOptions::default()
        };
        let r = lstar(&LabeledExamples::new(Alphabet::binary()), &mut oracle, 200, &opts).unwrap();
        assert!(r.dfa.equivalent(&g.dfa).unwrap(), "Tomita {}", g.index);
        assert!(r.queries_spent <= 200);
    }
}
