use proptest::prelude::*;
use specsearch::automata::{all_words, distinguishing_word, parse_dfa, stutter_collapse, to_dot, write_dfa, Alphabet, Dfa, Symbol, Word};
use specsearch::world::{load_demo, load_world, write_demo, write_world, fixtures};

fn dfa(k: usize) -> impl Strategy<Value = Dfa> {
    (1usize..=5)
        .prop_flat_map(move |n| (Just(n), proptest::collection::vec(0..n, n * k), proptest::collection::vec(any::<bool>(), n)))
        .prop_map(move |(n, delta, acc)| {
            let alphabet = Alphabet::new((0..k).map(|i| format!("s{i}"))).unwrap();
            let rows = delta.chunks(k).map(<[usize]>::to_vec).collect();
            Dfa::new(alphabet, rows, 0, (0..n).filter(|&q| acc[q])).unwrap()
        })
}

fn word(k: u16) -> impl Strategy<Value = Vec<Symbol>> {
    proptest::collection::vec((0..k).prop_map(Symbol), 0..12)
}

proptest! {
    #[test]
    fn text_format_round_trips(d in dfa(2)) {
        let back = parse_dfa(&write_dfa(&d)).unwrap();
        prop_assert_eq!(write_dfa(&back), write_dfa(&d));
    }

    #[test]
    fn minimize_preserves_language_and_never_grows(d in dfa(2)) {
        let m = d.minimize();
        prop_assert!(m.num_states() <= d.num_states());
        for w in all_words(d.alphabet(), 6) {
            prop_assert_eq!(m.accepts(&w), d.accepts(&w));
        }
        prop_assert_eq!(m.minimize().num_states(), m.num_states());
    }

    #[test]
    fn complement_flips_every_word(d in dfa(3), w in word(3)) {
        prop_assert_eq!(d.complement().accepts(&w), !d.accepts(&w));
    }

    #[test]
    fn distinguishing_word_separates_or_languages_agree(a in dfa(2), b in dfa(2)) {
        match distinguishing_word(&a, &b).unwrap() {
            Some(w) => prop_assert_ne!(a.accepts(&w), b.accepts(&w)),
            None => {
                for w in all_words(a.alphabet(), 8) {
                    prop_assert_eq!(a.accepts(&w), b.accepts(&w));
                }
            }
        }
    }

    #[test]
    fn equivalence_agrees_with_difference_emptiness(a in dfa(2), b in dfa(2)) {
        prop_assert_eq!(a.equivalent(&b).unwrap(), a.symmetric_difference(&b).unwrap().is_empty_language());
    }

    #[test]
    fn stutter_collapse_is_idempotent_and_has_no_repeats(w in word(4)) {
        let c = stutter_collapse(&w);
        prop_assert!(c.windows(2).all(|p| p[0] != p[1]));
        prop_assert_eq!(stutter_collapse(&c), c.clone());
        let mut dedup = w.clone();
        dedup.dedup();
        prop_assert_eq!(c, Word::from(dedup));
    }

    #[test]
    fn dot_mentions_every_state(d in dfa(2)) {
        let dot = to_dot(&d);
        for q in 0..d.num_states() {
            let tag = format!("{q}");
            prop_assert!(dot.contains(&tag));
        }
    }
}

#[test]
fn world_and_demo_files_round_trip() {
    let w = fixtures::world_8x8();
    let again = load_world(&write_world(&w)).unwrap();
    assert_eq!(write_world(&again), write_world(&w));
    for d in fixtures::demos() {
        assert_eq!(load_demo(&write_demo(&w, &d), &w).unwrap(), d);
    }
}
