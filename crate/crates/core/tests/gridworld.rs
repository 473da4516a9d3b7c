mod common;

use specsearch::automata::{all_words, stutter_collapse, Symbol};
use specsearch::planner::{energy, EnergyParams};
use specsearch::world::{
    color_alphabet, featurize, fixtures, ground_truth_dfa, rules12_dfa, Color, Demonstration,
};

fn sym(c: Color) -> Symbol {
    c.symbol()
}

/// The three rules read straight off the task: some yellow, no red, and the
/// last of blue/green before the first yellow is not blue.
fn task_rules(word: &[Symbol]) -> bool {
    if word.contains(&sym(Color::Red)) {
        return false;
    }
    let Some(first_yellow) = word.iter().position(|&s| s == sym(Color::Yellow)) else {
        return false;
    };
    word[..first_yellow]
        .iter()
        .rev()
        .find(|&&s| s == sym(Color::Blue) || s == sym(Color::Green))
        .is_none_or(|&s| s == sym(Color::Green))
}

#[test]
fn task_examples_classify_exactly() {
    let a = color_alphabet();
    let gt = ground_truth_dfa();
    for w in ["blue,green,yellow", "yellow"] {
        assert!(gt.accepts(&a.parse_word(w).unwrap()), "{w} should be accepted");
    }
    for w in [
        "blue,red,yellow",
        "red,yellow,green",
        "blue,red,blue,red",
        "blue",
        "blue,red,green,yellow",
        "blue,green",
        "blue,yellow",
    ] {
        assert!(!gt.accepts(&a.parse_word(w).unwrap()), "{w} should be rejected");
    }
    assert_eq!(fixtures::seed_examples().len(), 9);
    assert!(fixtures::seed_examples().is_consistent(&gt));
}

#[test]
fn ground_truth_matches_rules_exhaustively() {
    let gt = ground_truth_dfa();
    for w in all_words(&color_alphabet(), 7) {
        assert_eq!(gt.accepts(&w), task_rules(&w), "{}", color_alphabet().render(&w));
    }
}

#[test]
fn stutter_examples_collapse_as_listed() {
    let a = color_alphabet();
    let cases = [
        ("yellow,yellow,blue", "yellow,blue"),
        ("red,red,blue,green,green,red", "red,blue,green,red"),
        ("blue,blue,blue", "blue"),
    ];
    for (raw, collapsed) in cases {
        let got = stutter_collapse(&a.parse_word(raw).unwrap());
        assert_eq!(got, a.parse_word(collapsed).unwrap(), "{raw}");
    }
}

#[test]
fn demonstration_words_are_collapsed_colours() {
    let w = fixtures::world_8x8();
    for d in fixtures::demos() {
        let cells: Vec<_> = d.cells().collect();
        assert_eq!(featurize(&w, &d).unwrap().symbols(), &common::collapsed_colors(&w, &cells)[..]);
    }
}

#[test]
fn fixture_demonstrations_satisfy_the_task() {
    let w = fixtures::world_8x8();
    for d in fixtures::demos() {
        assert!(ground_truth_dfa().accepts(&featurize(&w, &d).unwrap()));
    }
}

#[test]
fn wet_detour_prefers_ground_truth_at_zero_lambda() {
    let w = fixtures::world_8x8();
    let demos: Vec<Demonstration> = vec![fixtures::demo_wet_detour()];
    let params = EnergyParams::<f64> {
        lambda: 0.0,
        ..EnergyParams::default()
    };
    let gt = energy(&ground_truth_dfa(), &w, &demos, &params).unwrap();
    let r12 = energy(&rules12_dfa(), &w, &demos, &params).unwrap();
    assert!(gt.total < r12.total, "ground truth {} vs rules 1-2 {}", gt.total, r12.total);
}
