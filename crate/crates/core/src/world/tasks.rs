use super::Color;
use crate::automata::{Alphabet, Dfa, Symbol};
use crate::oracle::{PredicateAction, ScriptedOracle, WordPredicate};

/// `{red, yellow, blue, green}` in [`Color`] order.
pub fn color_alphabet() -> Alphabet {
    Alphabet::new(["red", "yellow", "blue", "green"]).expect("distinct names")
}

fn color_dfa(num_states: usize, accepting: &[usize], next: impl Fn(usize, Color) -> usize) -> Dfa {
    Dfa::from_fn(color_alphabet(), num_states, 0, accepting.iter().copied(), |q, s| {
        next(q, Color::from_symbol(s).expect("colour symbol"))
    })
    .expect("well-formed task automaton")
}

/// Recharge eventually, never touch lava, and dry off between getting wet
/// and recharging.
///
/// States: 0 dry, 1 wet, 2 done (accepting), 3 failed.
pub fn ground_truth_dfa() -> Dfa {
    color_dfa(4, &[2], |q, c| match (q, c) {
        (3, _) | (_, Color::Red) => 3,
        (2, _) => 2,
        (0, Color::Yellow) => 2,
        (_, Color::Yellow) => 3,
        (_, Color::Blue) => 1,
        (_, Color::Green) => 0,
    })
}

/// The task without the drying rule. States: 0 pending, 1 done, 2 failed.
pub fn rules12_dfa() -> Dfa {
    color_dfa(3, &[1], |q, c| match (q, c) {
        (2, _) | (_, Color::Red) => 2,
        (_, Color::Yellow) => 1,
        (q, _) => q,
    })
}

/// Only "reach yellow".
pub fn eventually_yellow_dfa() -> Dfa {
    color_dfa(2, &[1], |q, c| if c == Color::Yellow { 1 } else { q })
}

/// True when some blue precedes some yellow, i.e. when the drying rule can
/// matter for the word.
pub fn rule3_relevant(word: &[Symbol]) -> bool {
    let blue = Color::Blue.symbol();
    let yellow = Color::Yellow.symbol();
    word.iter()
        .position(|&s| s == blue)
        .is_some_and(|i| word[i..].contains(&yellow))
}

/// Rule-based stand-in for a language model given the task prompt. With
/// `all_rules` it answers by the ground truth. Otherwise it does not know the
/// drying rule: on words where that rule matters it answers Unsure when
/// `allow_unsure`, and by rules 1-2 alone (a confident mistake whenever the
/// drying rule would reject) when not.
pub fn scripted_task_oracle(all_rules: bool, allow_unsure: bool) -> ScriptedOracle {
    if all_rules {
        return ScriptedOracle::exact(ground_truth_dfa());
    }
    let o = ScriptedOracle::new(ground_truth_dfa(), WordPredicate::new(rule3_relevant), 0.0, 0);
    if allow_unsure {
        o
    } else {
        o.with_action(PredicateAction::AnswerFrom(rules12_dfa()))
    }
}
