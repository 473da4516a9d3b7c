//! Shipped 8x8 scenario: map, demonstrations, task prompts and seed
//! examples. The demonstrations are reconstructions in the spirit of the
//! original figure, not cell-exact copies.

use super::{load_demo, load_world, Demonstration, GridWorld};
use crate::identify::{parse_examples, LabeledExamples};
use crate::oracle::TaskPrompt;

pub const MAP_8X8: &str = include_str!("../../fixtures/gridworld_8x8.map");
pub const DEMO_DIRECT: &str = include_str!("../../fixtures/demo_direct.demo");
pub const DEMO_WET_DETOUR: &str = include_str!("../../fixtures/demo_wet_detour.demo");
pub const TASK_DESCRIPTION: &str = include_str!("../../fixtures/gridworld_task.txt");
/// The task description with the drying rule replaced by `<unknown>`.
pub const TASK_DESCRIPTION_PARTIAL: &str = include_str!("../../fixtures/gridworld_task_partial.txt");
pub const ANSWER_INSTRUCTIONS: &str = include_str!("../../fixtures/gridworld_instructions.txt");
pub const SEED_EXAMPLES: &str = include_str!("../../fixtures/gridworld_examples.toml");

/// The nine labelled examples that accompany the task description.
pub fn seed_examples() -> LabeledExamples {
    parse_examples(SEED_EXAMPLES).expect("fixture examples parse")
}

/// Task prompt with the seed examples and the marker-format instructions.
/// With `allow_unsure` the instructions also offer `unsure`.
pub fn task_prompt(all_rules: bool, allow_unsure: bool) -> TaskPrompt {
    let description = if all_rules {
        TASK_DESCRIPTION
    } else {
        TASK_DESCRIPTION_PARTIAL
    };
    let mut p = TaskPrompt::new(description, Some(seed_examples()), allow_unsure);
    p.answer_instructions = if allow_unsure {
        ANSWER_INSTRUCTIONS.replace("<yes, no>", "<yes, no, unsure>")
    } else {
        ANSWER_INSTRUCTIONS.to_owned()
    };
    p
}

pub fn world_8x8() -> GridWorld {
    load_world(MAP_8X8).expect("fixture map parses")
}

pub fn demo_direct() -> Demonstration {
    load_demo(DEMO_DIRECT, &world_8x8()).expect("fixture demo parses")
}

pub fn demo_wet_detour() -> Demonstration {
    load_demo(DEMO_WET_DETOUR, &world_8x8()).expect("fixture demo parses")
}

pub fn demos() -> Vec<Demonstration> {
    vec![demo_direct(), demo_wet_detour()]
}
