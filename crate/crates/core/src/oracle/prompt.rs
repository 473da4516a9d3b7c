use serde::{Deserialize, Serialize};

use crate::automata::{Alphabet, Symbol};
use crate::identify::LabeledExamples;
use crate::learner::Answer;

pub const FINAL_ANSWER_MARKER: &str = "FINAL_ANSWER:";

/// How the model is asked to state its answer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerFormat {
    /// Free-form reasoning ending in `FINAL_ANSWER: <yes|no|unsure>`.
    #[default]
    FinalAnswerMarker,
    /// The whole reply is one of `true`, `false`, `unsure`.
    Bare,
}

/// A natural-language task description plus seed examples, rendered as the
/// opening turn of every membership conversation.
#[derive(Clone, Debug)]
pub struct TaskPrompt {
    pub description: String,
    pub seed_examples: Option<LabeledExamples>,
    pub answer_instructions: String,
    pub allow_unsure: bool,
    pub format: AnswerFormat,
}

impl TaskPrompt {
    /// Marker-format prompt with the default closing instruction.
    pub fn new(description: impl Into<String>, seed_examples: Option<LabeledExamples>, allow_unsure: bool) -> Self {
        Self {
            description: description.into(),
            seed_examples,
            answer_instructions: default_instructions(allow_unsure),
            allow_unsure,
            format: AnswerFormat::FinalAnswerMarker,
        }
    }

    /// Prompt whose text already carries its own answer instructions and
    /// expects a bare `true`/`false`/`unsure` reply.
    pub fn bare(text: impl Into<String>, allow_unsure: bool) -> Self {
        Self {
            description: text.into(),
            seed_examples: None,
            answer_instructions: String::new(),
            allow_unsure,
            format: AnswerFormat::Bare,
        }
    }

    pub fn render(&self) -> String {
        let mut out = self.description.trim_end().to_owned();
        if let Some(ex) = &self.seed_examples {
            let a = ex.alphabet();
            out.push_str("\n\nPOSITIVE EXAMPLES\n");
            for w in ex.positive() {
                out.push_str(&format!("  - {}\n", a.render(w)));
            }
            out.push_str("\nNEGATIVE EXAMPLES\n");
            for w in ex.negative() {
                out.push_str(&format!("  - {}\n", a.render(w)));
            }
        }
        if !self.answer_instructions.is_empty() {
            out.push_str("\n\n");
            out.push_str(self.answer_instructions.trim());
        }
        out.push('\n');
        out
    }

    pub fn parse_answer(&self, reply: &str) -> Result<Answer, ParseError> {
        match self.format {
            AnswerFormat::FinalAnswerMarker => parse_final_answer(reply, self.allow_unsure),
            AnswerFormat::Bare => parse_bare_answer(reply, self.allow_unsure),
        }
    }

    /// Follow-up sent once when a reply cannot be parsed.
    pub fn corrective_reminder(&self) -> String {
        let options = if self.allow_unsure {
            "yes, no, unsure"
        } else {
            "yes, no"
        };
        match self.format {
            AnswerFormat::FinalAnswerMarker => {
                format!("Your reply did not end with a valid answer. Restate your conclusion as FINAL_ANSWER: <{options}>.")
            }
            AnswerFormat::Bare => {
                let bare = if self.allow_unsure {
                    "true, false or unsure"
                } else {
                    "true or false"
                };
                format!("Respond with exactly one word: {bare}.")
            }
        }
    }
}

fn default_instructions(allow_unsure: bool) -> String {
    let options = if allow_unsure {
        "yes, no, unsure"
    } else {
        "yes, no"
    };
    let unsure = if allow_unsure {
        " If the rules do not settle the question, answer unsure."
    } else {
        ""
    };
    format!(
        "Answer each question below by reasoning step by step, and only that question.{unsure} \
         End your reply with your conclusion stated as FINAL_ANSWER: <{options}>."
    )
}

/// The user turn for one membership query.
pub fn membership_question(alphabet: &Alphabet, word: &[Symbol]) -> String {
    format!("Is {} a positive example?", alphabet.render(word))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("reply has no FINAL_ANSWER marker")]
    MissingMarker,
    #[error("answer token {0:?} is not permitted")]
    BadToken(String),
}

/// Reads the token after the last `FINAL_ANSWER:` (any case) in `reply`.
pub fn parse_final_answer(reply: &str, allow_unsure: bool) -> Result<Answer, ParseError> {
    let lower = reply.to_ascii_lowercase();
    let marker = FINAL_ANSWER_MARKER.to_ascii_lowercase();
    let pos = lower.rfind(&marker).ok_or(ParseError::MissingMarker)?;
    let rest = &reply[pos + marker.len()..];
    let token: String = rest
        .trim_start()
        .trim_start_matches(['<', '"', '\'', '*', '['])
        .chars()
        .take_while(|c| c.is_ascii_alphabetic())
        .collect();
    token_to_answer(&token, allow_unsure)
}

/// Reads a reply that should consist of a single `true`/`false`/`unsure`
/// (also `yes`/`no`).
pub fn parse_bare_answer(reply: &str, allow_unsure: bool) -> Result<Answer, ParseError> {
    let token = reply
        .trim()
        .trim_matches(|c: char| !c.is_ascii_alphabetic())
        .to_owned();
    token_to_answer(&token, allow_unsure)
}

fn token_to_answer(token: &str, allow_unsure: bool) -> Result<Answer, ParseError> {
    match token.to_ascii_lowercase().as_str() {
        "yes" | "true" => Ok(Answer::Yes),
        "no" | "false" => Ok(Answer::No),
        "unsure" if allow_unsure => Ok(Answer::Unsure),
        _ => Err(ParseError::BadToken(token.to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colors() -> Alphabet {
        Alphabet::new(["red", "yellow", "blue", "green"]).unwrap()
    }

    #[test]
    fn question_rendering() {
        let a = colors();
        assert_eq!(
            membership_question(&a, &a.parse_word("red,red,blue").unwrap()),
            "Is [red, red, blue] a positive example?"
        );
        assert_eq!(membership_question(&a, &a.parse_word("yellow").unwrap()), "Is [yellow] a positive example?");
        assert_eq!(membership_question(&a, &[]), "Is [] a positive example?");
    }

    #[test]
    fn parses_last_marker() {
        let reply = "To determine if [red, red, blue] is a positive example, we need to check if it conforms to all the rules.\n\n1) The sequence must contain at least one yellow tile - FINAL_ANSWER: no";
        assert_eq!(parse_final_answer(reply, false), Ok(Answer::No));
        assert_eq!(parse_final_answer("FINAL_ANSWER: yes", false), Ok(Answer::Yes));
        assert_eq!(
            parse_final_answer("final_answer: yes ... then Final_Answer: No.", false),
            Ok(Answer::No)
        );
        assert_eq!(
            parse_final_answer("I think the answer is yes", false),
            Err(ParseError::MissingMarker)
        );
    }

    #[test]
    fn unsure_needs_permission() {
        assert_eq!(parse_final_answer("FINAL_ANSWER: unsure", true), Ok(Answer::Unsure));
        assert!(matches!(parse_final_answer("FINAL_ANSWER: unsure", false), Err(ParseError::BadToken(_))));
        assert!(matches!(parse_final_answer("FINAL_ANSWER: maybe", true), Err(ParseError::BadToken(_))));
    }

    #[test]
    fn bare_answers() {
        assert_eq!(parse_bare_answer(" true\n", false), Ok(Answer::Yes));
        assert_eq!(parse_bare_answer("\"False\".", false), Ok(Answer::No));
        assert_eq!(parse_bare_answer("unsure", true), Ok(Answer::Unsure));
        assert!(parse_bare_answer("it is true", true).is_err());
    }

    #[test]
    fn render_ends_with_marker_instruction() {
        let a = colors();
        let ex = LabeledExamples::parse(a, &["yellow"], &["blue"]).unwrap();
        let p = TaskPrompt::new("Visit yellow.", Some(ex), false);
        let text = p.render();
        assert!(text.contains("POSITIVE EXAMPLES\n  - [yellow]\n"));
        assert!(text.contains("NEGATIVE EXAMPLES\n  - [blue]\n"));
        assert!(text.trim_end().ends_with("FINAL_ANSWER: <yes, no>."));
        assert!(TaskPrompt::new("x", None, true).render().trim_end().ends_with("FINAL_ANSWER: <yes, no, unsure>."));
    }
}
