use std::io::{BufRead, Write};

use super::prompt::membership_question;
use crate::automata::{Alphabet, Symbol};
use crate::learner::{Answer, MembershipOracle, OracleError};

/// Asks a person at a terminal. Unrecognized input is asked again; end of
/// input makes the oracle unavailable.
pub struct HumanOracle<R, W> {
    alphabet: Alphabet,
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> HumanOracle<R, W> {
    pub fn new(alphabet: Alphabet, input: R, output: W) -> Self {
        Self {
            alphabet,
            input,
            output,
        }
    }
}

fn io_err(e: std::io::Error) -> OracleError {
    OracleError::Unavailable(e.to_string())
}

impl<R: BufRead, W: Write> MembershipOracle for HumanOracle<R, W> {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        let question = membership_question(&self.alphabet, word);
        loop {
            write!(self.output, "{question} [y/n/u] ").map_err(io_err)?;
            self.output.flush().map_err(io_err)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io_err)? == 0 {
                return Err(OracleError::Unavailable("end of input".into()));
            }
            match line.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => return Ok(Answer::Yes),
                "n" | "no" => return Ok(Answer::No),
                "u" | "unsure" | "?" => return Ok(Answer::Unsure),
                _ => writeln!(self.output, "please answer y, n or u").map_err(io_err)?,
            }
        }
    }

    fn is_live(&self) -> bool {
        true
    }
}
