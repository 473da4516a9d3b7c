mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "specsearch", version, about = "Learn task automata from examples, oracles and demonstrations")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Find the smallest DFAs consistent with a labelled examples file.
    Identify(IdentifyArgs),
    /// Learn a DFA by asking an oracle membership queries.
    Learn(LearnArgs),
    /// Search for the task automaton that best explains demonstrations.
    Diss(DissArgs),
    /// Learn the seven Tomita grammars and report answer quality.
    Tomita(TomitaArgs),
    /// Print a DFA file's structure, evaluate words, or emit DOT.
    Inspect(InspectArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Llm,
    Scripted,
    Human,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendArg {
    Vl,
    Lstar,
}

impl From<BackendArg> for specsearch::diss::Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Vl => Self::VersionSpace,
            BackendArg::Lstar => Self::Lstar,
        }
    }
}

/// Language-model endpoint selection shared by the oracle-driven commands.
#[derive(Args, Debug, Clone, Default)]
pub struct EndpointArgs {
    /// Base URL of an OpenAI-compatible chat API.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Model name sent with each request.
    #[arg(long)]
    pub model: Option<String>,
    /// TOML file with the full endpoint configuration; --endpoint and
    /// --model override its fields. The API key is read from the
    /// environment variable it names.
    #[arg(long)]
    pub endpoint_config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    /// Examples file (TOML with alphabet, positive, negative).
    #[arg(long)]
    pub examples: PathBuf,
    /// Number of language-distinct DFAs to return.
    #[arg(short, long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = specsearch::identify::DEFAULT_MAX_STATES)]
    pub max_states: usize,
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    /// Seed examples file; its alphabet is the query alphabet.
    #[arg(long)]
    pub examples: PathBuf,
    /// Task description shown to a language model. Defaults to the shipped
    /// gridworld description.
    #[arg(long)]
    pub prompt: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OracleKind::Scripted)]
    pub oracle: OracleKind,
    /// DFA file the scripted oracle answers from. Without it the scripted
    /// oracle plays the gridworld task.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BackendArg::Vl)]
    pub backend: BackendArg,
    /// Inner oracle calls allowed.
    #[arg(long, default_value_t = 32)]
    pub budget: usize,
    /// Let the oracle answer "unsure".
    #[arg(long)]
    pub allow_unsure: bool,
    /// Hide the drying rule from the task description (and from the
    /// scripted gridworld oracle).
    #[arg(long)]
    pub partial_rules: bool,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Args, Debug)]
pub struct DissArgs {
    /// Run configuration (TOML); paths in it are relative to the file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub oracle: Option<OracleKind>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Oracle queries per iteration.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub allow_unsure: bool,
    /// Weight of the automaton size in the energy.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Planning horizon; defaults to the longest demonstration plus slack.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Args, Debug)]
pub struct TomitaArgs {
    #[arg(long, value_enum, default_value_t = OracleKind::Scripted)]
    pub oracle: OracleKind,
    #[arg(long, value_enum, default_value_t = BackendArg::Lstar)]
    pub backend: BackendArg,
    /// Membership queries per grammar.
    #[arg(long, alias = "budget", default_value_t = specsearch::tomita::DEFAULT_QUERIES)]
    pub queries: usize,
    #[arg(long)]
    pub allow_unsure: bool,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    /// DFA file.
    pub dfa: PathBuf,
    /// Comma-separated words to evaluate, e.g. `blue,green,yellow`; repeat
    /// the flag for several. `""` is the empty word.
    #[arg(long)]
    pub word: Vec<String>,
    /// Print Graphviz DOT instead of the summary.
    #[arg(long)]
    pub dot: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match commands::run(&cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
