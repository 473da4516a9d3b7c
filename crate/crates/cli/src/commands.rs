use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use log::info;
use serde_json::json;
use specsearch::automata::{parse_dfa, to_dot, write_dfa, Alphabet, Dfa};
use specsearch::diss::{energy_rows, energy_trace, run_diss, Backend};
use specsearch::identify::{find_minimal_dfas, parse_examples, write_examples, LabeledExamples};
use specsearch::learner::{
    guess_dfa_vl, lstar, transcript_jsonl, CachingOracle, DfaOracle, LstarOptions, MembershipOracle, OracleError,
    UnsureMapping, VersionSpaceOptions,
};
use specsearch::oracle::{
    measure_transcript, HttpTransport, HumanOracle, LlmEndpointConfig, LlmOracle, TaskPrompt,
};
use specsearch::tomita::{lstar_equivalence, run_tomita_bench, write_bench, BenchOptions, TomitaGrammar};
use specsearch::world::{color_alphabet, fixtures, ground_truth_dfa, load_demo, load_world, scripted_task_oracle};
use specsearch::DissReport;

use crate::config::RunConfig;
use crate::{Cli, Command, DissArgs, EndpointArgs, IdentifyArgs, InspectArgs, LearnArgs, OracleKind, TomitaArgs};

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Identify(a) => identify(cli, a, out),
        Command::Learn(a) => learn(cli, a, out),
        Command::Diss(a) => diss(cli, a, out),
        Command::Tomita(a) => tomita(cli, a, out),
        Command::Inspect(a) => inspect(a, out),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
}

fn load_examples(path: &Path) -> Result<LabeledExamples> {
    parse_examples(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_dfa(path: &Path) -> Result<Dfa> {
    parse_dfa(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn identify(cli: &Cli, a: &IdentifyArgs, out: &mut dyn Write) -> Result<()> {
    ensure!(a.k >= 1, "-k must be at least 1");
    let ex = load_examples(&a.examples)?;
    let found = find_minimal_dfas(&ex, a.k, a.max_states)?;
    for (i, d) in found.dfas.iter().enumerate() {
        ensure!(ex.is_consistent(d), "identified DFA {} is inconsistent", i + 1);
        write(&cli.out, &format!("dfa_{}.dfa", i + 1), write_dfa(d))?;
        write(&cli.out, &format!("dfa_{}.dot", i + 1), to_dot(d))?;
        writeln!(out, "dfa_{}: {} states, consistent with {} examples", i + 1, d.num_states(), ex.len())?;
    }
    if found.dfas.len() < a.k {
        writeln!(out, "only {} distinct DFAs within {} states", found.dfas.len(), a.max_states)?;
    }
    Ok(())
}

fn endpoint_config(args: &EndpointArgs, base: Option<&LlmEndpointConfig>) -> Result<LlmEndpointConfig> {
    let mut c = match &args.endpoint_config {
        Some(p) => toml::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => base.cloned().unwrap_or_default(),
    };
    if let Some(url) = &args.endpoint {
        c.base_url = url.clone();
    }
    if let Some(m) = &args.model {
        c.model = m.clone();
    }
    info!("language model {} at {} (key from ${})", c.model, c.base_url, c.api_key_env);
    Ok(c)
}

fn llm_oracle(prompt: TaskPrompt, alphabet: Alphabet, config: LlmEndpointConfig, log_path: &Path) -> Result<LlmOracle<HttpTransport>> {
    let transport = HttpTransport::new(&config);
    let log = fs::File::create(log_path).with_context(|| format!("creating {}", log_path.display()))?;
    Ok(LlmOracle::new(prompt, alphabet, config, transport).with_log(Box::new(log)))
}

fn human_oracle(alphabet: Alphabet) -> Box<dyn MembershipOracle> {
    Box::new(HumanOracle::new(alphabet, BufReader::new(std::io::stdin()), std::io::stderr()))
}

fn scripted_truth(alphabet: &Alphabet, truth: Option<&Path>) -> Result<Option<Dfa>> {
    match truth {
        Some(p) => {
            let d = load_dfa(p)?;
            ensure!(d.alphabet() == alphabet, "{} uses a different alphabet than the examples", p.display());
            Ok(Some(d))
        }
        None if *alphabet == color_alphabet() => Ok(Some(ground_truth_dfa())),
        None => Ok(None),
    }
}

fn learn(cli: &Cli, a: &LearnArgs, out: &mut dyn Write) -> Result<()> {
    let seed = load_examples(&a.examples)?;
    let alphabet = seed.alphabet().clone();
    let truth = scripted_truth(&alphabet, a.truth.as_deref())?;
    let all_rules = !a.partial_rules;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let inner: Box<dyn MembershipOracle> = match a.oracle {
        OracleKind::Scripted => match (&a.truth, &truth) {
            (Some(_), Some(t)) => Box::new(DfaOracle(t.clone())),
            (None, Some(_)) => Box::new(scripted_task_oracle(all_rules, a.allow_unsure)),
            _ => bail!("the scripted oracle needs --truth for a non-gridworld alphabet"),
        },
        OracleKind::Llm => {
            let mut prompt = match &a.prompt {
                Some(p) => TaskPrompt::new(read(p)?, Some(seed.clone()), a.allow_unsure),
                None => fixtures::task_prompt(all_rules, a.allow_unsure),
            };
            prompt.seed_examples = Some(seed.clone());
            let config = endpoint_config(&a.endpoint, None)?;
            Box::new(llm_oracle(prompt, alphabet.clone(), config, &cli.out.join("conversation.jsonl"))?)
        }
        OracleKind::Human => human_oracle(alphabet.clone()),
    };
    let cache_log = fs::File::create(cli.out.join("cache.jsonl")).context("creating cache.jsonl")?;
    let mut oracle = CachingOracle::new(seed.clone(), inner).with_log(Box::new(cache_log));
    let result = match a.backend.into() {
        Backend::VersionSpace => guess_dfa_vl(
            &seed,
            &mut oracle,
            a.budget,
            &VersionSpaceOptions {
                seed: cli.seed,
                ..VersionSpaceOptions::default()
            },
        ),
        Backend::Lstar => lstar(
            &seed,
            &mut oracle,
            a.budget,
            &LstarOptions {
                equivalence: lstar_equivalence(specsearch::tomita::DEFAULT_EQUIVALENCE_SAMPLES),
                unsure_as: UnsureMapping::False,
                seed: cli.seed,
                ..LstarOptions::default()
            },
        ),
    };
    let report = result?;
    write(&cli.out, "learned.dfa", write_dfa(&report.dfa))?;
    write(&cli.out, "learned.dot", to_dot(&report.dfa))?;
    write(&cli.out, "transcript.jsonl", report.transcript_jsonl())?;
    write(&cli.out, "examples.toml", write_examples(&report.examples))?;
    let mut summary = json!({
        "states": report.dfa.num_states(),
        "queries_spent": report.queries_spent,
        "converged": report.converged,
        "candidate_sizes": report.candidate_sizes,
    });
    writeln!(
        out,
        "learned {} states with {} oracle queries (converged: {})",
        report.dfa.num_states(),
        report.queries_spent,
        report.converged
    )?;
    if let Some(t) = &truth {
        let stats = measure_transcript(&report.transcript, t)?;
        let equivalent = report.dfa.equivalent(t)?;
        summary["equivalent_to_truth"] = json!(equivalent);
        summary["hallucination"] = serde_json::to_value(&stats)?;
        writeln!(
            out,
            "equivalent to truth: {equivalent}; answers {} correct, {} incorrect, {} unsure",
            stats.correct, stats.incorrect, stats.unsure
        )?;
    }
    write(&cli.out, "report.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

fn diss(cli: &Cli, a: &DissArgs, out: &mut dyn Write) -> Result<()> {
    let rc = RunConfig::load(&a.config)?;
    let mut config = rc.diss.clone();
    config.seed = cli.seed;
    if let Some(b) = a.backend {
        config.backend = b.into();
    }
    if let Some(b) = a.budget {
        config.query_budget = b;
    }
    if a.allow_unsure {
        config.allow_unsure = true;
    }
    if let Some(l) = a.lambda {
        config.lambda = l;
    }
    if a.horizon.is_some() {
        config.horizon = a.horizon;
    }
    if let Some(n) = a.iterations {
        config.max_iterations = n;
    }
    config.validate()?;

    let world = load_world(&read(&rc.world)?).with_context(|| format!("in {}", rc.world.display()))?;
    let demos = rc
        .demos
        .iter()
        .map(|p| load_demo(&read(p)?, &world).with_context(|| format!("in {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let alphabet = color_alphabet();
    let seed = match &rc.examples {
        Some(p) => load_examples(p)?,
        None => LabeledExamples::new(alphabet.clone()),
    };
    ensure!(*seed.alphabet() == alphabet, "examples must use the colour alphabet {:?}", alphabet.names());
    let ground_truth = rc.ground_truth.as_deref().map(load_dfa).transpose()?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;

    let kind = a.oracle.map_or_else(|| rc.oracle_kind(), Ok)?;
    let inner: Box<dyn MembershipOracle> = match kind {
        OracleKind::Scripted => Box::new(scripted_task_oracle(config.all_rules, config.allow_unsure)),
        OracleKind::Llm => {
            let mut prompt = match &rc.prompt {
                Some(p) => TaskPrompt::new(read(p)?, None, config.allow_unsure),
                None => fixtures::task_prompt(config.all_rules, config.allow_unsure),
            };
            prompt.seed_examples = Some(seed.clone());
            let endpoint = endpoint_config(&a.endpoint, rc.endpoint.as_ref())?;
            Box::new(llm_oracle(prompt, alphabet.clone(), endpoint, &cli.out.join("conversation.jsonl"))?)
        }
        OracleKind::Human => human_oracle(alphabet.clone()),
    };
    let mut oracle = CachingOracle::new(seed.clone(), inner);
    let report: DissReport = run_diss(&config, &world, &demos, &alphabet, &mut oracle, &seed, ground_truth.as_ref())?;

    write(&cli.out, "energy_trace.csv", energy_trace(&report))?;
    write(&cli.out, "energies.csv", energy_rows(&report))?;
    write(&cli.out, "best.dfa", write_dfa(&report.best_dfa))?;
    write(&cli.out, "best.dot", to_dot(&report.best_dfa))?;
    write(&cli.out, "transcript.jsonl", transcript_jsonl(&report.transcript))?;
    write(&cli.out, "config.toml", toml::to_string(&config)?)?;
    let mut summary = json!({
        "iterations": report.iterations.len(),
        "best_energy": report.best_energy.total,
        "best_states": report.best_dfa.num_states(),
        "total_queries": report.total_queries(),
    });
    writeln!(
        out,
        "best energy {:.6} ({} states) after {} iterations, {} oracle queries",
        report.best_energy.total,
        report.best_dfa.num_states(),
        report.iterations.len(),
        report.total_queries()
    )?;
    if let Some(gt) = &report.ground_truth_energy {
        let reached = report.reached_ground_truth_within(report.iterations.len()).unwrap_or(false);
        summary["ground_truth_energy"] = json!(gt.total);
        summary["reached_ground_truth"] = json!(reached);
        writeln!(out, "ground-truth energy {:.6}; reached: {reached}", gt.total)?;
    }
    write(&cli.out, "report.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

fn tomita(cli: &Cli, a: &TomitaArgs, out: &mut dyn Write) -> Result<()> {
    let opts = BenchOptions {
        backend: a.backend.into(),
        allow_unsure: a.allow_unsure,
        queries: a.queries,
        seed: cli.seed,
        ..BenchOptions::default()
    };
    let results = match a.oracle {
        OracleKind::Scripted => {
            let factory = |g: &TomitaGrammar, _| -> Result<Box<dyn MembershipOracle + Send>, OracleError> {
                Ok(Box::new(DfaOracle(g.dfa.clone())))
            };
            run_tomita_bench(&factory, &opts)
        }
        OracleKind::Llm => {
            let config = endpoint_config(&a.endpoint, None)?;
            fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
            let dir = cli.out.clone();
            let factory = move |g: &TomitaGrammar, allow_unsure: bool| -> Result<Box<dyn MembershipOracle + Send>, OracleError> {
                let log = dir.join(format!("conversation_{}.jsonl", g.index));
                llm_oracle(g.task_prompt(allow_unsure), Alphabet::binary(), config.clone(), &log)
                    .map(|o| Box::new(o) as Box<dyn MembershipOracle + Send>)
                    .map_err(|e| OracleError::Unavailable(e.to_string()))
            };
            run_tomita_bench(&factory, &opts)
        }
        OracleKind::Human => bail!("the Tomita benchmark runs grammars in parallel and cannot use a human oracle"),
    };
    write_bench(&cli.out, &results).with_context(|| format!("writing into {}", cli.out.display()))?;
    write!(out, "{}", specsearch::tomita::bench_summary(&results))?;
    for r in &results {
        if let Some(e) = &r.error {
            writeln!(out, "Tomita {}: {e}", r.grammar)?;
        }
    }
    Ok(())
}

fn inspect(a: &InspectArgs, out: &mut dyn Write) -> Result<()> {
    let d = load_dfa(&a.dfa)?;
    if a.dot {
        write!(out, "{}", to_dot(&d))?;
        return Ok(());
    }
    let alphabet = d.alphabet();
    let accepting: Vec<usize> = d.accepting_states().collect();
    writeln!(out, "alphabet: {}", alphabet.names().join(", "))?;
    writeln!(out, "states: {} (minimal: {})", d.num_states(), d.minimize().num_states())?;
    writeln!(out, "initial: {}", d.initial())?;
    writeln!(out, "accepting: {accepting:?}")?;
    match d.shortest_accepted() {
        Some(w) => writeln!(out, "shortest accepted: {}", alphabet.render(&w))?,
        None => writeln!(out, "language is empty")?,
    }
    for text in &a.word {
        let w = alphabet.parse_word(text)?;
        let verdict = if d.accepts(&w) { "accept" } else { "reject" };
        writeln!(out, "{} {verdict}", alphabet.render(&w))?;
    }
    Ok(())
}
