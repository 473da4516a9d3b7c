use specsearch::diss::{energy_rows, energy_trace, run_diss, DissConfig};
use specsearch::learner::{guess_dfa_vl, lstar, transcript_jsonl, CachingOracle, LstarOptions, VersionSpaceOptions};
use specsearch::tomita::{bench_csv, bench_summary, run_tomita_bench, BenchOptions, TomitaGrammar};
use specsearch::learner::{DfaOracle, MembershipOracle, OracleError};
use specsearch::world::{color_alphabet, fixtures, ground_truth_dfa, scripted_task_oracle};
use specsearch::automata::write_dfa;

fn diss_outputs(seed: u64, allow_unsure: bool) -> String {
    let ex = fixtures::seed_examples();
    let mut oracle = CachingOracle::new(ex.clone(), scripted_task_oracle(false, allow_unsure));
    let cfg = DissConfig {
        query_budget: 4,
        max_iterations: 6,
        seed,
        allow_unsure,
        all_rules: false,
        ..DissConfig::default()
    };
    let r: specsearch::DissReport =
        run_diss(&cfg, &fixtures::world_8x8(), &fixtures::demos(), &color_alphabet(), &mut oracle, &ex, Some(&ground_truth_dfa())).unwrap();
    [energy_trace(&r), energy_rows(&r), write_dfa(&r.best_dfa), transcript_jsonl(&r.transcript)].concat()
}

#[test]
fn diss_runs_repeat_byte_for_byte() {
    for (seed, unsure) in [(0, false), (3, true)] {
        assert_eq!(diss_outputs(seed, unsure), diss_outputs(seed, unsure));
    }
}

#[test]
fn learners_repeat_byte_for_byte() {
    let run = |vl: bool| {
        let ex = fixtures::seed_examples();
        let mut oracle = CachingOracle::new(ex.clone(), scripted_task_oracle(true, false));
        let r = if vl {
            guess_dfa_vl(&ex, &mut oracle, 8, &VersionSpaceOptions { seed: 5, ..Default::default() }).unwrap()
        } else {
            lstar(&ex, &mut oracle, 40, &LstarOptions { seed: 5, ..Default::default() }).unwrap()
        };
        format!("{}{}", write_dfa(&r.dfa), r.transcript_jsonl())
    };
    assert_eq!(run(true), run(true));
    assert_eq!(run(false), run(false));
}

#[test]
fn tomita_bench_repeats_byte_for_byte() {
    let factory = |g: &TomitaGrammar, _| -> Result<Box<dyn MembershipOracle + Send>, OracleError> {
        Ok(Box::new(DfaOracle(g.dfa.clone())))
    };
    let run = || {
        let r = run_tomita_bench(&factory, &BenchOptions { seed: 2, ..Default::default() });
        let csvs: String = r.iter().map(bench_csv).collect();
        csvs + &bench_summary(&r)
    };
    assert_eq!(run(), run());
}
