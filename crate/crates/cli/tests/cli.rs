use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use specsearch::automata::{parse_dfa, write_dfa};
use specsearch::identify::parse_examples;
use specsearch::tomita::tomita_dfa;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specsearch"))
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn err(args: &[&str]) -> String {
    let o = run(args);
    assert!(!o.status.success(), "{args:?} should fail");
    String::from_utf8(o.stderr).unwrap()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const TASK_EXAMPLES: &str = "../core/fixtures/gridworld_examples.toml";

#[test]
fn identify_writes_consistent_dfas() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let examples = fixture(TASK_EXAMPLES);
    let stdout = ok(&["--out", out, "identify", "--examples", examples.to_str().unwrap(), "-k", "2"]);
    let ex = parse_examples(&fs::read_to_string(&examples).unwrap()).unwrap();
    for i in 1..=2 {
        let d = parse_dfa(&fs::read_to_string(tmp.path().join(format!("dfa_{i}.dfa"))).unwrap()).unwrap();
        assert!(ex.is_consistent(&d));
        assert!(stdout.contains(&format!("dfa_{i}: {} states", d.num_states())));
        assert!(tmp.path().join(format!("dfa_{i}.dot")).is_file());
    }
}

#[test]
fn identify_without_examples_gives_one_state() {
    let tmp = tempfile::tempdir().unwrap();
    let ex = tmp.path().join("empty.toml");
    fs::write(&ex, "alphabet = [\"0\", \"1\"]\npositive = []\nnegative = []\n").unwrap();
    let stdout = ok(&["--out", tmp.path().to_str().unwrap(), "identify", "--examples", ex.to_str().unwrap()]);
    assert!(stdout.contains("dfa_1: 1 states"), "{stdout}");
}

#[test]
fn contradictory_examples_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let ex = tmp.path().join("bad.toml");
    fs::write(&ex, "alphabet = [\"0\", \"1\"]\npositive = [\"0,1\"]\nnegative = [\"0,1\"]\n").unwrap();
    let stderr = err(&["--out", tmp.path().to_str().unwrap(), "identify", "--examples", ex.to_str().unwrap()]);
    assert!(stderr.starts_with("error:"), "{stderr}");
}

#[test]
fn help_lists_every_flag() {
    let cases: [(&str, &[&str]); 6] = [
        ("", &["--seed", "--out", "identify", "learn", "diss", "tomita", "inspect"]),
        ("identify", &["--examples", "--k", "--max-states"]),
        (
            "learn",
            &[
                "--examples", "--prompt", "--oracle", "--truth", "--backend", "--budget", "--allow-unsure",
                "--partial-rules", "--endpoint", "--model", "--endpoint-config",
            ],
        ),
        (
            "diss",
            &[
                "--config", "--oracle", "--backend", "--budget", "--allow-unsure", "--lambda", "--horizon",
                "--iterations", "--endpoint", "--model",
            ],
        ),
        ("tomita", &["--oracle", "--backend", "--queries", "--allow-unsure", "--endpoint"]),
        ("inspect", &["--word", "--dot"]),
    ];
    for (sub, flags) in cases {
        let args: Vec<&str> = if sub.is_empty() { vec!["--help"] } else { vec![sub, "--help"] };
        let help = ok(&args);
        for f in flags {
            assert!(help.contains(f), "{sub} help lacks {f}:\n{help}");
        }
    }
}

#[test]
fn missing_world_file_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "world = \"nowhere.map\"\ndemos = []\n").unwrap();
    let stderr = err(&["--out", tmp.path().to_str().unwrap(), "diss", "--config", cfg.to_str().unwrap()]);
    assert!(stderr.contains("nowhere.map"), "{stderr}");
}

#[test]
fn inspect_evaluates_words() {
    let gt = fixture("fixtures/ground_truth.dfa");
    let stdout = ok(&["inspect", gt.to_str().unwrap(), "--word", "blue,green,yellow", "--word", "blue,yellow"]);
    assert!(stdout.contains("states: 4"));
    assert!(stdout.contains("[blue, green, yellow] accept"));
    assert!(stdout.contains("[blue, yellow] reject"));
    assert!(ok(&["inspect", gt.to_str().unwrap(), "--dot"]).starts_with("digraph"));
}

#[test]
fn learn_from_a_truth_file_recovers_the_language() {
    let tmp = tempfile::tempdir().unwrap();
    let truth = tomita_dfa(4).unwrap();
    let truth_path = tmp.path().join("t4.dfa");
    fs::write(&truth_path, write_dfa(&truth)).unwrap();
    let ex = tmp.path().join("seed.toml");
    fs::write(&ex, "alphabet = [\"0\", \"1\"]\npositive = []\nnegative = [\"0,0,0\"]\n").unwrap();
    let out = tmp.path().join("out");
    ok(&[
        "--out", out.to_str().unwrap(), "learn", "--examples", ex.to_str().unwrap(), "--truth",
        truth_path.to_str().unwrap(), "--backend", "lstar", "--budget", "120",
    ]);
    let learned = parse_dfa(&fs::read_to_string(out.join("learned.dfa")).unwrap()).unwrap();
    assert!(learned.equivalent(&truth).unwrap());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["equivalent_to_truth"], true);
    assert_eq!(report["hallucination"]["incorrect"], 0);
}

#[test]
fn scripted_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture("fixtures/diss.toml");
    let examples = fixture(TASK_EXAMPLES);
    let runs: [&[&str]; 3] = [
        &["diss", "--config", config.to_str().unwrap(), "--budget", "4", "--iterations", "5", "--allow-unsure"],
        &["learn", "--examples", examples.to_str().unwrap(), "--partial-rules", "--budget", "12"],
        &["tomita"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = tmp.path().join(format!("{i}a"));
        let b = tmp.path().join(format!("{i}b"));
        for d in [&a, &b] {
            let mut full = vec!["--seed", "3", "--out", d.to_str().unwrap()];
            full.extend_from_slice(args);
            ok(&full);
        }
        assert_eq!(dir_contents(&a), dir_contents(&b), "{args:?}");
    }
}

#[test]
fn api_key_never_reaches_output() {
    let tmp = tempfile::tempdir().unwrap();
    let secret = "sk-test-0123456789-do-not-print";
    let out = tmp.path().join("out");
    let examples = fixture(TASK_EXAMPLES);
    let o = bin()
        .env("SPECSEARCH_TEST_KEY", secret)
        .env("RUST_LOG", "trace")
        .args([
            "--out", out.to_str().unwrap(), "learn", "--examples", examples.to_str().unwrap(), "--oracle", "llm",
            "--endpoint", "http://127.0.0.1:9/v1", "--budget", "2",
        ])
        .arg("--endpoint-config")
        .arg({
            let p = tmp.path().join("endpoint.toml");
            fs::write(&p, "api_key_env = \"SPECSEARCH_TEST_KEY\"\nretries = 1\ntimeout_secs = 2\n").unwrap();
            p
        })
        .output()
        .unwrap();
    let mut seen = String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr);
    if out.is_dir() {
        for (_, bytes) in dir_contents(&out) {
            seen += &String::from_utf8_lossy(&bytes);
        }
    }
    assert!(!seen.contains(secret));
    assert!(seen.contains("SPECSEARCH_TEST_KEY"), "the variable name is fine to mention:\n{seen}");
}
