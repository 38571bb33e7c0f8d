//! Replays `corpus/expectations.txt` against the real binary, and checks
//! that repeated in-process runs are byte-identical.

mod support;

use std::process::Command as Process;

use seni_cli::run;
use support::*;

#[test]
fn expectations_manifest_holds() {
    let exe = env!("CARGO_BIN_EXE_seni");
    let expectations = parse_expectations();
    assert!(expectations.len() >= 10, "manifest unexpectedly small");
    for exp in &expectations {
        let mut argv = exp.argv.clone();
        // resolve the file argument (always right after the verb)
        argv[1] = corpus_path(&argv[1]).display().to_string();
        let output = Process::new(exe)
            .args(&argv)
            .output()
            .expect("binary runs");
        let stdout = String::from_utf8_lossy(&output.stdout);
        let code = output.status.code().unwrap_or(-1);
        assert_eq!(
            code, exp.exit,
            "{}: exit {code} != {} (stdout:\n{stdout})",
            exp.name, exp.exit
        );
        for needle in &exp.substrings {
            assert!(
                stdout.contains(needle),
                "{}: missing `{needle}` in output:\n{stdout}",
                exp.name
            );
        }
    }
}

#[test]
fn every_corpus_command_is_deterministic() {
    for exp in parse_expectations() {
        let cfg = config_from_argv(&exp.argv);
        let first = run(&cfg);
        let second = run(&cfg);
        let third = run(&cfg);
        assert_eq!(first, second, "{} differs between runs", exp.name);
        assert_eq!(second, third, "{} differs between runs", exp.name);
        assert_eq!(first.exit, exp.exit, "{} exit code", exp.name);
    }
}

#[test]
fn binary_and_library_agree() {
    let exe = env!("CARGO_BIN_EXE_seni");
    for exp in parse_expectations().iter().take(6) {
        let cfg = config_from_argv(&exp.argv);
        let lib_out = run(&cfg);
        let mut argv = exp.argv.clone();
        argv[1] = corpus_path(&argv[1]).display().to_string();
        let bin_out = Process::new(exe).args(&argv).output().unwrap();
        assert_eq!(
            String::from_utf8_lossy(&bin_out.stdout),
            lib_out.output,
            "{}",
            exp.name
        );
        assert_eq!(bin_out.status.code(), Some(lib_out.exit), "{}", exp.name);
    }
}

#[test]
fn json_outputs_are_valid_json() {
    for verb in ["verify", "graph", "trace", "check"] {
        let argv: Vec<String> = match verb {
            "trace" => "trace Table.seni --steps 5 --seed 3 --format json",
            "verify" => "verify Table.seni --format json",
            "graph" => "graph Philosopher.seni --args 0 --format json",
            _ => "check Table.seni --format json",
        }
        .split_whitespace()
        .map(String::from)
        .collect();
        let cfg = config_from_argv(&argv);
        let out = run(&cfg);
        let parsed: serde_json::Value =
            serde_json::from_str(&out.output).unwrap_or_else(|e| {
                panic!("{verb} --format json is not valid JSON ({e}):\n{}", out.output)
            });
        assert_eq!(parsed["command"], verb);
    }
}

#[test]
fn sat_json_reports_model() {
    let argv: Vec<String> = "sat Table.seni AllWaiting --format json"
        .split_whitespace()
        .map(String::from)
        .collect();
    let out = run(&config_from_argv(&argv));
    let parsed: serde_json::Value = serde_json::from_str(&out.output).unwrap();
    assert_eq!(parsed["command"], "sat");
    assert_eq!(parsed["outcome"]["result"], "SAT");
    assert!(parsed["outcome"]["model"].is_object());
}

#[test]
fn unknown_flags_are_errors() {
    let exe = env!("CARGO_BIN_EXE_seni");
    let out = Process::new(exe)
        .args([
            "graph",
            corpus_path("Table.seni").to_str().unwrap(),
            "--definitely-not-a-flag",
        ])
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn max_states_zero_is_rejected() {
    let exe = env!("CARGO_BIN_EXE_seni");
    let out = Process::new(exe)
        .args([
            "graph",
            corpus_path("Table.seni").to_str().unwrap(),
            "--max-states",
            "0",
        ])
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
}
