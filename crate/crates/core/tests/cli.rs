//! The command-line binary end to end.

use std::fs;
use std::process::{Command, Output};

fn expectrl(args: &[&str], out_env: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expectrl"))
        .args(args)
        .env("EXPECTRL_OUT", out_env)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_reports_values_and_the_equivalence_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    let o = expectrl(
        &["solve", "--garnet", "7", "--alpha", "0.2", "--check-theorem2", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("optimal fixed points gap"));
    assert!(out.join("value.json").exists() && out.join("equivalence.json").exists());
    // An impossible tolerance turns the check red.
    let o = expectrl(&["solve", "--garnet", "7", "--alpha", "0.2", "--check-theorem2", "--gap-tol", "0"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn train_eval_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = expectrl(
        &[
            "train", "--family", "cliff_grid", "--algorithm", "q_expectile", "--alpha", "0.3", "--seeds", "2",
            "--n-eval", "2", "--set", "tabular.episodes=100", "--jobs", "1",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("cliff_grid-q_expectile-a0.3");
    for f in ["config.json", "run.json", "seed-0/log.csv", "seed-1/eval.json", "seed-1/checkpoint.json"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let snapshot = fs::read_to_string(run.join("config.json")).unwrap();
    assert!(snapshot.contains("\"episodes\": 100"));

    let ckpt = run.join("seed-0/checkpoint.json");
    let eval_out = dir.path().join("eval");
    let o = expectrl(
        &["eval", "--checkpoint", ckpt.to_str().unwrap(), "--n-eval", "2", "--out", eval_out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("R_worst") && eval_out.join("eval.csv").exists());

    let o = expectrl(&["report", run.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("report/summary.csv").exists());
}

#[test]
fn random_policy_on_zero_reward_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = expectrl(&["eval", "--random", "--family", "zero_reward", "--omega", "0"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("R_worst 0\n") && text.contains("R_average 0\n"), "{text}");
}

#[test]
fn failing_seeds_make_train_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    // Tabular Q-learning on the continuous pendulum fails every seed.
    let o = expectrl(
        &["train", "--family", "pendulum_lite", "--algorithm", "vi", "--seeds", "1", "--n-eval", "1"],
        dir.path(),
    );
    assert!(!o.status.success());
}

#[test]
fn oracle_check_passes_on_a_small_budget() {
    let dir = tempfile::tempdir().unwrap();
    let o = expectrl(
        &["oracle-check", "--distributions", "50", "--mdps", "3", "--probe-pairs", "20"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"version":1,"family":"slip_grid","algorithm":"vi","bogus":3}"#).unwrap();
    let o = expectrl(&["train", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
}
