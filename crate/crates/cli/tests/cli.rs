//! End-to-end runs of the `driftls` binary.

use std::path::Path;
use std::process::{Command, Output};

fn driftls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftls"))
        .args(args)
        .env("DRIFTLS_THREADS", "1")
        .output()
        .expect("spawn driftls")
}

fn out_arg(dir: &Path) -> String {
    format!("--out={}", dir.display())
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn horizon_zero_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = driftls(&["track", "--horizon", "0", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&dir.path().join("track_fols_seed0.csv")), "# driftls.track.v1\nn,err,wall_ns\n");

    let o = driftls(&["gen", "--horizon", "0", &out_arg(dir.path())]);
    assert!(o.status.success());
    assert_eq!(read(&dir.path().join("news_seed0.jsonl")), "");
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = driftls(&["track", "--algo", "frls", "--horizon", "3000", "--seed", "7", &out_arg(dir.path())]);
        assert!(o.status.success());
        let o = driftls(&["gen", "--horizon", "200", "--seed", "7", &out_arg(dir.path())]);
        assert!(o.status.success());
    }
    for f in ["track_frls_seed7.csv", "news_seed7.jsonl"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
    // a different seed changes the data
    let c = tempfile::tempdir().unwrap();
    driftls(&["track", "--algo", "frls", "--horizon", "3000", "--seed", "8", &out_arg(c.path())]);
    assert_ne!(read(&a.path().join("track_frls_seed7.csv")), read(&c.path().join("track_frls_seed8.csv")));
}

#[test]
fn every_csv_starts_with_schema_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    for args in [
        vec!["track", "--algo", "sag", "--horizon", "500"],
        vec!["bandit", "--algo", "fpege", "--horizon", "500"],
        vec!["bandit", "--algo", "linucb", "--kappa", "1", "--horizon", "300"],
        vec!["bounds", "--seeds", "3", "--horizon", "512"],
        vec!["bench", "--dims=4,8", "--steps=200", "--warmup=10", "--algos=fols,sm"],
    ] {
        let mut a = args.clone();
        a.push(&out);
        let o = driftls(&a);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let mut n = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "csv") {
            assert!(read(&p).starts_with("# driftls."), "{}", p.display());
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    // unknown key, bad value, missing kappa: config errors
    assert_eq!(driftls(&["track", "--bogus=1", &out]).status.code(), Some(2));
    assert_eq!(driftls(&["track", "--d=abc", &out]).status.code(), Some(2));
    assert_eq!(driftls(&["bandit", "--algo", "linucb", &out]).status.code(), Some(2));
    assert_eq!(driftls(&["track", "--seeds=", &out]).status.code(), Some(2));
    // mu c / 4 outside (2/3, 1)
    let o = driftls(&["bounds", "--c=1", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu*c/4"));
    // unreadable config and event log are I/O errors
    assert_eq!(driftls(&["track", "--config", "/nonexistent/run.cfg", &out]).status.code(), Some(3));
    let o = driftls(&["bandit", "--algo", "linucb", "--kappa=1", "--log=/nonexistent.jsonl", &out]);
    assert_eq!(o.status.code(), Some(3));
    // output directory blocked by a file
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = driftls(&["track", "--horizon=10", &format!("--out={}", blocker.join("sub").display())]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(driftls(&["bounds", "--seeds=2", "--horizon=256", &out]).status.code(), Some(0));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# fOLS run\nalgo = frls\nhorizon = 100\nseeds = 2\n").unwrap();
    let cfg_s = cfg.display().to_string();
    let out = out_arg(dir.path());
    let o = driftls(&["track", "--config", &cfg_s, "--horizon=50", &out]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&read(&dir.path().join("track_frls_summary.json"))).unwrap();
    assert_eq!(summary["config"]["horizon"], "50");
    assert_eq!(summary["config"]["algo"], "frls");
    assert_eq!(summary["seeds"], serde_json::json!([0, 1]));
    let last = read(&dir.path().join("track_frls_seed1.csv"));
    assert!(last.lines().last().unwrap().starts_with("50,"));
}

#[test]
fn csv_flag_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = driftls(&["bandit", "--algo", "pege", "--horizon", "100", "--csv", &out_arg(dir.path())]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("# driftls.bandit_summary.v1\nn,mean_regret,median_regret,q90_regret\n"));
    assert!(stdout.lines().last().unwrap().starts_with("100,"));
}

#[test]
fn gen_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("logs/news.jsonl");
    let log_arg = format!("--path={}", log.display());
    let o = driftls(&["gen", "--horizon", "2000", "--k", "4", "--d", "6", &log_arg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(log.with_extension("jsonl.truth.json").exists());
    let o = driftls(&[
        "bandit",
        "--algo=linucb",
        "--variant=exact",
        "--kappa=0.5",
        &format!("--log={}", log.display()),
        "--seeds=2",
        &out_arg(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&read(&dir.path().join("replay_summary.json"))).unwrap();
    assert_eq!(summary["d"], 6);
    assert_eq!(summary["k_max"], 4);
    let matched = summary["runs"][0]["matched"].as_u64().unwrap();
    assert!(matched > 300 && matched < 700, "matched {matched}");
}

#[test]
fn zero_noise_pege_is_flat_after_first_phase() {
    let dir = tempfile::tempdir().unwrap();
    let o = driftls(&[
        "bandit",
        "--algo=pege",
        "--noise=zero",
        "--d=3",
        "--horizon=200",
        "--trace=full",
        &out_arg(dir.path()),
    ]);
    assert!(o.status.success());
    let text = read(&dir.path().join("bandit_pege_seed0.csv"));
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 200);
    // columns: n, phase, arm_id, reward, inst_regret, ...
    // greedy rounds have no arm id; with exact rewards they are optimal from phase 1 on
    let greedy: Vec<&Vec<String>> = rows.iter().filter(|r| r[2].is_empty()).collect();
    assert!(!greedy.is_empty());
    for r in greedy {
        let inst: f64 = r[4].parse().unwrap();
        assert!(inst.abs() <= 1e-12, "round {}: regret {inst}", r[0]);
    }
}
