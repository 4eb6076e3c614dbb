//! End-to-end CLI checks against the built binary: golden outputs on the
//! shipped fixtures, byte-identical reruns, the match -> verify round
//! trip, and the documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_matchmarket")
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn match_gs_on_the_contested_market_is_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "match",
        "--engine",
        "gs",
        "--propose",
        "applicants",
        "-i",
        &fixture("market_2x2.csv"),
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(
        read(dir.path(), "matching.csv"),
        "applicant,program\nA,β\nB,α\n"
    );
    assert!(stdout(&out).contains("matched 2 of 2 applicants"));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn match_output_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let matching = dir.path().join("matching.csv");
    assert_eq!(
        run(&["match", "-i", &fixture("market_2x2.csv"), "-o", out_dir])
            .status
            .code(),
        Some(0)
    );
    let verify = run(&[
        "verify",
        "-i",
        &fixture("market_2x2.csv"),
        "-m",
        matching.to_str().unwrap(),
        "-o",
        out_dir,
    ]);
    assert_eq!(verify.status.code(), Some(0));
    assert!(stdout(&verify).contains("STABLE, 0 blocking pairs"));
    assert_eq!(
        read(dir.path(), "stability.csv"),
        "applicant,program,applicant_gain,program_gain\n"
    );
}

#[test]
fn priority_pairing_is_flagged_unstable_by_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let market = fixture("boston_instability.csv");
    let run_match = run(&["match", "--engine", "boston", "-i", &market, "-o", out_dir]);
    assert_eq!(run_match.status.code(), Some(0));
    assert!(stdout(&run_match).contains("matched 2 of 3 applicants"));

    let verify = run(&[
        "verify",
        "-i",
        &market,
        "-m",
        dir.path().join("matching.csv").to_str().unwrap(),
        "-o",
        out_dir,
    ]);
    assert_eq!(verify.status.code(), Some(0));
    assert!(stdout(&verify).contains("UNSTABLE, 1 blocking pair"));
    let report = read(dir.path(), "stability.csv");
    assert!(
        report.lines().any(|l| l.starts_with("A,P2,")),
        "report: {report}"
    );
}

#[test]
fn gs_flattens_tier_rows_and_stays_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let market = fixture("boston_instability.csv");
    let run_match = run(&[
        "match", "--engine", "gs", "--trace", "-i", &market, "-o", out_dir,
    ]);
    assert_eq!(run_match.status.code(), Some(0));
    assert!(stdout(&run_match).contains("flattened"));
    assert!(!read(dir.path(), "trace.txt").is_empty());

    let verify = run(&[
        "verify",
        "-i",
        &market,
        "-m",
        dir.path().join("matching.csv").to_str().unwrap(),
        "-o",
        out_dir,
    ]);
    assert!(stdout(&verify).contains("STABLE, 0 blocking pairs"));
}

#[test]
fn cost_optimize_reports_the_season_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "cost",
        "--optimize",
        "--schedule",
        &fixture("ophtho2019.cfg"),
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("optimal application count: q* = 116"),
        "stdout: {text}"
    );
    assert!(
        text.contains("expected total cost at q*: $9,864.86"),
        "stdout: {text}"
    );

    let csv = read(dir.path(), "cost.csv");
    let q116 = csv.lines().find(|l| l.starts_with("116,")).unwrap();
    let fields: Vec<&str> = q116.split(',').collect();
    assert_eq!(fields[1], "317000", "fees at q=116 in exact cents");
    assert_eq!(fields[5], "true", "q=116 is inside the $10,000 budget");
}

#[test]
fn simulate_outputs_are_byte_identical_across_reruns() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = cfg_dir.path().join("small.cfg");
    std::fs::write(
        &cfg,
        "applicants = 8\nprograms = 4\ncapacity = 1 2\napplications_per_applicant = 3\nscreening = bernoulli 0.5\ncorrelation = 0.4\nreplicas = 100\nseed = 5\nrounds = 2\n",
    )
    .unwrap();

    let mut curves: Vec<String> = Vec::new();
    let mut escalations: Vec<String> = Vec::new();
    let mut stdouts: Vec<String> = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "-o",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        curves.push(read(dir.path(), "curve.csv"));
        escalations.push(read(dir.path(), "escalation.csv"));
        stdouts.push(stdout(&out));
    }
    assert_eq!(curves[0], curves[1]);
    assert_eq!(escalations[0], escalations[1]);
    assert_eq!(stdouts[0], stdouts[1]);
    assert!(curves[0].starts_with("k,cum_prob,stderr,n_k,"));
    assert!(escalations[0].starts_with("round,mean_q,mean_interviews"));

    let dir = tempfile::tempdir().unwrap();
    let reseeded = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(reseeded.status.code(), Some(0));
    assert_ne!(
        read(dir.path(), "curve.csv"),
        curves[0],
        "--seed must override the config"
    );
    let manifest = read(dir.path(), "manifest.json");
    assert!(manifest.contains("\"seed\": 6"), "manifest: {manifest}");
}

#[test]
fn payoff_tables_and_dominance_on_the_smallest_game() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "payoff",
        "-i",
        &fixture("market_1x1.csv"),
        "--spec",
        &fixture("payoff_basic.json"),
        "--dominance",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("mode: subsets"),
        "1x1 market fits subset actions: {text}"
    );
    assert!(
        text.contains("full-list weak dominance: yes"),
        "stdout: {text}"
    );

    let table = read(dir.path(), "payoff.csv");
    assert!(table.starts_with("action:A,action:P,payoff:A,payoff:P\n"));
    assert!(table.contains("rank{P},rank{A},10,8"), "table: {table}");
    assert_eq!(
        read(dir.path(), "dominance.csv"),
        "player,better_action,full_list_payoff,deviation_payoff,opponent_actions\n"
    );
}

#[test]
fn config_dir_env_var_resolves_bare_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin())
        .args([
            "match",
            "-i",
            "market_2x2.csv",
            "-o",
            dir.path().to_str().unwrap(),
        ])
        .env(
            "MATCHMARKET_CONFIG_DIR",
            format!("{}/fixtures", env!("CARGO_MANIFEST_DIR")),
        )
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(
        read(dir.path(), "matching.csv"),
        "applicant,program\nA,β\nB,α\n"
    );
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    // 2: usage
    assert_eq!(run(&["match"]).status.code(), Some(2));

    // 3: unreadable input
    let missing = run(&["match", "-i", "/no/such/market.csv", "-o", out_dir]);
    assert_eq!(missing.status.code(), Some(3));

    // 3: malformed CSV, message names the line
    let gap = dir.path().join("gap.csv");
    std::fs::write(
        &gap,
        "applicant,A,1,,P\napplicant,A,3,,Q\nprogram,P,1,,A\nprogram,Q,1,,A\n",
    )
    .unwrap();
    let bad = run(&["match", "-i", gap.to_str().unwrap(), "-o", out_dir]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stderr(&bad).contains("line 2"), "stderr: {}", stderr(&bad));

    // 4: structurally fine, semantically invalid (priority pairing needs tiers)
    let strict = run(&[
        "match",
        "--engine",
        "boston",
        "-i",
        &fixture("market_2x2.csv"),
        "-o",
        out_dir,
    ]);
    assert_eq!(strict.status.code(), Some(4), "stderr: {}", stderr(&strict));

    // 5: guard limit (4 players exceed the subset-mode player cap)
    let guarded = run(&[
        "payoff",
        "-i",
        &fixture("market_2x2.csv"),
        "--spec",
        &fixture("payoff_basic.json"),
        "--mode",
        "subsets",
        "-o",
        out_dir,
    ]);
    assert_eq!(
        guarded.status.code(),
        Some(5),
        "stderr: {}",
        stderr(&guarded)
    );
}

#[test]
fn manifests_differ_only_in_duration_across_reruns() {
    let mut manifests: Vec<serde_json::Value> = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[
            "match",
            "-i",
            &fixture("market_1x1.csv"),
            "-o",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let mut parsed: serde_json::Value =
            serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
        parsed["duration_ms"] = 0.into();
        manifests.push(parsed);
    }
    assert_eq!(manifests[0], manifests[1]);
    assert_eq!(manifests[0]["subcommand"], "match");
    assert_eq!(manifests[0]["settings"]["engine"], "gs");
}
