use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn qrg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrg")).args(args).output().unwrap()
}

fn f(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let spe = qrg(&["check", "--kind", "spe", &f("fig4.qrg"), &f("fig4_sigma_n2.prof"), "--depth", "8"]);
    assert_eq!(code(&spe), 0, "{}", stdout(&spe));
    let secure = qrg(&["check", "--kind", "secure", &f("fig4.qrg"), &f("fig4_sigma_n2.prof"), "--depth", "8"]);
    assert_eq!(code(&secure), 1);
    assert!(stdout(&secure).contains("player 1 deviates"), "{}", stdout(&secure));
}

#[test]
fn check_reports_witness_as_json() {
    let o = qrg(&["--json", "check", "--kind", "secure", &f("fig4.qrg"), &f("fig4_sigma_n2.prof"), "--depth", "8"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], false);
    assert_eq!(v["costs"], "(0, 2)");
    assert_eq!(v["witness"]["player"], 1);
    assert_eq!(v["witness"]["deviation"], "(0, inf)");
}

#[test]
fn depth_is_automatic_only_for_terminal_lassos() {
    let o = qrg(&["check", "--kind", "secure", &f("fig1_g.qrg"), &f("fig1_s1_s2.prof")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = qrg(&["check", "--kind", "spe", &f("fig1_g.qrg"), &f("fig1_s1_s2.prof")]);
    assert_eq!(code(&o), 1);
    let o = qrg(&["check", "--kind", "spe", &f("fig4.qrg"), &f("fig4_sigma_n2.prof")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn broken_games_are_input_errors() {
    for name in ["broken_empty_goal.qrg", "broken_dead_end.qrg"] {
        let o = qrg(&["validate", &f(name)]);
        assert_eq!(code(&o), 3, "{name}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(code(&qrg(&["validate", &f("fig6.qrg")])), 0);
    assert_eq!(code(&qrg(&["validate", "/nonexistent.qrg"])), 3);
}

#[test]
fn goal_and_dev_optimality_checks() {
    let o = qrg(&["check", "--kind", "goalopt", &f("fig5.qrg"), &f("fig5_sigma_n3.prof"), "--depth", "8"]);
    assert_eq!(code(&o), 0);
    // d_dev = 4 + 3 = 7 fits in depth 8; both costs are finite.
    let o = qrg(&["check", "--kind", "devopt", &f("fig5.qrg"), &f("fig5_sigma_n3.prof"), "--depth", "8"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    // Player 3's goal at 5 gives d_dev = 5 + 8 = 13.
    let o = qrg(&["check", "--kind", "devopt", &f("fig6.qrg"), &f("fig6_sigma.prof"), "--depth", "12"]);
    assert_eq!(code(&o), 3);
    let o = qrg(&["check", "--kind", "devopt", &f("fig5.qrg"), &f("fig5_sigma_n3.prof"), "--depth", "5"]);
    assert_eq!(code(&o), 3);
    let o = qrg(&["check", "--kind", "devopt", &f("devopt_gap.qrg"), &f("devopt_gap.prof"), "--depth", "8"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("reaches (0, inf, inf) instead of (0, 1, inf)"), "{}", stdout(&o));
}

#[test]
fn solve_output_checks_as_subgame_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spse.prof");
    let o = qrg(&["solve", "--kind", "spse", &f("fig5.qrg"), "--depth", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = qrg(&["check", "--kind", "spse", &f("fig5.qrg"), out.to_str().unwrap(), "--depth", "7"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn decide_emits_witnesses_that_recheck() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrg(&["--json", "decide-secure", &f("fig5.qrg"), "--emit", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["answer"], "yes");
    let depth = v["depth"].as_u64().unwrap().to_string();
    let prof = dir.path().join("witness.prof");
    for kind in ["secure", "goalopt", "devopt"] {
        let o = qrg(&["check", "--kind", kind, &f("fig5.qrg"), prof.to_str().unwrap(), "--depth", &depth]);
        assert_eq!(code(&o), 0, "{kind}: {}", stdout(&o));
    }
    let moore = dir.path().join("witness.moore");
    let o = qrg(&["check", "--kind", "secure", &f("fig5.qrg"), moore.to_str().unwrap(), "--depth", "12"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn decide_thresholds_and_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("walk.qrg");
    std::fs::write(&game, "players 1\nvertex A owner=1\nvertex B owner=1\nedge A B\nedge B B\ngoal 1 B\ninit A\n").unwrap();
    let g = game.to_str().unwrap();
    assert_eq!(code(&qrg(&["decide-secure", g, "--thresholds", "0"])), 1);
    assert_eq!(code(&qrg(&["decide-secure", g, "--thresholds", "1"])), 0);
    assert_eq!(code(&qrg(&["decide-secure", g, "--thresholds", "1,2"])), 3);
    assert_eq!(code(&qrg(&["decide-secure", &f("fig5.qrg"), "--depth", "30", "--nodes", "1000"])), 4);
    let o = qrg(&["decide-secure", &f("fig5.qrg"), "--depth", "6", "--profiles", "1", "--seeds", "1", "--thresholds", "0,0"]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
}

#[test]
fn attractor_regions() {
    // Player 2 can bounce back to A forever.
    let o = qrg(&["attractor", &f("fig5.qrg"), "--protagonist", "player:1", "--reach", "C"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("winning region: {C}"), "{}", stdout(&o));
    let o = qrg(&["attractor", &f("fig5.qrg"), "--protagonist", "coalition:1", "--reach", "A", "--safe", "A", "B"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = qrg(&["attractor", &f("fig5.qrg"), "--protagonist", "team:1", "--reach", "C"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn dot_export_is_deterministic() {
    let a = qrg(&["export-dot", &f("fig5.qrg")]);
    let b = qrg(&["export-dot", &f("fig5.qrg")]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.matches("owner=").count(), 3);
    assert!(text.contains("\"A\" [label=\"A\", shape=circle, owner=1]"));
    assert_eq!(text.lines().filter(|l| l.contains(" -> ") && !l.contains("__start")).count(), 5);
    assert!(!text.contains("penwidth"));
    let o = qrg(&["export-dot", &f("fig5.qrg"), "--profile", &f("fig5_sigma_n1.prof")]);
    assert_eq!(stdout(&o).matches("penwidth").count(), 3);
}

#[test]
fn corpus_runs_clean() {
    let o = qrg(&["corpus", &f("manifest.toml")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("fig6_sigma.prof: ABCBYDDDDDDDD (0, 0, 5)"));
}
