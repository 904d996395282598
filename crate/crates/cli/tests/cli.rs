use std::process::{Command, Output};

fn hpvcea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpvcea")).args(args).env_remove("RUST_LOG").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line[key.len()..].trim().parse().unwrap()
}

#[test]
fn reproduction_reports_threshold_quantities() {
    let out = stdout(&hpvcea(&["reproduction", "--controls", "0.1,0.07,0.05,0.03,0.1"]));
    assert!((value(&out, "R_e") - 0.9479).abs() < 1e-3);
    assert!((value(&out, "R_e").powi(2) - value(&out, "T_m_f") * value(&out, "T_f_m")).abs() < 1e-5);
    assert!(out.contains("stability stable"));
    let out = stdout(&hpvcea(&["reproduction", "--controls", "0,0,0,0,0"]));
    assert!(out.contains("stability unstable"));
}

#[test]
fn calibrate_uses_scenario_entry_or_flags() {
    let out = stdout(&hpvcea(&["calibrate", "--mask", "S2", "--target", "0.9"]));
    assert!((value(&out, "R_e") - 0.9).abs() < 1e-6);
    let out = stdout(&hpvcea(&["calibrate", "-c", "fig2b", "--mask", "S3", "--target", "0.9", "--free", "u1", "--fixed", "0,0,0,0.05,0"]));
    assert!(out.contains("u2=0.0500"));
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    for args in [
        vec!["calibrate", "--mask", "S4", "--target", "2", "--free", "u1"],
        vec!["calibrate", "-c", "fig2b", "--mask", "S4", "--target", "0.9"],
        vec!["simulate", "--strategy", "S9"],
        vec!["reproduction", "--controls", "0.1,0.2"],
        vec!["rank", "-c", "fig2b", "--family", "constant"],
        vec!["run", "-c", "/nonexistent/scenario.toml"],
    ] {
        let o = hpvcea(&args);
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(!o.stderr.is_empty(), "{args:?} gave no diagnostic");
    }
}

#[test]
fn rank_prints_ranking_csv_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.txt");
    let out = stdout(&hpvcea(&["rank", "--family", "constant", "--log", log.to_str().unwrap()]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("strategy,cost,effectiveness,acer,rank"));
    let order: Vec<_> = lines.map(|l| l.split(',').next().unwrap().to_string()).collect();
    assert_eq!(order, ["S4", "S2", "S5", "S8", "S6", "S3", "S1", "S7"]);
    assert!(std::fs::read_to_string(log).unwrap().contains("rank 1: S4"));
}

#[test]
fn simulate_and_optimize_write_trajectory_csv() {
    let out = stdout(&hpvcea(&["simulate", "-c", "fig2a", "--strategy", "fig2a"]));
    assert!(out.starts_with("t,S_f,U_f,I_f,V_f,S_m,I_m,V_m,w1,w2,u1,u2,alpha\n"));
    assert_eq!(out.lines().count(), 5002);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s4.csv");
    let json = dir.path().join("s4.json");
    let o = hpvcea(&["optimize", "-c", "table4", "--mask", "S4", "-o", csv.to_str().unwrap(), "--summary", json.to_str().unwrap()]);
    stdout(&o);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["strategy"], "S4*");
    assert!((summary["cost"].as_f64().unwrap() / 47.92 - 1.0).abs() < 0.1);
    let text = std::fs::read_to_string(csv).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("100,") && last.ends_with(",0,0,0,0,0"), "{last}");
}

#[test]
fn compare_accepts_explicit_pairs() {
    let out = stdout(&hpvcea(&["compare", "-c", "section42-comparisons", "--pairs", "S4:S2,S5:S2*"]));
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("S4 vs S2:"));
    assert!(lines[1].ends_with("preferred S2*"));
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&hpvcea(&["run", "-c", "section42-comparisons", "-o", dir.path().to_str().unwrap()]));
    assert!(out.contains("comparisons"));
    for f in ["baseline.csv", "ranking_constant.csv", "ranking_optimal.log", "comparisons.csv", "summary.json", "trajectory_S4_opt.csv"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}
