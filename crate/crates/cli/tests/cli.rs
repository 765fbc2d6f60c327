//! End-to-end runs of the `bandsamp` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandsamp"))
        .args(args)
        .env_remove("BANDSAMP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// CSV rows after the config line, split into cells.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].clone()).collect()
}

#[test]
fn c_table_has_every_cell_and_lf_endings() {
    let o = run(&["constants", "--table", "C", "--k", "0..26", "--d", "1..5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["k", "d", "C", "branch"]);
    assert_eq!(rows.len(), 1 + 27 * 5);
    let c01 = rows.iter().find(|r| r[0] == "0" && r[1] == "1").unwrap();
    assert_eq!(c01[2], "0.4812");
    assert_eq!(c01[3], "H");
}

#[test]
fn config_echo_embeds_resolved_ranges() {
    let o = run(&["constants", "--table", "C", "--k", "2..3", "--d", "4"]);
    let first = stdout(&o).lines().next().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(first.trim_start_matches("# config: ")).unwrap();
    assert_eq!(v["command"], "constants");
    assert_eq!(v["params"]["k"], serde_json::json!([2, 3]));
    assert_eq!(v["params"]["d"], serde_json::json!([4]));
}

#[test]
fn bunched_table_accepts_fractions() {
    let o = run(&["constants", "--table", "bunched", "--s", "2", "--tau", "1/4,1/16"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[1], ["2", "1/4", "1.1578"]);
    assert_eq!(rows[2][1], "1/16");
}

#[test]
fn wirtinger_table_json() {
    let o = run(&["constants", "--table", "wirtinger", "--k", "1..2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[0]["tau_1"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((rows[1]["tau_1"].as_f64().unwrap() - 1.875104068711961).abs() < 1e-9);
}

#[test]
fn out_of_range_orders_are_rejected() {
    let o = run(&["constants", "--table", "C", "--k", "0..27"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exceeds"));
}

#[test]
fn compare_paper_flags_deviating_cells() {
    // The published C(21,5) cell is 6.0654 while the constant is 6.6054.
    let o = run(&["constants", "--table", "C", "--compare-paper"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("C(21,5)"));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1 + 95);
    let passes = column(&rows, "pass");
    assert!(passes.iter().filter(|p| *p == "true").count() >= 80);
}

#[test]
fn compare_paper_wirtinger_covers_both_tables() {
    let o = run(&["constants", "--table", "wirtinger", "--compare-paper", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cmp = v["comparisons"].as_array().unwrap();
    assert!(cmp.iter().any(|c| c["table"] == "2"));
    assert!(cmp.iter().any(|c| c["table"] == "3b"));
    assert_eq!(o.status.code(), Some(if cmp.iter().all(|c| c["deviation"].as_f64().unwrap() <= 5e-5) { 0 } else { 1 }));
}

#[test]
fn frame1d_example_passes() {
    let o = run(&["verify", "frame1d", "--W", "1", "--k", "1", "--delta", "0.5", "--seed", "7", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["reports"][0];
    assert_eq!(r["config"]["k"], 1);
    assert!(r["config"]["delta"].as_f64().unwrap() <= 0.5);
    assert_eq!(r["ratios"].as_array().unwrap().len(), 50);
    assert_eq!(v["config"]["params"]["ensemble"]["seed"], 7);
}

#[test]
fn perturb_at_zero_reproduces_base_bounds() {
    let o = run(&["verify", "perturb", "--k", "0", "--epsilon", "0", "--n-functions", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(column(&rows, "a_theory"), ["1"]);
    assert_eq!(column(&rows, "b_theory"), ["1"]);
    assert_eq!(column(&rows, "verdict"), ["pass"]);
}

#[test]
fn bunched_example_passes_below_its_constant() {
    let o = run(&["verify", "bunched", "--s", "2", "--tau", "0.25", "--delta", "1.0", "--n-functions", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(column(&rows, "experiment"), ["fusion", "divdiff"]);
    assert_eq!(column(&rows, "verdict"), ["pass", "pass"]);
}

#[test]
fn bunched_above_its_constant_names_the_bound() {
    // spacing 1.2/0.7 with jitter 0.2·spacing reaches δ close to 1.2 > 1.1578
    let o = run(&["verify", "fusion", "--s", "2", "--tau", "1/4", "--delta", "1.2", "--n-functions", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1.1578"), "{}", stderr(&o));
}

#[test]
fn exploratory_runs_claim_no_verdict() {
    let args = ["verify", "frame1d", "--k", "0", "--delta", "2.0", "--half-length", "100", "--n-functions", "3"];
    assert_eq!(run(&args).status.code(), Some(2));
    let mut ex = args.to_vec();
    ex.push("--exploratory");
    let o = run(&ex);
    assert!(o.status.success());
    assert_eq!(column(&csv_rows(&stdout(&o)), "verdict"), ["none"]);
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "framend", "--k", "1", "--spacing", "0.2", "--jitter", "0.03", "--half-length", "3", "--n-functions", "4", "--seed", "3", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bandsamp"))
        .args(["constants", "--table", "bunched", "--s", "0..1", "--format", "text"])
        .env("BANDSAMP_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("table_bunched.txt")).unwrap();
    assert!(text.starts_with("# config: "));
    assert!(text.contains("s \\ tau"));
}

#[test]
fn saved_sets_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set.txt");
    let set_s = set.to_str().unwrap();
    let base = ["verify", "frame1d", "--k", "2", "--n-functions", "4", "--half-length", "300"];
    let mut gen = base.to_vec();
    gen.extend(["--spacing", "0.6", "--jitter", "0.1", "--set-out", set_s]);
    let a = run(&gen);
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(Path::new(&set).exists());
    let mut load = base.to_vec();
    load.extend(["--set", set_s]);
    let b = run(&load);
    assert!(b.status.success(), "{}", stderr(&b));
    assert_eq!(csv_rows(&stdout(&a)), csv_rows(&stdout(&b)));
}

#[test]
fn delta_sweep_approaches_one_when_oversampled() {
    let o = run(&["sweep", "delta", "--k", "0", "--from", "0.03", "--to", "0.6", "--steps", "3", "--n-functions", "6", "--half-length", "300"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    let mins: Vec<f64> = column(&rows, "min_ratio").iter().map(|s| s.parse().unwrap()).collect();
    let maxs: Vec<f64> = column(&rows, "max_ratio").iter().map(|s| s.parse().unwrap()).collect();
    // δ·m_Ω = 0.03·π/2 ≈ 0.047
    assert!((mins[0] - 1.0).abs() < 0.01 && (maxs[0] - 1.0).abs() < 0.01);
    assert!(mins[0] >= mins[2]);
}

#[test]
fn epsilon_sweep_keeps_verdicts() {
    let o = run(&["sweep", "epsilon", "--k", "0", "--steps", "4", "--n-functions", "5", "--half-length", "500"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(column(&rows, "verdict"), ["pass"; 4]);
}

#[test]
fn tau_sweep_converges_to_the_derivative_sum() {
    let o = run(&["sweep", "tau", "--s", "2", "--n-functions", "2", "--half-length", "60", "--taus", "1,1/64,1/4096"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let dev: Vec<f64> = column(&rows, "deviation").iter().map(|s| s.parse().unwrap()).collect();
    let limit: Vec<f64> = column(&rows, "limit").iter().map(|s| s.parse().unwrap()).collect();
    for f in 0..2 {
        assert!(dev[3 * f + 2] < dev[3 * f]);
        assert!(dev[3 * f + 2] <= 1e-5 * limit[3 * f]);
    }
}
