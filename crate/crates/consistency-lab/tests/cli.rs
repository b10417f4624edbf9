//! End-to-end tests of the compiled binary: seed precedence, output
//! formats, determinism across worker counts, and error exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use consistency_lab::experiments::{Scenario, CSV_HEADER};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_consistency-lab"));
    // Keep the ambient environment from leaking a seed into the tests.
    c.env_remove("CONSISTENCY_LAB_SEED");
    c
}

fn small_scenario(with_seed: bool) -> String {
    let seed = if with_seed { "  \"seed\": 11,\n" } else { "" };
    format!(
        "{{\n  \"schema_version\": 1,\n  \"name\": \"schwartz_weak\",\n  \
         \"params\": {{ \"lo\": -2.0, \"hi\": 2.0, \"step\": 0.5, \"threshold\": 1.0 }},\n  \
         \"checkpoints\": [20, 40, 60],\n{seed}  \"replicates\": 4\n}}\n"
    )
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.json");
    fs::write(&path, body).unwrap();
    path
}

fn run_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn run_emits_csv_with_pinned_header_and_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &small_scenario(true));
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    run_ok(&out);

    let csv = fs::read_to_string(out_dir.join("schwartz_weak.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    assert_eq!(lines.count(), 4 * 3, "replicates x checkpoints data rows");

    let summary = fs::read_to_string(out_dir.join("schwartz_weak_summary.txt")).unwrap();
    assert!(summary.starts_with("seed: 11\n"), "summary records the seed");
    assert!(summary.contains("[PASS]") || summary.contains("[FAIL]"));
}

#[test]
fn run_is_deterministic_and_worker_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &small_scenario(true));
    let mut outputs = Vec::new();
    for (sub, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .args(["run", "--scenario"])
            .arg(&scenario)
            .args(["--workers", workers, "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        run_ok(&out);
        outputs.push(fs::read(out_dir.join("schwartz_weak.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "same seed twice: identical bytes");
    assert_eq!(outputs[0], outputs[2], "1 vs 4 workers: identical bytes");
}

#[test]
fn seed_precedence_flag_over_env_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &small_scenario(true));

    // Environment beats the file seed.
    let out_env = dir.path().join("env");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args(["--out"])
        .arg(&out_env)
        .env("CONSISTENCY_LAB_SEED", "99")
        .output()
        .unwrap();
    run_ok(&out);
    let summary = fs::read_to_string(out_env.join("schwartz_weak_summary.txt")).unwrap();
    assert!(summary.starts_with("seed: 99\n"), "env seed wins over file");

    // Flag beats the environment.
    let out_flag = dir.path().join("flag");
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args(["--seed", "123", "--out"])
        .arg(&out_flag)
        .env("CONSISTENCY_LAB_SEED", "99")
        .output()
        .unwrap();
    run_ok(&out);
    let summary = fs::read_to_string(out_flag.join("schwartz_weak_summary.txt")).unwrap();
    assert!(summary.starts_with("seed: 123\n"), "flag seed wins over env");

    // Different seeds change the trace.
    let csv_env = fs::read(out_env.join("schwartz_weak.csv")).unwrap();
    let csv_flag = fs::read(out_flag.join("schwartz_weak.csv")).unwrap();
    assert_ne!(csv_env, csv_flag);
}

#[test]
fn missing_seed_everywhere_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &small_scenario(false));
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("--seed") && stderr.contains("CONSISTENCY_LAB_SEED"),
        "error must name every seed source, got: {stderr}"
    );
}

#[test]
fn invalid_scenario_is_a_hard_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let body = small_scenario(true).replace("\"replicates\": 4", "\"replicates\": 0");
    let scenario = write_scenario(dir.path(), &body);
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replicates"));
}

#[test]
fn divergence_subcommand_prints_value_and_error_bound() {
    let out = bin()
        .args([
            "divergence",
            "--f",
            "normal(mu=0,sigma=1)",
            "--g",
            "normal(mu=1,sigma=1)",
            "--metric",
            "aff",
        ])
        .output()
        .unwrap();
    run_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let expected = (-0.125_f64).exp();
    assert!(
        stdout.contains(&format!("{expected:.10}")),
        "affinity line missing, got: {stdout}"
    );
    assert!(stdout.contains("error: <="));

    let out = bin()
        .args(["divergence", "--f", "stdnormal", "--g", "oops(a=1)", "--metric", "kl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oops"));
}

#[test]
fn cover_subcommand_reports_blocks_and_sieve() {
    let out = bin()
        .args([
            "cover",
            "--grid",
            "grid(lo=-2,hi=2,step=0.1,sigma=1)",
            "--delta",
            "0.5",
            "--prior",
            "powerlaw(p=4)",
            "--beta",
            "0.05",
            "--n",
            "60",
        ])
        .output()
        .unwrap();
    run_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("blocks"), "got: {stdout}");
    assert!(stdout.contains("sqrt-mass sum"));
    assert!(stdout.contains("k_n"));
}

#[test]
fn shipped_scenario_files_all_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut names = Vec::new();
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let text = fs::read_to_string(&path).unwrap();
            let scenario = Scenario::from_json(&text)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            names.push(scenario.kind.name().to_string());
        }
    }
    names.sort();
    assert_eq!(
        names,
        vec![
            "improper_location",
            "kakutani_diagnostic",
            "non_exponential",
            "schwartz_weak",
            "semiparametric_doob",
            "series_regression",
            "walker_l1",
        ],
        "one scenario file per runnable study"
    );
}
