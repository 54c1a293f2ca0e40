use std::path::Path;
use std::process::{Command, Output};

use branching_stable::io::{read_runs, read_tabulated};
use branching_stable_cli::{exit, preset};

fn bstable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bstable"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, edit: impl FnOnce(&mut branching_stable_cli::ExperimentConfig)) -> String {
    let mut c = preset(name).unwrap();
    c.output_dir = dir.join("out");
    edit(&mut c);
    let path = dir.join("config.toml");
    std::fs::write(&path, c.to_toml()).unwrap();
    path.display().to_string()
}

#[test]
fn constants_table_and_rejection() {
    let out = bstable(&["constants", "--alpha", "1", "--beta", "0"]);
    assert_eq!(code(&out), exit::PASS);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("kappa  0.3183098862"), "{text}");
    let out = bstable(&["constants", "--alpha", "0.5", "--beta", "1"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("kappa  0.5641895835"));
    let out = bstable(&["constants", "--alpha", "1", "--beta", "0.5"]);
    assert_eq!(code(&out), exit::INVALID_INPUT);
    let out = bstable(&["constants", "--alpha", "2.5", "--beta", "-0.2"]);
    assert_eq!(code(&out), exit::INVALID_INPUT);
}

#[test]
fn usage_errors_are_invalid_input() {
    assert_eq!(code(&bstable(&["simulate"])), exit::INVALID_INPUT);
    assert_eq!(code(&bstable(&["simulate", "--preset", "unknown"])), exit::INVALID_INPUT);
    assert_eq!(code(&bstable(&["frobnicate"])), exit::INVALID_INPUT);
    assert_eq!(code(&bstable(&["--help"])), exit::PASS);
}

#[test]
fn bad_config_file_is_invalid_input_and_missing_file_is_io() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\n[stable]\nalpha = 1.0\nbeta = 0.5\n[offspring]\nprobs = [1.0]\n").unwrap();
    assert_eq!(code(&bstable(&["simulate", "--config", path.to_str().unwrap()])), exit::INVALID_INPUT);
    let missing = dir.path().join("absent.toml");
    assert_eq!(code(&bstable(&["simulate", "--config", missing.to_str().unwrap()])), exit::IO);
}

#[test]
fn simulate_reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let status = bstable(&[
            "simulate", "--preset", "subcritical", "--replications", "10", "--seed", "7",
            "--threads", threads, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&status), exit::PASS, "{}", String::from_utf8_lossy(&status.stderr));
    }
    for file in ["runs.csv", "simulate_summary.json"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
    let text = std::fs::read_to_string(a.join("runs.csv")).unwrap();
    assert!(text.contains("# config_hash="));
    assert!(text.contains(&format!("# version={}", env!("CARGO_PKG_VERSION"))));
    let (_, runs) = read_runs::<f64>(text.as_bytes()).unwrap();
    assert_eq!(runs.len(), 10);
    let json = std::fs::read_to_string(a.join("simulate_summary.json")).unwrap();
    assert!(json.contains("\"config_hash\""));
}

#[test]
fn root_only_maxima_match_the_single_edge_supremum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bstable(&["simulate", "--preset", "root-only", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&status), exit::PASS);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("simulate_summary.json")).unwrap()).unwrap();
    let p = summary["root_only_ks"]["p_value"].as_f64().unwrap();
    assert!(p > 0.001, "KS p-value {p}");
    assert_eq!(summary["extinct_fraction"].as_f64().unwrap(), 1.0);
}

#[test]
fn solve_writes_monotone_u_and_bounded_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cubic", |c| {
        c.sampling.cloud_size = 20_000;
        c.grid.points = 200;
    });
    let status = bstable(&["solve", "--config", &cfg, "--save-cloud"]);
    assert_eq!(code(&status), exit::PASS, "{}", String::from_utf8_lossy(&status.stderr));
    let out = dir.path().join("out");
    let (meta, u) = read_tabulated::<f64>(std::fs::read_to_string(out.join("u.csv")).unwrap().as_bytes()).unwrap();
    assert_eq!(u.ys()[0], 1.0);
    assert!(u.is_non_increasing_within(1e-14));
    assert!(meta.get("iterations").is_some());
    let gap: f64 = meta.get("sandwich_gap").unwrap().parse().unwrap();
    assert!(gap <= 2e-8);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("solve_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["residual_holds"], serde_json::Value::Bool(true));
    assert!(out.join("phi0.csv").exists() && out.join("cloud.csv").exists());
}

#[test]
fn root_only_solve_is_the_empirical_survival() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "root-only", |c| {
        c.sampling.cloud_size = 5_000;
        c.grid.points = 100;
    });
    assert_eq!(code(&bstable(&["solve", "--config", &cfg, "--save-cloud"])), exit::PASS);
    let out = dir.path().join("out");
    let (_, u) = read_tabulated::<f64>(std::fs::read_to_string(out.join("u.csv")).unwrap().as_bytes()).unwrap();
    let (_, cloud) =
        branching_stable::io::read_cloud::<f64>(std::fs::read_to_string(out.join("cloud.csv")).unwrap().as_bytes())
            .unwrap();
    let emp = branching_stable::empirical_survival(&cloud.s_values(), u.xs()).unwrap();
    assert!(u.sup_distance(&emp) < 1e-12);
}

#[test]
fn non_convergence_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "subcritical", |c| {
        c.sampling.cloud_size = 2_000;
        c.solver.max_iter = 2;
    });
    assert_eq!(code(&bstable(&["solve", "--config", &cfg])), exit::NON_CONVERGENCE);
}

#[test]
fn verify_requires_artifacts_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty");
    let status = bstable(&["verify", "--preset", "subcritical", "--require-artifacts", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&status), exit::IO);
}
