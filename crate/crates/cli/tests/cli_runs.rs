use std::path::Path;
use std::process::{Command, Output};

use phdae_cli::output::parse_trajectory_csv;
use serde_json::Value;

fn phdae(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phdae"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("column {name}"))
}

#[test]
fn default_run_writes_one_row_per_step_and_a_consistent_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = phdae(&["run", "--set", "t_end=2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let (header, rows) = parse_trajectory_csv(&csv).unwrap();
    assert_eq!(rows.len(), 200);
    assert_eq!(header.len(), 1 + 26 + 5 + 2 + 1);
    assert_eq!(header.last().unwrap(), "newton_iters");

    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let max_of = |c: &str, abs: bool| {
        let i = column(&header, c);
        rows.iter().map(|r| if abs { r[i].abs() } else { r[i] }).fold(f64::NEG_INFINITY, f64::max)
    };
    assert_eq!(summary["steps_completed"], 200);
    assert_eq!(summary["max_abs_balance_residual"].as_f64().unwrap(), max_of("balance_residual", true));
    assert_eq!(summary["max_dh"].as_f64().unwrap(), max_of("dH", false));
    assert_eq!(summary["max_g_pos"].as_f64().unwrap(), max_of("g_pos_norm", false));
    assert_eq!(summary["max_g_vel"].as_f64().unwrap(), max_of("g_vel_norm", false));
    let last_h = rows.last().unwrap()[column(&header, "H")];
    assert_eq!(summary["h_final"].as_f64().unwrap(), last_h);
    assert!(summary["energy_consistent"].as_bool().unwrap());

    let echo = std::fs::read_to_string(dir.path().join("config.echo")).unwrap();
    assert!(echo.contains("t_end = 2"));
}

#[test]
fn runs_are_bytewise_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["run", "--set", "model.name=synchronous_machine", "--set", "scheme=dgp", "--set", "input.signal=sine", "--set", "input.values=[1.0, 0.5, 0.0, 0.2, 0.1]", "--set", "t_end=1"];
    assert_eq!(phdae(&args, a.path()).status.code(), Some(0));
    assert_eq!(phdae(&args, b.path()).status.code(), Some(0));
    for f in ["trajectory.csv", "summary.json", "config.echo"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn single_ddr_step_of_the_linear_example() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--set", "model.name=linear_index1", "--set", "scheme=ddr", "--set", "h=0.1", "--set", "t_end=0.1"];
    assert_eq!(phdae(&args, dir.path()).status.code(), Some(0));
    let (header, rows) = parse_trajectory_csv(&std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0][column(&header, "x0")] - 19.0 / 21.0).abs() < 1e-15);
    assert!((rows[0][column(&header, "t")] - 0.1).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(phdae(&["run", "--set", "h=-1"], dir.path()).status.code(), Some(2));
    assert_eq!(phdae(&["run", "--set", "h=0.03"], dir.path()).status.code(), Some(2));
    assert_eq!(phdae(&["run", "--set", "model.name=nope"], dir.path()).status.code(), Some(2));
    assert_eq!(phdae(&["run", "--set", "model.params.k13=-5"], dir.path()).status.code(), Some(2));
    assert_eq!(phdae(&["run", "--set", "model.name=mass_spring_singular", "--set", "scheme=sedg"], dir.path()).status.code(), Some(2));

    // Newton failure: partial results are still written.
    let out = phdae(&["run", "--set", "h=1.25"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], false);
    assert!(summary["failure"].as_str().unwrap().contains("Newton"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "scheme = \"midpoint\"\nh = 0.05\nt_end = 0.5\n[model]\nname = \"mass_spring_singular\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = phdae(&["run", "--config", cfg.to_str().unwrap(), "--set", "t_end=0.25"], &out_dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = parse_trajectory_csv(&std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(phdae(&["run", "--config", cfg.to_str().unwrap()], &out_dir).status.code(), Some(2));
}

#[test]
fn validate_and_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = phdae(&["validate", "--set", "model.name=synchronous_machine"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("validation.json")).unwrap()).unwrap();
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["checks"].as_array().unwrap().len(), 5);

    let list = Command::new(env!("CARGO_BIN_EXE_phdae")).arg("list-models").output().unwrap();
    let text = String::from_utf8(list.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn robustness_study_output_is_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let out = phdae(
        &["robust", "--set", "robustness.h_list=[0.5, 0.25]", "--set", "robustness.schemes=[\"midpoint\", \"sedg\"]", "--set", "t_end=1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("robustness.csv")).unwrap();
    let keys: Vec<String> = csv.lines().skip(1).map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(keys, ["sedg,2.5000000000000000e-1", "sedg,5.0000000000000000e-1", "midpoint,2.5000000000000000e-1", "midpoint,5.0000000000000000e-1"]);
}
