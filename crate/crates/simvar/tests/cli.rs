use std::path::Path;
use std::process::{Command, Output};

use simvar::csv_io::Table;
use simvar_core::model::PhasePoint;
use simvar_core::simpson::StepConfig;
use simvar_core::systems::preset;

fn simvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simvar")).args(args).output().unwrap()
}

fn simulate(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["simulate", "--output", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    simvar(&all)
}

fn data_rows(path: &Path) -> usize {
    Table::read(path).unwrap().rows.len()
}

#[test]
fn top_period_fraction_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(
        dir.path(),
        &["--preset", "lagrange-top-table3", "--integrator", "simpson", "--h-frac", "0.05", "--periods", "1"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&dir.path().join("trajectory.csv")), 21);
    let t = Table::read(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(t.header, ["t", "q1", "q2", "q3", "p1", "p2", "p3", "H", "p_phi", "p_psi"]);
    for stem in ["energy_error", "momentum_error", "nutation", "tip_path"] {
        assert_eq!(data_rows(&dir.path().join(format!("{stem}.csv"))), 21, "{stem}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["steps"], 20);
}

#[test]
fn pendulum_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), &["--preset", "double-pendulum-table1", "--h", "0.1", "--t-end", "10"]);
    assert!(out.status.success());
    assert_eq!(data_rows(&dir.path().join("trajectory.csv")), 101);
    assert!(!dir.path().join("nutation.csv").exists());
}

#[test]
fn invalid_preset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), &["--preset", "pendulum", "--h", "0.1", "--t-end", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    for name in simvar_core::systems::PRESET_NAMES {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn malformed_flags_are_usage_errors() {
    assert_eq!(simvar(&["simulate", "--h", "abc"]).status.code(), Some(2));
    assert_eq!(simvar(&["simulate", "--h", "0.1", "--h-frac", "0.1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), &["--preset", "double-pendulum-table1", "--h-frac", "0.1", "--t-end", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn newton_failure_leaves_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(
        dir.path(),
        &["--preset", "double-pendulum-table1", "--h", "0.1", "--t-end", "1", "--max-iterations", "1", "--fd-fallback", "false"],
    );
    assert_eq!(out.status.code(), Some(1));
    let partial = dir.path().join("trajectory.csv.partial");
    assert!(partial.exists());
    assert!(!dir.path().join("trajectory.csv").exists());
    assert!(data_rows(&partial) >= 1);
}

#[test]
fn outputs_are_byte_identical() {
    let args = ["--preset", "lagrange-top-table4", "--h", "0.05", "--t-end", "1"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(simulate(a.path(), &args).status.success());
    assert!(simulate(b.path(), &args).status.success());
    for f in ["trajectory.csv", "energy_error.csv", "momentum_error.csv", "nutation.csv", "tip_path.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    for d in [&a, &b] {
        let out = simvar(&[
            "converge", "--preset", "double-pendulum-table1", "--h", "0.1", "--t-end", "1", "--halvings", "2",
            "--output", d.path().to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let f = "convergence-simpson-energy.csv";
    assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
}

#[test]
fn trajectory_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--preset", "lagrange-top-table3", "--h-frac", "0.05", "--periods", "1"];
    assert!(simulate(dir.path(), &args).status.success());
    let t = Table::read(&dir.path().join("trajectory.csv")).unwrap();

    let p = preset("lagrange-top-table3").unwrap();
    let period = simvar::config::preset_period(&p).unwrap().unwrap();
    let traj = simvar_core::simpson::integrate(
        &p.system,
        &p.initial_point().unwrap(),
        0.05 * period,
        period,
        &StepConfig::default(),
    )
    .unwrap();
    assert_eq!(t.rows.len(), traj.points.len());
    for (row, pt) in t.rows.iter().zip(&traj.points) {
        let back = PhasePoint::new(row[0], row[1..4].to_vec(), row[4..7].to_vec());
        assert_eq!(back.t.to_bits(), pt.t.to_bits());
        for (a, b) in back.q.iter().chain(&back.p).zip(pt.q.iter().chain(&pt.p)) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "preset = \"double-pendulum-table1\"\nh = 0.1\nt-end = 10.0\nintegrator = \"midpoint\"\n").unwrap();
    let out = simvar(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--t-end", "2", "--output", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&dir.path().join("trajectory.csv")), 21);
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"midpoint\""));

    std::fs::write(&cfg, "preset = \"double-pendulum-table1\"\nstep = 0.1\n").unwrap();
    let out = simvar(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_nutation_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = simvar(&[
        "converge", "--preset", "lagrange-top-table3", "--metric", "nutation", "--h-frac", "0.05", "--periods", "1",
        "--output", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = Table::read(&dir.path().join("convergence-simpson-nutation.csv")).unwrap();
    assert_eq!(t.rows.len(), 5);
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("convergence-simpson-nutation.json")).unwrap(),
    )
    .unwrap();
    let slope = json["slope"].as_f64().unwrap();
    assert!((slope - 4.0).abs() <= 0.5, "{slope}");
}

#[test]
fn exact_reference_rejected_for_pendulum() {
    let out = simvar(&[
        "converge", "--preset", "double-pendulum-table1", "--h", "0.1", "--t-end", "1", "--reference", "exact",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_reduced_zero_halvings() {
    let dir = tempfile::tempdir().unwrap();
    let out = simvar(&["compare-reduced", "--halvings", "0", "--output", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = Table::read(&dir.path().join("compare-reduced.csv")).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert!(t.rows[0][2].is_nan());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("compare-reduced.json")).unwrap()).unwrap();
    assert!(json["orders"].as_array().unwrap().is_empty());
    assert!(json["slope"].is_null());
}

#[test]
fn compare_reduced_rejects_other_presets() {
    let out = simvar(&["compare-reduced", "--preset", "lagrange-top-table3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_reduced_through_a_cusp() {
    // the cusp motion reaches its first cusp at t = 0 and again each period
    let dir = tempfile::tempdir().unwrap();
    let out = simvar(&[
        "compare-reduced", "--t-end", "2", "--h", "0.02", "--halvings", "1", "--output", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validate_all_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = simvar(&["validate", "--output", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    for name in simvar_core::systems::PRESET_NAMES {
        assert!(dir.path().join(format!("validate-{name}.json")).exists());
    }
}

#[test]
fn presets_lists_every_name() {
    let out = simvar(&["presets"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), simvar_core::systems::PRESET_NAMES);
}
