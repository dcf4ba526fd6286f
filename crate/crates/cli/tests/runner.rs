use std::fs;

use nlheat_cli::{preset, run_experiment};

#[test]
fn fixed_point_preset_passes_and_lists_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("nonlinear_fixed_point").unwrap();
    cfg.output.dir = dir.path().join("run").display().to_string();
    let summary = run_experiment(&cfg).unwrap();
    assert!(summary.passed(), "checks: {:?}", summary.checks);
    for path in &summary.files {
        assert!(path.exists(), "manifest file missing: {}", path.display());
    }
    // λ column pinned to 1 at the exact fixed point (ulp-level solver
    // ripple aside)
    let traj = fs::read_to_string(dir.path().join("run/trajectory.csv")).unwrap();
    for line in traj.lines().skip(1) {
        let lambda: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((lambda - 1.0).abs() <= 1e-12, "line: {line}");
    }
}

#[test]
fn identical_configs_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for sub in ["a", "b"] {
        let mut cfg = preset("stability_pair_nonlinear").unwrap();
        cfg.controls.t_end = 0.2;
        cfg.output.dir = dir.path().join(sub).display().to_string();
        let summary = run_experiment(&cfg).unwrap();
        assert!(summary.passed());
        runs.push(cfg.output.dir.clone());
    }
    for name in ["trajectory.csv", "stability.csv", "final_state.snap"] {
        let a = fs::read(format!("{}/{name}", runs[0])).unwrap();
        let b = fs::read(format!("{}/{name}", runs[1])).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn failing_threshold_reports_not_passed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("nonlinear_fixed_point").unwrap();
    cfg.output.dir = dir.path().display().to_string();
    cfg.diagnostics.ledger_tol = 1e-20;
    let summary = run_experiment(&cfg).unwrap();
    assert!(!summary.passed());
    let failed: Vec<_> = summary.checks.iter().filter(|c| !c.passed).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].name, "ledger");
}
