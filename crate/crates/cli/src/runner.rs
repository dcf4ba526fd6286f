//! Execute one experiment config: run the flow, evaluate the enabled
//! diagnostics against their thresholds, and write the output files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use nlheat_core::{
    build_ledger, harnack_report, run_direct, run_picard, snapshot, stability_compare,
    steady_extract, write_harnack_csv, write_ledger_csv, write_stability_csv,
    write_trajectory_csv, Error, FlowSpec, ForcingSpec, HarnackParams, Result, ScalarField,
    Scheme, TemporalProfile, TimeControls, TorusGrid, Trajectory,
};

use crate::config::{
    ExperimentConfig, FlowVariant, ForcingKind, InitialKind, SchemeKind,
};

/// Environment variable that overrides `output.dir`.
pub const OUT_DIR_ENV: &str = "NLHEAT_OUT_DIR";

#[derive(Debug, Clone)]
pub struct DiagnosticOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug)]
pub struct RunSummary {
    pub checks: Vec<DiagnosticOutcome>,
    pub files: Vec<PathBuf>,
    pub wall_seconds: f64,
}

impl RunSummary {
    /// True iff every enabled diagnostic met its threshold.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn build_grid(cfg: &ExperimentConfig) -> Result<Arc<TorusGrid>> {
    match cfg.grid.dim {
        1 => TorusGrid::new_1d(cfg.grid.n, cfg.grid.l),
        2 => TorusGrid::new_2d([cfg.grid.n, cfg.grid.n2], [cfg.grid.l, cfg.grid.l2]),
        d => Err(Error::Config(format!("grid.dim must be 1 or 2, got {d}"))),
    }
}

/// Initial-data profile before renormalization. The 2-D perturbations use
/// the product of the per-axis modes.
pub fn initial_field(
    grid: &Arc<TorusGrid>,
    kind: InitialKind,
    amplitude: f64,
) -> ScalarField {
    let period = grid.period().to_vec();
    match kind {
        InitialKind::Constant => ScalarField::constant(grid, 1.0),
        InitialKind::PerturbedSin => ScalarField::from_fn(grid, |x| {
            let mut m = 1.0;
            for (xi, li) in x.iter().zip(&period) {
                m *= (2.0 * std::f64::consts::PI * xi / li).sin();
            }
            1.0 + amplitude * m
        }),
        InitialKind::PerturbedCos => ScalarField::from_fn(grid, |x| {
            let mut m = 1.0;
            for (xi, li) in x.iter().zip(&period) {
                m *= (2.0 * std::f64::consts::PI * xi / li).cos();
            }
            1.0 + amplitude * m
        }),
    }
}

/// Forcing spatial profile; varies along the first axis only.
pub fn forcing_field(grid: &Arc<TorusGrid>, kind: ForcingKind) -> ScalarField {
    let l0 = grid.period()[0];
    match kind {
        ForcingKind::Zero => ScalarField::zeros(grid),
        ForcingKind::OnePlusCos => ScalarField::from_fn(grid, |x| {
            1.0 + (2.0 * std::f64::consts::PI * x[0] / l0).cos()
        }),
    }
}

/// Assemble the flow problem, optionally overriding the initial amplitude
/// (used for the stability partner trajectory).
pub fn build_flow(cfg: &ExperimentConfig, amplitude: Option<f64>) -> Result<FlowSpec> {
    let grid = build_grid(cfg)?;
    let amp = amplitude.unwrap_or(cfg.initial.amplitude);
    let g = initial_field(&grid, cfg.initial.preset, amp);
    match cfg.flow.variant {
        FlowVariant::Linear => {
            let temporal = if cfg.flow.forcing_decay > 0.0 {
                TemporalProfile::ExpDecay {
                    rate: cfg.flow.forcing_decay,
                }
            } else {
                TemporalProfile::Constant
            };
            let forcing = ForcingSpec::new(forcing_field(&grid, cfg.flow.forcing), temporal)?;
            FlowSpec::linear(g, forcing)
        }
        FlowVariant::Nonlinear => FlowSpec::nonlinear(g, cfg.flow.p),
    }
}

pub fn build_controls(cfg: &ExperimentConfig) -> Result<TimeControls> {
    let c = &cfg.controls;
    let mut controls = match c.scheme {
        SchemeKind::Imex => TimeControls::imex(c.dt, c.t_end),
        SchemeKind::Picard => TimeControls::picard(c.dt, c.t_end, c.delta),
    };
    controls.picard_tol = c.picard_tol;
    controls.picard_max_iter = c.picard_max_iter;
    controls.record_every = c.record_every;
    controls.validate()?;
    Ok(controls)
}

pub fn run_trajectory(spec: &FlowSpec, controls: &TimeControls) -> Result<Trajectory> {
    match controls.scheme {
        Scheme::ImexProjected => run_direct(spec, controls),
        Scheme::Picard => run_picard(spec, controls),
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(&cfg.output.dir),
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    body(&mut file)?;
    file.flush()?;
    Ok(())
}

/// Run the configured experiment, write all artifacts into the output
/// directory, and report per-diagnostic pass/fail. The caller maps
/// `!summary.passed()` (or an error) to a nonzero exit status.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = out_dir(cfg);
    fs::create_dir_all(&dir)?;

    let spec = build_flow(cfg, None)?;
    let controls = build_controls(cfg)?;
    let traj = run_trajectory(&spec, &controls)?;

    let mut checks = Vec::new();
    let mut files = Vec::new();

    // Norm preservation holds for every run regardless of toggles.
    let d = &cfg.diagnostics;
    let mass_err = traj
        .states
        .iter()
        .map(|u| (nlheat_core::l2_norm(u).powi(2) - 1.0).abs())
        .fold(0.0_f64, f64::max);
    checks.push(DiagnosticOutcome {
        name: "mass",
        passed: mass_err <= d.mass_tol,
        measured: mass_err,
        threshold: d.mass_tol,
        detail: format!("max |∫u² - 1| over {} stamps", traj.len()),
    });

    if d.ledger {
        let ledger = build_ledger(&traj, &spec)?;
        let resid = ledger.max_identity_residual();
        checks.push(DiagnosticOutcome {
            name: "ledger",
            passed: resid <= d.ledger_tol,
            measured: resid,
            threshold: d.ledger_tol,
            detail: "max energy-identity residual".to_string(),
        });
        let path = dir.join("ledger.csv");
        write_file(&path, |f| write_ledger_csv(f, &ledger))?;
        files.push(path);
    }

    if d.harnack {
        let params = HarnackParams {
            a: d.harnack_a,
            k: 0.0,
            t_floor: d.harnack_t_floor,
        };
        let report = harnack_report(&traj, &spec, &params)?;
        let min_u = report.min_u.iter().copied().fold(f64::INFINITY, f64::min);
        let passed = min_u > 0.0 && report.global_sup_f.is_finite();
        checks.push(DiagnosticOutcome {
            name: "harnack",
            passed,
            measured: report.global_sup_f,
            threshold: f64::INFINITY,
            detail: format!("sup F over t >= {}; min u = {min_u:e}", d.harnack_t_floor),
        });
        let path = dir.join("harnack.csv");
        write_file(&path, |f| write_harnack_csv(f, &report))?;
        files.push(path);
    }

    if d.steady {
        let report = steady_extract(&traj, &spec, d.steady_tail_tol)?;
        checks.push(DiagnosticOutcome {
            name: "steady",
            passed: report.residual_l2 <= d.steady_tol,
            measured: report.residual_l2,
            threshold: d.steady_tol,
            detail: format!(
                "steady residual; lambda_inf = {:.12e}, tail variation = {:.3e}",
                report.lambda_inf, report.tail_variation
            ),
        });
        let path = dir.join("steady_state.snap");
        snapshot::write_snapshot_file(&path, &report.u_inf)?;
        files.push(path);
    }

    if d.stability {
        let partner_spec = build_flow(cfg, Some(d.stability_amplitude))?;
        let partner = run_trajectory(&partner_spec, &controls)?;
        let report = stability_compare(&traj, &partner)?;
        checks.push(DiagnosticOutcome {
            name: "stability",
            passed: report.bound_holds(),
            measured: report.fitted_c_l2,
            threshold: 0.0,
            detail: format!(
                "fitted C (L2) = {:.6e}, C (H1) = {:.6e}, bound_holds = {}",
                report.fitted_c_l2,
                report.fitted_c_h1,
                report.bound_holds()
            ),
        });
        let path = dir.join("stability.csv");
        write_file(&path, |f| write_stability_csv(f, &report))?;
        files.push(path);
    }

    let traj_path = dir.join("trajectory.csv");
    write_file(&traj_path, |f| write_trajectory_csv(f, &traj, &spec))?;
    files.push(traj_path);

    let snap_path = dir.join("final_state.snap");
    snapshot::write_snapshot_file(&snap_path, traj.final_state())?;
    files.push(snap_path);

    let wall_seconds = start.elapsed().as_secs_f64();
    let summary_path = dir.join("summary.txt");
    {
        let mut f = fs::File::create(&summary_path)?;
        for c in &checks {
            writeln!(
                f,
                "{}: {} (measured {:e}, threshold {:e}) — {}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.measured,
                c.threshold,
                c.detail
            )?;
        }
        writeln!(f, "wall_seconds: {wall_seconds:.3}")?;
        writeln!(f, "files:")?;
        for p in &files {
            writeln!(f, "  {}", p.display())?;
        }
        writeln!(f, "  {}", summary_path.display())?;
        f.flush()?;
    }
    files.push(summary_path);

    Ok(RunSummary {
        checks,
        files,
        wall_seconds,
    })
}
