//! Time evolution: the direct semi-implicit projected stepper and the
//! successive-linearization (Picard) scheme with window-by-window extension.

use crate::error::{Error, Result};
use crate::flow::{renormalize, FlowKind, FlowSpec};
use crate::manifold::{l2_norm, ScalarField};
use crate::solver::solve_shifted;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Semi-implicit step with frozen multiplier, followed by exact
    /// projection back onto the unit sphere.
    ImexProjected,
    /// Successive linearization over windows of length `picard_window`,
    /// sub-problems left unprojected.
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeControls {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub picard_window: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub record_every: usize,
}

impl TimeControls {
    pub fn imex(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            scheme: Scheme::ImexProjected,
            picard_window: 0.05,
            picard_tol: 1e-8,
            picard_max_iter: 50,
            record_every: 1,
        }
    }

    pub fn picard(dt: f64, t_end: f64, window: f64) -> Self {
        Self {
            dt,
            t_end,
            scheme: Scheme::Picard,
            picard_window: window,
            picard_tol: 1e-8,
            picard_max_iter: 50,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::Config(format!(
                "dt and t_end must be positive (dt = {}, t_end = {})",
                self.dt, self.t_end
            )));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Config("picard_tol must be positive".into()));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::Config("picard_max_iter must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        if self.scheme == Scheme::Picard
            && !(self.dt < self.picard_window && self.picard_window <= self.t_end)
        {
            return Err(Error::Config(format!(
                "need dt < picard_window <= t_end (dt = {}, window = {}, t_end = {})",
                self.dt, self.picard_window, self.t_end
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// Per-window Picard convergence record.
#[derive(Debug, Clone, Default)]
pub struct PicardStats {
    pub window_iterations: Vec<usize>,
    /// Successive-iterate sup-over-time L2 distances, one list per window.
    pub window_distances: Vec<Vec<f64>>,
}

/// Recorded run: time stamps, states and multiplier values.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ScalarField>,
    pub lambdas: Vec<f64>,
    /// Largest per-step |‖u*‖ - 1| observed before projection
    /// (ImexProjected only; 0 for Picard runs).
    pub max_projection_drift: f64,
    pub picard: Option<PicardStats>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &ScalarField {
        self.states.last().expect("empty trajectory")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }

    pub fn final_lambda(&self) -> f64 {
        *self.lambdas.last().expect("empty trajectory")
    }

    /// Index of the recorded stamp closest to t.
    pub fn closest_stamp(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

/// One semi-implicit projected step: solve
/// `(I - dt·Δ) u* = u + dt·(λ(t)·u + S(u,t))` with λ frozen at the step
/// start and S the forcing (linear flow) or `-uᵖ` (nonlinear flow), then
/// project back to unit norm.
pub fn imex_step(u: &ScalarField, t: f64, dt: f64, spec: &FlowSpec) -> Result<ScalarField> {
    let star = imex_step_raw(u, t, dt, spec)?;
    renormalize(&star)
}

/// The unprojected step; exposed so drift diagnostics can see `u*`.
pub fn imex_step_raw(u: &ScalarField, t: f64, dt: f64, spec: &FlowSpec) -> Result<ScalarField> {
    let lam = spec.lambda(u, t)?;
    let b = match spec.kind() {
        FlowKind::LinearForced(forcing) => u.scale(1.0 + dt * lam).axpy(dt, &forcing.at(t)),
        FlowKind::NonlinearPower { p } => {
            u.scale(1.0 + dt * lam).axpy(-dt, &u.powi_or_f(*p))
        }
    };
    let ones = ScalarField::constant(u.grid(), 1.0);
    let star = solve_shifted(&ones, dt, &b)?;
    star.assert_finite("imex step")?;
    if matches!(spec.kind(), FlowKind::NonlinearPower { .. }) && star.min() <= 0.0 {
        return Err(Error::PositivityLoss {
            t: t + dt,
            min: star.min(),
        });
    }
    Ok(star)
}

/// Iterate [`imex_step`] from the initial data to `t_end`, recording every
/// `record_every` steps (plus the initial and final states).
pub fn run_direct(spec: &FlowSpec, controls: &TimeControls) -> Result<Trajectory> {
    controls.validate()?;
    if controls.scheme != Scheme::ImexProjected {
        return Err(Error::Config("run_direct requires the ImexProjected scheme".into()));
    }
    let dt = controls.dt;
    let n_steps = controls.n_steps();
    let mut u = spec.initial().clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u.clone()],
        lambdas: vec![spec.lambda(&u, 0.0)?],
        max_projection_drift: 0.0,
        picard: None,
    };
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let star = imex_step_raw(&u, t, dt, spec).map_err(|e| Error::StepFailed {
            step,
            source: Box::new(e),
        })?;
        let drift = (l2_norm(&star) - 1.0).abs();
        if drift > traj.max_projection_drift {
            traj.max_projection_drift = drift;
        }
        u = renormalize(&star).map_err(|e| Error::StepFailed {
            step,
            source: Box::new(e),
        })?;
        if (step + 1).is_multiple_of(controls.record_every) || step + 1 == n_steps {
            let t_next = (step + 1) as f64 * dt;
            traj.times.push(t_next);
            traj.lambdas.push(spec.lambda(&u, t_next).map_err(|e| Error::StepFailed {
                step,
                source: Box::new(e),
            })?);
            traj.states.push(u.clone());
        }
    }
    Ok(traj)
}

/// The successive-linearization iteration on a single window `[t0, t0+δ]`.
///
/// The zeroth iterate is the constant-in-time extension of `g_window`.
/// Each sweep evaluates λ from the previous iterate at every time node and
/// solves the resulting linear parabolic problem forward in time without
/// renormalization. For the nonlinear flow the power term is lagged as
/// `u⁽ᵏ⁺¹⁾·(u⁽ᵏ⁾)^{p-1}` so each sub-problem stays linear; the fixed point
/// is unchanged.
pub fn picard_solve_window(
    g_window: &ScalarField,
    t0: f64,
    spec: &FlowSpec,
    controls: &TimeControls,
) -> Result<(Trajectory, usize)> {
    controls.validate()?;
    if controls.scheme != Scheme::Picard {
        return Err(Error::Config("picard_solve_window requires the Picard scheme".into()));
    }
    if (l2_norm(g_window) - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "Picard window initial data must have unit norm (got {})",
            l2_norm(g_window)
        )));
    }
    let dt = controls.dt;
    let window = controls.picard_window.min((controls.t_end - t0).max(dt));
    let m = ((window / dt).round() as usize).max(1);
    let times: Vec<f64> = (0..=m).map(|j| t0 + j as f64 * dt).collect();

    let mut prev: Vec<ScalarField> = vec![g_window.clone(); m + 1];
    let mut distances: Vec<f64> = Vec::new();
    let ones = ScalarField::constant(g_window.grid(), 1.0);

    for iter in 1..=controls.picard_max_iter {
        // multiplier trace of the previous iterate
        let mut lam_prev = Vec::with_capacity(m + 1);
        for (j, t) in times.iter().enumerate() {
            lam_prev.push(spec.lambda(&prev[j], *t)?);
        }

        let mut next: Vec<ScalarField> = Vec::with_capacity(m + 1);
        next.push(g_window.clone());
        for j in 0..m {
            let t = times[j];
            let cur = &next[j];
            let v = match spec.kind() {
                FlowKind::LinearForced(forcing) => {
                    let b = cur.scale(1.0 + dt * lam_prev[j]).axpy(dt, &forcing.at(t));
                    solve_shifted(&ones, dt, &b)?
                }
                FlowKind::NonlinearPower { p } => {
                    let lag = &prev[j + 1];
                    if lag.min() <= 0.0 {
                        return Err(Error::PositivityLoss {
                            t: times[j + 1],
                            min: lag.min(),
                        });
                    }
                    let diag = lag.powi_or_f(p - 1.0).scale(dt).map(|v| 1.0 + v);
                    let b = cur.scale(1.0 + dt * lam_prev[j]);
                    solve_shifted(&diag, dt, &b)?
                }
            };
            v.assert_finite("picard sweep")?;
            if matches!(spec.kind(), FlowKind::NonlinearPower { .. }) && v.min() <= 0.0 {
                return Err(Error::PositivityLoss {
                    t: times[j + 1],
                    min: v.min(),
                });
            }
            next.push(v);
        }

        let dist = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| l2_norm(&a.sub(b)))
            .fold(0.0f64, f64::max);
        distances.push(dist);
        prev = next;

        if dist <= controls.picard_tol {
            let mut lambdas = Vec::with_capacity(m + 1);
            for (j, t) in times.iter().enumerate() {
                lambdas.push(spec.lambda(&prev[j], *t)?);
            }
            let traj = Trajectory {
                times,
                states: prev,
                lambdas,
                max_projection_drift: 0.0,
                picard: Some(PicardStats {
                    window_iterations: vec![iter],
                    window_distances: vec![distances],
                }),
            };
            return Ok((traj, iter));
        }
    }

    let k = distances.len();
    let contraction = if k >= 2 && distances[k - 2] > 0.0 {
        distances[k - 1] / distances[k - 2]
    } else {
        f64::NAN
    };
    Err(Error::PicardNonConvergence {
        iterations: controls.picard_max_iter,
        last_distance: distances[k - 1],
        contraction,
    })
}

/// Chain [`picard_solve_window`] over consecutive windows to `t_end`,
/// restarting each window from the renormalized terminal state of the
/// previous one.
pub fn run_picard(spec: &FlowSpec, controls: &TimeControls) -> Result<Trajectory> {
    controls.validate()?;
    if controls.scheme != Scheme::Picard {
        return Err(Error::Config("run_picard requires the Picard scheme".into()));
    }
    let dt = controls.dt;
    let n_windows = (controls.t_end / controls.picard_window).ceil() as usize;

    let mut g = spec.initial().clone();
    let mut stats = PicardStats::default();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![g.clone()],
        lambdas: vec![spec.lambda(&g, 0.0)?],
        max_projection_drift: 0.0,
        picard: None,
    };
    let mut global_step = 0usize;

    for window in 0..n_windows {
        let t0 = window as f64 * controls.picard_window;
        let (wtraj, iters) =
            picard_solve_window(&g, t0, spec, controls).map_err(|e| Error::WindowFailed {
                window,
                source: Box::new(e),
            })?;
        let wstats = wtraj.picard.as_ref().expect("window carries its stats");
        stats.window_iterations.push(iters);
        stats
            .window_distances
            .push(wstats.window_distances[0].clone());

        let m = wtraj.times.len() - 1;
        for j in 1..=m {
            global_step += 1;
            let last_overall = window + 1 == n_windows && j == m;
            if global_step.is_multiple_of(controls.record_every) || last_overall {
                // Window interiors evolve unprojected; the reported
                // trajectory carries the unit-norm representative.
                let t = t0 + j as f64 * dt;
                let u = renormalize(&wtraj.states[j])?;
                traj.lambdas.push(spec.lambda(&u, t)?);
                traj.times.push(t);
                traj.states.push(u);
            }
        }
        g = renormalize(wtraj.final_state()).map_err(|e| Error::WindowFailed {
            window,
            source: Box::new(e),
        })?;
    }
    traj.picard = Some(stats);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{ForcingSpec, TemporalProfile};
    use crate::manifold::{max_norm, TorusGrid};
    use std::f64::consts::PI;

    fn perturbed(n: usize, amp: f64) -> ScalarField {
        let grid = TorusGrid::unit_1d(n).unwrap();
        let raw = ScalarField::from_fn(&grid, |x| 1.0 + amp * (2.0 * PI * x[0]).sin());
        renormalize(&raw).unwrap()
    }

    #[test]
    fn constant_fixed_points_survive_stepping() {
        let grid = TorusGrid::unit_1d(64).unwrap();
        let one = ScalarField::constant(&grid, 1.0);

        let nl = FlowSpec::nonlinear(one.clone(), 3.0).unwrap();
        let next = imex_step(&one, 0.0, 0.01, &nl).unwrap();
        assert!(max_norm(&next.sub(&one)) < 1e-14);

        let lin = FlowSpec::linear(one.clone(), ForcingSpec::zero(&grid)).unwrap();
        let next = imex_step(&one, 0.0, 0.01, &lin).unwrap();
        assert!(max_norm(&next.sub(&one)) < 1e-14);
    }

    #[test]
    fn imex_step_matches_tiny_step_explicit_euler() {
        // one dt = 1e-4 step vs explicit Euler at dt = 1e-7, both renormalized
        let g = perturbed(64, 0.1);
        let grid = g.grid().clone();
        let spec = FlowSpec::linear(g.clone(), ForcingSpec::zero(&grid)).unwrap();
        let dt = 1e-4;

        let ours = imex_step(&g, 0.0, dt, &spec).unwrap();

        let dt_oracle = 1e-7;
        let substeps = (dt / dt_oracle).round() as usize;
        let mut u = g.clone();
        for s in 0..substeps {
            let t = s as f64 * dt_oracle;
            let f = crate::flow::rhs(&u, t, &spec).unwrap();
            u = u.axpy(dt_oracle, &f);
        }
        let oracle = renormalize(&u).unwrap();
        assert!(
            max_norm(&ours.sub(&oracle)) < 1e-6,
            "gap {}",
            max_norm(&ours.sub(&oracle))
        );
    }

    #[test]
    fn run_direct_constant_nonlinear() {
        let grid = TorusGrid::unit_1d(64).unwrap();
        let one = ScalarField::constant(&grid, 1.0);
        let spec = FlowSpec::nonlinear(one.clone(), 3.0).unwrap();
        let controls = TimeControls {
            record_every: 100,
            ..TimeControls::imex(1e-3, 1.0)
        };
        let traj = run_direct(&spec, &controls).unwrap();
        for (u, &lam) in traj.states.iter().zip(&traj.lambdas) {
            assert!(max_norm(&u.sub(&one)) < 1e-13);
            assert!((lam - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn run_direct_free_linear_reaches_ground_state() {
        let g = perturbed(128, 0.1);
        let grid = g.grid().clone();
        let spec = FlowSpec::linear(g, ForcingSpec::zero(&grid)).unwrap();
        let controls = TimeControls {
            record_every: 100,
            ..TimeControls::imex(1e-3, 2.0)
        };
        let traj = run_direct(&spec, &controls).unwrap();
        let one = ScalarField::constant(&grid, 1.0);
        assert!(max_norm(&traj.final_state().sub(&one)) < 1e-4);
        assert!(traj.final_lambda() <= 1e-6);
        // norm preservation on every recorded state
        for u in &traj.states {
            assert!((l2_norm(u) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn pre_projection_drift_is_second_order() {
        let g = perturbed(64, 0.1);
        let grid = g.grid().clone();
        let spec = FlowSpec::linear(g, ForcingSpec::zero(&grid)).unwrap();
        let drift = |dt: f64| {
            let controls = TimeControls {
                record_every: usize::MAX,
                ..TimeControls::imex(dt, 0.1)
            };
            run_direct(&spec, &controls).unwrap().max_projection_drift
        };
        let ratio = drift(1e-3) / drift(5e-4);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn linear_flow_preserves_nonnegativity() {
        let grid = TorusGrid::unit_1d(64).unwrap();
        // nonnegative bump with a flat zero region
        let raw = ScalarField::from_fn(&grid, |x| {
            (0.25 - (x[0] - 0.5).abs()).max(0.0)
        });
        let a = ScalarField::from_fn(&grid, |x| 1.0 + (2.0 * PI * x[0]).cos());
        let spec = FlowSpec::linear(
            raw,
            ForcingSpec::new(a, TemporalProfile::Constant).unwrap(),
        )
        .unwrap();
        let controls = TimeControls {
            record_every: 50,
            ..TimeControls::imex(1e-3, 0.5)
        };
        let traj = run_direct(&spec, &controls).unwrap();
        for u in &traj.states {
            assert!(u.min() >= -1e-12, "min {}", u.min());
        }
    }

    #[test]
    fn picard_constant_converges_in_one_iteration() {
        let grid = TorusGrid::unit_1d(64).unwrap();
        let one = ScalarField::constant(&grid, 1.0);
        let spec = FlowSpec::nonlinear(one.clone(), 3.0).unwrap();
        let controls = TimeControls::picard(1e-3, 0.1, 0.1);
        let (traj, iters) = picard_solve_window(&one, 0.0, &spec, &controls).unwrap();
        assert_eq!(iters, 1);
        for u in &traj.states {
            assert!(max_norm(&u.sub(&one)) < 1e-13);
        }
    }

    #[test]
    fn picard_window_matches_direct_run() {
        let g = perturbed(64, 0.1);
        let grid = g.grid().clone();
        let spec = FlowSpec::linear(g.clone(), ForcingSpec::zero(&grid)).unwrap();
        let pc = TimeControls::picard(1e-4, 0.05, 0.05);
        let (ptraj, _) = picard_solve_window(&g, 0.0, &spec, &pc).unwrap();

        let dc = TimeControls::imex(1e-4, 0.05);
        let dtraj = run_direct(&spec, &dc).unwrap();

        assert_eq!(ptraj.times.len(), dtraj.times.len());
        for (pu, du) in ptraj.states.iter().zip(&dtraj.states) {
            let pn = renormalize(pu).unwrap();
            assert!(l2_norm(&pn.sub(du)) < 1e-6);
        }
    }

    #[test]
    fn picard_max_iter_exceeded_errors() {
        let g = perturbed(64, 0.1);
        let grid = g.grid().clone();
        let spec = FlowSpec::linear(g.clone(), ForcingSpec::zero(&grid)).unwrap();
        let controls = TimeControls {
            picard_tol: 1e-15,
            picard_max_iter: 1,
            ..TimeControls::picard(1e-3, 0.05, 0.05)
        };
        assert!(matches!(
            picard_solve_window(&g, 0.0, &spec, &controls),
            Err(Error::PicardNonConvergence { .. })
        ));
    }

    #[test]
    fn run_picard_window_count_and_agreement() {
        let g = perturbed(64, 0.1);
        let grid = g.grid().clone();
        let spec = FlowSpec::linear(g, ForcingSpec::zero(&grid)).unwrap();
        let pc = TimeControls::picard(1e-3, 0.2, 0.05);
        let ptraj = run_picard(&spec, &pc).unwrap();
        let stats = ptraj.picard.as_ref().unwrap();
        assert_eq!(stats.window_iterations.len(), 4); // ceil(t_end / δ)

        let dtraj = run_direct(&spec, &TimeControls::imex(1e-3, 0.2)).unwrap();
        let pu = renormalize(ptraj.final_state()).unwrap();
        assert!(l2_norm(&pu.sub(dtraj.final_state())) < 1e-5);
    }

    #[test]
    fn run_picard_constant_over_two_windows() {
        let grid = TorusGrid::unit_1d(64).unwrap();
        let one = ScalarField::constant(&grid, 1.0);
        let spec = FlowSpec::nonlinear(one.clone(), 3.0).unwrap();
        let controls = TimeControls::picard(1e-3, 0.2, 0.1);
        let traj = run_picard(&spec, &controls).unwrap();
        assert_eq!(traj.picard.as_ref().unwrap().window_iterations.len(), 2);
        for u in &traj.states {
            assert!(max_norm(&u.sub(&one)) < 1e-12);
        }
    }

    #[test]
    fn controls_validation() {
        assert!(TimeControls::imex(0.0, 1.0).validate().is_err());
        assert!(TimeControls::picard(0.1, 1.0, 0.05).validate().is_err());
        let mut c = TimeControls::imex(1e-3, 1.0);
        c.record_every = 0;
        assert!(c.validate().is_err());
    }
}
