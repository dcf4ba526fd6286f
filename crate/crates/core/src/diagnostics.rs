//! Checkable identities and estimates over recorded trajectories: the
//! energy ledger, steady-state residuals, exponential stability reports and
//! the Li-Yau Harnack quantity for positive solutions.

use crate::error::{Error, Result};
use crate::flow::{rhs, FlowKind, FlowSpec};
use crate::integrate::Trajectory;
use crate::manifold::{
    grad_sq, inner, integrate, l2_norm, laplacian, max_norm, ScalarField, TorusGrid,
};
use crate::solver::solve_const_shifted;
use std::sync::Arc;

/// Coarsest stamp spacing the ledger accepts.
const MAX_LEDGER_SPACING: f64 = 1e-2 + 1e-12;

/// Per-stamp energy bookkeeping for a recorded run.
///
/// `identity_residual` measures the flow's exact energy identity: for the
/// nonlinear flow
/// `λ(t) + 2∫₀ᵗ∫(uₜ)² = ∫(|∇g|² + 2/(p+1)·g^{p+1}) + (p-1)/(p+1)·∫u^{p+1}(t)`
/// and for the linear flow
/// `∫|∇u|²(t) - ∫|∇g|² + 2∫₀ᵗ∫(uₜ)² = 2∫₀ᵗ∫uₜA`.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub mass: Vec<f64>,
    pub dirichlet: Vec<f64>,
    /// ∫u^{p+1} (nonlinear) or ∫uA (linear).
    pub extra: Vec<f64>,
    /// Running ∫₀ᵗ∫(uₜ)², trapezoid in t with uₜ from the right-hand side.
    pub cum_ut_sq: Vec<f64>,
    pub identity_residual: Vec<f64>,
    /// ∫u·uₜ per stamp; zero up to rounding by construction of λ.
    pub ut_dot_u: Vec<f64>,
    pub min_u: Vec<f64>,
}

impl EnergyLedger {
    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_ortho_drift(&self) -> f64 {
        self.ut_dot_u.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Fill every ledger column from a recorded trajectory.
pub fn build_ledger(traj: &Trajectory, spec: &FlowSpec) -> Result<EnergyLedger> {
    if traj.len() < 2 {
        return Err(Error::Config("ledger needs at least two stamps".into()));
    }
    let max_gap = traj
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    if max_gap > MAX_LEDGER_SPACING {
        return Err(Error::Config(format!(
            "ledger stamp spacing {max_gap} too coarse (need <= 1e-2)"
        )));
    }

    let n = traj.len();
    let g = &traj.states[0];
    let dirichlet_g = integrate(&grad_sq(g));
    // conserved right-hand side of the nonlinear identity at t = 0
    let nonlinear_init = match spec.kind() {
        FlowKind::NonlinearPower { p } => {
            dirichlet_g + 2.0 / (p + 1.0) * integrate(&g.powi_or_f(p + 1.0))
        }
        FlowKind::LinearForced(_) => 0.0,
    };

    let mut ledger = EnergyLedger {
        times: traj.times.clone(),
        lambdas: traj.lambdas.clone(),
        mass: Vec::with_capacity(n),
        dirichlet: Vec::with_capacity(n),
        extra: Vec::with_capacity(n),
        cum_ut_sq: Vec::with_capacity(n),
        identity_residual: Vec::with_capacity(n),
        ut_dot_u: Vec::with_capacity(n),
        min_u: Vec::with_capacity(n),
    };

    let mut cum_ut_sq = 0.0;
    let mut cum_ut_a = 0.0;
    let mut prev_ut_sq = 0.0;
    let mut prev_ut_a = 0.0;

    for (i, (u, &t)) in traj.states.iter().zip(&traj.times).enumerate() {
        let ut = rhs(u, t, spec)?;
        let ut_sq = inner(&ut, &ut);
        let ut_a = match spec.kind() {
            FlowKind::LinearForced(forcing) => inner(&ut, &forcing.at(t)),
            FlowKind::NonlinearPower { .. } => 0.0,
        };
        if i > 0 {
            let dt = traj.times[i] - traj.times[i - 1];
            cum_ut_sq += 0.5 * dt * (prev_ut_sq + ut_sq);
            cum_ut_a += 0.5 * dt * (prev_ut_a + ut_a);
        }
        prev_ut_sq = ut_sq;
        prev_ut_a = ut_a;

        let dirichlet = integrate(&grad_sq(u));
        let extra = spec.extra_integral(u, t);
        let residual = match spec.kind() {
            FlowKind::NonlinearPower { p } => {
                (traj.lambdas[i] + 2.0 * cum_ut_sq
                    - nonlinear_init
                    - (p - 1.0) / (p + 1.0) * extra)
                    .abs()
            }
            FlowKind::LinearForced(_) => {
                (dirichlet - dirichlet_g + 2.0 * cum_ut_sq - 2.0 * cum_ut_a).abs()
            }
        };

        ledger.mass.push(inner(u, u));
        ledger.dirichlet.push(dirichlet);
        ledger.extra.push(extra);
        ledger.cum_ut_sq.push(cum_ut_sq);
        ledger.identity_residual.push(residual);
        ledger.ut_dot_u.push(inner(u, &ut));
        ledger.min_u.push(u.min());
    }
    Ok(ledger)
}

/// Parameters of the Harnack quantity `F = t(|∇w|² - a·wₜ + a·(...))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnackParams {
    /// Must exceed 1.
    pub a: f64,
    /// Ricci lower-bound parameter; identically 0 on flat tori.
    pub k: f64,
    /// Earliest evaluation time; F carries a factor t and is vacuous at 0.
    pub t_floor: f64,
}

impl Default for HarnackParams {
    fn default() -> Self {
        Self {
            a: 2.0,
            k: 0.0,
            t_floor: 0.1,
        }
    }
}

impl HarnackParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0) {
            return Err(Error::InvalidParameter(format!("need a > 1, got {}", self.a)));
        }
        if !(self.k >= 0.0) {
            return Err(Error::InvalidParameter(format!("need K >= 0, got {}", self.k)));
        }
        if !(self.t_floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need t_floor > 0, got {}",
                self.t_floor
            )));
        }
        Ok(())
    }
}

/// Per-stamp record of the Harnack quantity.
#[derive(Debug, Clone)]
pub struct HarnackReport {
    pub times: Vec<f64>,
    pub sup_f: Vec<f64>,
    pub argmax_node: Vec<usize>,
    pub min_u: Vec<f64>,
    /// Sup of `sup_f` over all monitored stamps.
    pub global_sup_f: f64,
}

/// The Harnack field at one recorded stamp.
///
/// `w = log u`; `wₜ` comes from the PDE substitution `wₜ = rhs(u)/u` rather
/// than time differencing. Linear flow:
/// `F = t(|∇w|² - a·wₜ + a(λ + u⁻¹A))`; nonlinear flow:
/// `F = t(|∇w|² - a·wₜ + a(λ - u^{p-1}))`.
pub fn harnack_field(
    traj: &Trajectory,
    stamp_index: usize,
    spec: &FlowSpec,
    params: &HarnackParams,
) -> Result<ScalarField> {
    params.validate()?;
    let t = *traj
        .times
        .get(stamp_index)
        .ok_or_else(|| Error::Domain(format!("stamp {stamp_index} out of range")))?;
    if t < params.t_floor {
        return Err(Error::Domain(format!(
            "t = {t} below t_floor = {}",
            params.t_floor
        )));
    }
    let u = &traj.states[stamp_index];
    if u.min() <= 0.0 {
        return Err(Error::NonPositiveField {
            context: "harnack_field",
            min: u.min(),
        });
    }
    let w = u.map(f64::ln);
    let ut = rhs(u, t, spec)?;
    let wt = ut.zip_map(u, |f, v| f / v);
    let lam = spec.lambda(u, t)?;
    let shift = match spec.kind() {
        FlowKind::LinearForced(forcing) => forcing.at(t).zip_map(u, |a, v| lam + a / v),
        FlowKind::NonlinearPower { p } => u.powi_or_f(p - 1.0).map(|v| lam - v),
    };
    let f = grad_sq(&w).axpy(-params.a, &wt).axpy(params.a, &shift).scale(t);
    f.assert_finite("harnack_field")?;
    Ok(f)
}

/// Evaluate [`harnack_field`] at every stamp with `t >= t_floor`.
pub fn harnack_report(
    traj: &Trajectory,
    spec: &FlowSpec,
    params: &HarnackParams,
) -> Result<HarnackReport> {
    params.validate()?;
    let mut report = HarnackReport {
        times: Vec::new(),
        sup_f: Vec::new(),
        argmax_node: Vec::new(),
        min_u: Vec::new(),
        global_sup_f: f64::NEG_INFINITY,
    };
    for (i, &t) in traj.times.iter().enumerate() {
        if t < params.t_floor {
            continue;
        }
        let f = harnack_field(traj, i, spec, params)?;
        let sup = f.max();
        report.times.push(t);
        report.sup_f.push(sup);
        report.argmax_node.push(f.argmax());
        report.min_u.push(traj.states[i].min());
        if sup > report.global_sup_f {
            report.global_sup_f = sup;
        }
    }
    if report.times.is_empty() {
        return Err(Error::Domain(
            "no recorded stamps at or after t_floor".into(),
        ));
    }
    Ok(report)
}

/// Max-norm residual of the log-substituted equation
/// `(∂ₜ - Δ)w = |∇w|² + (λ + u⁻¹A)` (resp. `+ (λ - u^{p-1})`) with ∂ₜw by
/// centered time difference of log u across adjacent stamps.
pub fn log_identity_residual(
    traj: &Trajectory,
    stamp_index: usize,
    spec: &FlowSpec,
) -> Result<f64> {
    if stamp_index == 0 || stamp_index + 1 >= traj.len() {
        return Err(Error::Domain(format!(
            "stamp {stamp_index} has no neighbors for the centered difference"
        )));
    }
    for idx in [stamp_index - 1, stamp_index, stamp_index + 1] {
        let m = traj.states[idx].min();
        if m <= 0.0 {
            return Err(Error::NonPositiveField {
                context: "log_identity_residual",
                min: m,
            });
        }
    }
    let u = &traj.states[stamp_index];
    let t = traj.times[stamp_index];
    let w = u.map(f64::ln);
    let w_prev = traj.states[stamp_index - 1].map(f64::ln);
    let w_next = traj.states[stamp_index + 1].map(f64::ln);
    let span = traj.times[stamp_index + 1] - traj.times[stamp_index - 1];
    let wt = w_next.sub(&w_prev).scale(1.0 / span);

    let lam = spec.lambda(u, t)?;
    let shift = match spec.kind() {
        FlowKind::LinearForced(forcing) => forcing.at(t).zip_map(u, |a, v| lam + a / v),
        FlowKind::NonlinearPower { p } => u.powi_or_f(p - 1.0).map(|v| lam - v),
    };
    let residual = wt.sub(&laplacian(&w)).sub(&grad_sq(&w)).sub(&shift);
    Ok(max_norm(&residual))
}

/// Extracted steady state with its residual in the limit equation.
#[derive(Debug, Clone)]
pub struct SteadyReport {
    pub u_inf: ScalarField,
    pub lambda_inf: f64,
    /// `‖Δu∞ + λ∞u∞ + A‖₂` (linear) or `‖Δu∞ + λ∞u∞ - u∞ᵖ‖₂` (nonlinear).
    pub residual_l2: f64,
    pub norm_check: f64,
    pub tail_variation: f64,
}

/// Take the final recorded state as the asymptotic limit, after checking
/// that λ has settled: `|λ(t_end) - λ(t_end - 1)| <= tail_tol`.
pub fn steady_extract(traj: &Trajectory, spec: &FlowSpec, tail_tol: f64) -> Result<SteadyReport> {
    if traj.len() < 2 {
        return Err(Error::Config("steady extraction needs at least two stamps".into()));
    }
    let t_end = traj.final_time();
    let ref_idx = traj.closest_stamp((t_end - 1.0).max(0.0));
    let tail_variation = (traj.final_lambda() - traj.lambdas[ref_idx]).abs();
    if tail_variation > tail_tol {
        return Err(Error::TailNotConverged {
            tail_variation,
            tol: tail_tol,
        });
    }
    let u = traj.final_state().clone();
    let lam = traj.final_lambda();
    let residual = match spec.kind() {
        FlowKind::LinearForced(forcing) => laplacian(&u).axpy(lam, &u).add(&forcing.at(t_end)),
        FlowKind::NonlinearPower { p } => {
            laplacian(&u).axpy(lam, &u).sub(&u.powi_or_f(*p))
        }
    };
    Ok(SteadyReport {
        norm_check: (l2_norm(&u) - 1.0).abs(),
        residual_l2: l2_norm(&residual),
        lambda_inf: lam,
        u_inf: u,
        tail_variation,
    })
}

/// Independent construction of the forced linear steady state: solve
/// `Δu + λu + A = 0` with `‖u‖₂ = 1`, `u >= 0` by bisecting λ over
/// `(-∞, 0)`. For each trial the nonsingular system `(-λI - Δ)u = A` is
/// solved directly and `λ ↦ ‖u‖₂` is monotone.
pub fn steady_oracle(a: &ScalarField, grid: &Arc<TorusGrid>) -> Result<(ScalarField, f64)> {
    if a.grid() != grid {
        return Err(Error::GridMismatch("forcing not on the requested grid".into()));
    }
    if a.min() < 0.0 {
        return Err(Error::OracleFailure("forcing must be non-negative".into()));
    }
    let mean_a = integrate(a);
    if mean_a <= 0.0 {
        return Err(Error::OracleFailure(
            "forcing must not be identically zero".into(),
        ));
    }
    let norm_at = |s: f64| -> Result<(ScalarField, f64)> {
        let u = solve_const_shifted(s, 1.0, a)?;
        let n = l2_norm(&u);
        Ok((u, n))
    };

    // bracket a shift s = -λ > 0 with ‖u(s_lo)‖ > 1 > ‖u(s_hi)‖
    let mut s_lo = mean_a;
    let mut s_hi = mean_a;
    for _ in 0..200 {
        if norm_at(s_lo)?.1 > 1.0 {
            break;
        }
        s_lo *= 0.5;
    }
    for _ in 0..200 {
        if norm_at(s_hi)?.1 < 1.0 {
            break;
        }
        s_hi *= 2.0;
    }
    if !(norm_at(s_lo)?.1 > 1.0 && norm_at(s_hi)?.1 < 1.0) {
        return Err(Error::OracleFailure("failed to bracket the multiplier".into()));
    }

    for _ in 0..200 {
        let s = 0.5 * (s_lo + s_hi);
        let (u, n) = norm_at(s)?;
        if (n - 1.0).abs() <= 1e-10 {
            return Ok((u, -s));
        }
        if n > 1.0 {
            s_lo = s;
        } else {
            s_hi = s;
        }
    }
    Err(Error::OracleFailure(
        "bisection did not reach |‖u‖ - 1| <= 1e-10".into(),
    ))
}

/// Paired-run stability report against the Gronwall-form bounds.
/// Gaps are squared norms: `gap_l2 = ‖u - v‖₂²`, `gap_h1 = ‖∇(u-v)‖₂²`.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    pub initial_gap_l2: f64,
    pub initial_gap_h1: f64,
    pub gap_l2: Vec<f64>,
    pub gap_h1: Vec<f64>,
    /// Least-squares slope of `log(gap(t)/gap(0))` vs t.
    pub fitted_c_l2: f64,
    pub fitted_c_h1: f64,
    pub bound_holds_l2: bool,
    pub bound_holds_h1: bool,
}

impl StabilityReport {
    pub fn bound_holds(&self) -> bool {
        self.bound_holds_l2 && self.bound_holds_h1
    }
}

const STABILITY_MARGIN: f64 = 0.5;
const GAP_FLOOR: f64 = 1e-14;

/// Least-squares slope of `log_ratio` against `times` (intercept fitted,
/// not returned).
pub fn fit_slope(times: &[f64], log_ratio: &[f64]) -> f64 {
    // ordinary least squares y = a + C t; returns C
    let n = times.len() as f64;
    let st: f64 = times.iter().sum();
    let sy: f64 = log_ratio.iter().sum();
    let stt: f64 = times.iter().map(|t| t * t).sum();
    let sty: f64 = times.iter().zip(log_ratio).map(|(t, y)| t * y).sum();
    let denom = n * stt - st * st;
    if denom == 0.0 {
        0.0
    } else {
        (n * sty - st * sy) / denom
    }
}

fn gap_analysis(times: &[f64], gaps: &[f64]) -> (f64, bool) {
    let g0 = gaps[0];
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (&t, &g) in times.iter().zip(gaps) {
        if g > GAP_FLOOR {
            ts.push(t);
            ys.push((g / g0).ln());
        }
    }
    let c = if ts.len() >= 2 { fit_slope(&ts, &ys) } else { 0.0 };
    // stamps at the roundoff floor are excluded from the bound check as
    // well as the fit; they carry no information about the growth rate
    let holds = times
        .iter()
        .zip(gaps)
        .filter(|(_, &g)| g > GAP_FLOOR)
        .all(|(&t, &g)| g <= g0 * ((c + STABILITY_MARGIN) * t).exp() * (1.0 + 1e-12));
    (c, holds)
}

/// Compare two trajectories recorded on the same grid and stamps.
pub fn stability_compare(traj_u: &Trajectory, traj_v: &Trajectory) -> Result<StabilityReport> {
    if traj_u.len() != traj_v.len() {
        return Err(Error::StampMismatch(format!(
            "{} vs {} stamps",
            traj_u.len(),
            traj_v.len()
        )));
    }
    for (&a, &b) in traj_u.times.iter().zip(&traj_v.times) {
        if (a - b).abs() > 1e-12 {
            return Err(Error::StampMismatch(format!("stamp {a} vs {b}")));
        }
    }
    traj_u.states[0].same_grid(&traj_v.states[0])?;

    let mut gap_l2 = Vec::with_capacity(traj_u.len());
    let mut gap_h1 = Vec::with_capacity(traj_u.len());
    for (u, v) in traj_u.states.iter().zip(&traj_v.states) {
        let d = u.sub(v);
        gap_l2.push(inner(&d, &d));
        gap_h1.push(integrate(&grad_sq(&d)));
    }
    if gap_l2[0] <= GAP_FLOOR || gap_h1[0] <= GAP_FLOOR {
        return Err(Error::Domain(
            "zero initial gap: stability comparison is degenerate".into(),
        ));
    }
    let (c_l2, holds_l2) = gap_analysis(&traj_u.times, &gap_l2);
    let (c_h1, holds_h1) = gap_analysis(&traj_u.times, &gap_h1);
    Ok(StabilityReport {
        times: traj_u.times.clone(),
        initial_gap_l2: gap_l2[0],
        initial_gap_h1: gap_h1[0],
        gap_l2,
        gap_h1,
        fitted_c_l2: c_l2,
        fitted_c_h1: c_h1,
        bound_holds_l2: holds_l2,
        bound_holds_h1: holds_h1,
    })
}
