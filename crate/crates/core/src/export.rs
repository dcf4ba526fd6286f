//! CSV export of trajectories and diagnostic reports. Full double
//! precision, comma separators, header row, LF line endings; byte-stable
//! for regression diffing.

use std::io::Write;

use crate::diagnostics::{EnergyLedger, HarnackReport, StabilityReport};
use crate::error::Result;
use crate::flow::FlowSpec;
use crate::integrate::Trajectory;
use crate::manifold::{grad_sq, inner, integrate};
use crate::snapshot::fmt_f64;

/// Columns: t, lambda, mass, dirichlet_energy, extra_integral, min_u.
pub fn write_trajectory_csv(w: &mut impl Write, traj: &Trajectory, spec: &FlowSpec) -> Result<()> {
    writeln!(w, "t,lambda,mass,dirichlet_energy,extra_integral,min_u")?;
    for (i, u) in traj.states.iter().enumerate() {
        let t = traj.times[i];
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(t),
            fmt_f64(traj.lambdas[i]),
            fmt_f64(inner(u, u)),
            fmt_f64(integrate(&grad_sq(u))),
            fmt_f64(spec.extra_integral(u, t)),
            fmt_f64(u.min()),
        )?;
    }
    Ok(())
}

pub fn write_ledger_csv(w: &mut impl Write, ledger: &EnergyLedger) -> Result<()> {
    writeln!(
        w,
        "t,lambda,mass,dirichlet,extra,cum_ut_sq,identity_residual,ut_dot_u,min_u"
    )?;
    for i in 0..ledger.times.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(ledger.times[i]),
            fmt_f64(ledger.lambdas[i]),
            fmt_f64(ledger.mass[i]),
            fmt_f64(ledger.dirichlet[i]),
            fmt_f64(ledger.extra[i]),
            fmt_f64(ledger.cum_ut_sq[i]),
            fmt_f64(ledger.identity_residual[i]),
            fmt_f64(ledger.ut_dot_u[i]),
            fmt_f64(ledger.min_u[i]),
        )?;
    }
    Ok(())
}

pub fn write_harnack_csv(w: &mut impl Write, report: &HarnackReport) -> Result<()> {
    writeln!(w, "t,sup_f,argmax_node,min_u")?;
    for i in 0..report.times.len() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(report.times[i]),
            fmt_f64(report.sup_f[i]),
            report.argmax_node[i],
            fmt_f64(report.min_u[i]),
        )?;
    }
    writeln!(w, "# global_sup_f,{}", fmt_f64(report.global_sup_f))?;
    Ok(())
}

pub fn write_stability_csv(w: &mut impl Write, report: &StabilityReport) -> Result<()> {
    writeln!(w, "t,gap_l2,gap_h1")?;
    for i in 0..report.times.len() {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(report.times[i]),
            fmt_f64(report.gap_l2[i]),
            fmt_f64(report.gap_h1[i]),
        )?;
    }
    writeln!(
        w,
        "# fitted_C_l2,{},fitted_C_h1,{},bound_holds_l2,{},bound_holds_h1,{}",
        fmt_f64(report.fitted_c_l2),
        fmt_f64(report.fitted_c_h1),
        report.bound_holds_l2,
        report.bound_holds_h1,
    )?;
    Ok(())
}
