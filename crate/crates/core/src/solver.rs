//! Linear solves for the semi-implicit steppers: systems of the form
//! `(diag(d) - c·Δ) x = b` with d > 0 nodewise and c > 0.
//!
//! 1-D uses a direct periodic tridiagonal solve (Thomas plus a
//! Sherman-Morrison rank-one correction for the wrap entries); 2-D uses
//! conjugate gradient on the symmetric positive definite operator. Either
//! way the returned solution is checked against the contract residual.

use crate::error::{Error, Result};
use crate::manifold::{laplacian, ScalarField};

/// Relative residual every solve must meet.
pub const SOLVE_TOL: f64 = 1e-10;

const CG_TOL: f64 = 1e-12;

/// Solve `(diag(d) - c·Δ) x = b`. `d` must be nodewise >= some positive
/// floor (the steppers pass 1 + non-negative terms) and `c > 0`.
pub fn solve_shifted(d: &ScalarField, c: f64, b: &ScalarField) -> Result<ScalarField> {
    d.same_grid(b)?;
    let x = match b.grid().dim() {
        1 => solve_cyclic_1d(d, c, b),
        2 => solve_cg(d, c, b)?,
        _ => unreachable!(),
    };
    let res = relative_residual(d, c, &x, b);
    if res > SOLVE_TOL {
        return Err(Error::SolverFailure {
            residual: res,
            iterations: 0,
        });
    }
    Ok(x)
}

/// Convenience for the constant-coefficient case `(s·I - c·Δ) x = b`.
pub fn solve_const_shifted(s: f64, c: f64, b: &ScalarField) -> Result<ScalarField> {
    let d = ScalarField::constant(b.grid(), s);
    solve_shifted(&d, c, b)
}

fn apply(d: &ScalarField, c: f64, x: &ScalarField) -> ScalarField {
    x.mul(d).axpy(-c, &laplacian(x))
}

fn relative_residual(d: &ScalarField, c: f64, x: &ScalarField, b: &ScalarField) -> f64 {
    let r = b.sub(&apply(d, c, x));
    let bn = crate::manifold::l2_norm(b);
    let rn = crate::manifold::l2_norm(&r);
    if bn == 0.0 {
        rn
    } else {
        rn / bn
    }
}

/// Direct solve of the periodic tridiagonal system with variable diagonal
/// `d_i + 2c/h²` and constant off-diagonal `-c/h²` (including the two wrap
/// corners).
fn solve_cyclic_1d(d: &ScalarField, c: f64, b: &ScalarField) -> ScalarField {
    let n = b.len();
    let h = b.grid().spacing()[0];
    let e = -c / (h * h); // off-diagonal entry
    let diag: Vec<f64> = d.values().iter().map(|&di| di - 2.0 * e).collect();
    let rhs = b.values();

    // Sherman-Morrison: write A = T + u vᵀ with u = (γ,0,…,0,e)ᵀ,
    // v = (1,0,…,0,e/γ)ᵀ and T the tridiagonal with corners folded into
    // the first/last diagonal entries.
    let gamma = -diag[0];
    let mut tdiag = diag.clone();
    tdiag[0] -= gamma;
    tdiag[n - 1] -= e * e / gamma;

    let x = thomas(&tdiag, e, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = e;
    let z = thomas(&tdiag, e, &u);

    let factor = (x[0] + e * x[n - 1] / gamma) / (1.0 + z[0] + e * z[n - 1] / gamma);
    let values: Vec<f64> = x.iter().zip(&z).map(|(&xi, &zi)| xi - factor * zi).collect();
    ScalarField::from_values(b.grid(), values).expect("tridiagonal solve produced non-finite values")
}

/// Thomas algorithm for a tridiagonal system with constant off-diagonal `e`.
fn thomas(diag: &[f64], e: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = e / diag[0];
    dp[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - e * cp[i - 1];
        cp[i] = e / m;
        dp[i] = (rhs[i] - e * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Conjugate gradient with Jacobi preconditioning.
fn solve_cg(d: &ScalarField, c: f64, b: &ScalarField) -> Result<ScalarField> {
    let grid = b.grid();
    let bn = crate::manifold::l2_norm(b);
    if bn == 0.0 {
        return Ok(ScalarField::zeros(grid));
    }
    // diagonal of the operator, for preconditioning
    let h = grid.spacing();
    let stencil_diag: f64 = h.iter().map(|&hi| 2.0 * c / (hi * hi)).sum();
    let precond = d.map(|di| 1.0 / (di + stencil_diag));

    let mut x = ScalarField::zeros(grid);
    let mut r = b.clone();
    let mut z = r.mul(&precond);
    let mut p = z.clone();
    let mut rz = crate::manifold::inner(&r, &z);
    let max_iter = 20 * grid.len() + 100;
    for k in 0..max_iter {
        let ap = apply(d, c, &p);
        let alpha = rz / crate::manifold::inner(&p, &ap);
        x = x.axpy(alpha, &p);
        r = r.axpy(-alpha, &ap);
        if crate::manifold::l2_norm(&r) <= CG_TOL * bn {
            return Ok(x);
        }
        z = r.mul(&precond);
        let rz_new = crate::manifold::inner(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = z.axpy(beta, &p);
        if k + 1 == max_iter {
            break;
        }
    }
    Err(Error::SolverFailure {
        residual: crate::manifold::l2_norm(&r) / bn,
        iterations: max_iter,
    })
}
