//! The two norm-preserving non-local flows and their Lagrange multipliers.
//!
//! Linear forced flow:    ∂ₜu = Δu + λ(t)u + A(x,t),  λ = ∫(|∇u|² - uA)
//! Nonlinear power flow:  ∂ₜu = Δu + λ(t)u - uᵖ,      λ = ∫(|∇u|² + u^{p+1})
//!
//! With unit-norm data the multiplier makes ∫ u·∂ₜu vanish identically, and
//! because the discrete operators satisfy exact summation by parts the
//! orthogonality holds to rounding at the discrete level too.

use crate::error::{Error, Result};
use crate::manifold::{grad_sq, inner, integrate, l2_norm, laplacian, ScalarField};

/// Temporal profile α(t) of a separable forcing A(x,t) = α(t)·a(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalProfile {
    /// α(t) = 1
    Constant,
    /// α(t) = exp(-rate·t), rate ≥ 0
    ExpDecay { rate: f64 },
}

impl TemporalProfile {
    pub fn alpha(&self, t: f64) -> f64 {
        match self {
            TemporalProfile::Constant => 1.0,
            TemporalProfile::ExpDecay { rate } => (-rate * t).exp(),
        }
    }
}

/// Non-negative separable forcing A(x,t) = α(t)·a(x).
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    spatial: ScalarField,
    temporal: TemporalProfile,
}

impl ForcingSpec {
    pub fn new(spatial: ScalarField, temporal: TemporalProfile) -> Result<Self> {
        if spatial.min() < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "forcing must be non-negative (min = {})",
                spatial.min()
            )));
        }
        if let TemporalProfile::ExpDecay { rate } = temporal {
            if !(rate >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "decay rate must be >= 0, got {rate}"
                )));
            }
        }
        Ok(Self { spatial, temporal })
    }

    pub fn zero(grid: &std::sync::Arc<crate::manifold::TorusGrid>) -> Self {
        Self {
            spatial: ScalarField::zeros(grid),
            temporal: TemporalProfile::Constant,
        }
    }

    pub fn spatial(&self) -> &ScalarField {
        &self.spatial
    }

    pub fn temporal(&self) -> TemporalProfile {
        self.temporal
    }

    /// A(·,t) as a field.
    pub fn at(&self, t: f64) -> ScalarField {
        self.spatial.scale(self.temporal.alpha(t))
    }

    pub fn is_zero(&self) -> bool {
        self.spatial.values().iter().all(|&v| v == 0.0)
    }
}

/// Which flow to run.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind {
    LinearForced(ForcingSpec),
    NonlinearPower { p: f64 },
}

/// A flow problem: variant plus normalized initial data g with ∫g² = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    kind: FlowKind,
    g: ScalarField,
}

impl FlowSpec {
    /// Linear forced flow. Requires g ≥ 0; g is rescaled to unit L2 norm.
    pub fn linear(g: ScalarField, forcing: ForcingSpec) -> Result<Self> {
        forcing.spatial().same_grid(&g)?;
        if g.min() < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "initial data must be non-negative (min = {})",
                g.min()
            )));
        }
        Ok(Self {
            kind: FlowKind::LinearForced(forcing),
            g: renormalize(&g)?,
        })
    }

    /// Nonlinear power flow. Requires g > 0 and p > 1; g is rescaled to
    /// unit L2 norm.
    pub fn nonlinear(g: ScalarField, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidParameter(format!("need p > 1, got {p}")));
        }
        if g.min() <= 0.0 {
            return Err(Error::NonPositiveField {
                context: "nonlinear initial data",
                min: g.min(),
            });
        }
        Ok(Self {
            kind: FlowKind::NonlinearPower { p },
            g: renormalize(&g)?,
        })
    }

    pub fn kind(&self) -> &FlowKind {
        &self.kind
    }

    pub fn initial(&self) -> &ScalarField {
        &self.g
    }

    pub fn grid(&self) -> &std::sync::Arc<crate::manifold::TorusGrid> {
        self.g.grid()
    }

    /// λ(t) evaluated on a state u at time t.
    pub fn lambda(&self, u: &ScalarField, t: f64) -> Result<f64> {
        match &self.kind {
            FlowKind::LinearForced(forcing) => lambda_linear(u, &forcing.at(t)),
            FlowKind::NonlinearPower { p } => lambda_nonlinear(u, *p),
        }
    }

    /// The flow's conserved-norm companion integral at a state:
    /// ∫u^{p+1} for the nonlinear flow, ∫uA for the linear one.
    pub fn extra_integral(&self, u: &ScalarField, t: f64) -> f64 {
        match &self.kind {
            FlowKind::LinearForced(forcing) => inner(u, &forcing.at(t)),
            FlowKind::NonlinearPower { p } => integrate(&u.powi_or_f(p + 1.0)),
        }
    }
}

/// λ(t) = ∫(|∇u|² - uA) for the linear forced flow.
pub fn lambda_linear(u: &ScalarField, a: &ScalarField) -> Result<f64> {
    u.same_grid(a)?;
    Ok(integrate(&grad_sq(u)) - inner(u, a))
}

/// λ(t) = ∫(|∇u|² + u^{p+1}) for the nonlinear power flow; requires u > 0.
pub fn lambda_nonlinear(u: &ScalarField, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("need p > 1, got {p}")));
    }
    if u.min() <= 0.0 {
        return Err(Error::NonPositiveField {
            context: "lambda_nonlinear",
            min: u.min(),
        });
    }
    Ok(integrate(&grad_sq(u)) + integrate(&u.powi_or_f(p + 1.0)))
}

/// Right-hand side of the flow at state u and time t.
pub fn rhs(u: &ScalarField, t: f64, spec: &FlowSpec) -> Result<ScalarField> {
    match spec.kind() {
        FlowKind::LinearForced(forcing) => {
            let a = forcing.at(t);
            let lam = lambda_linear(u, &a)?;
            Ok(laplacian(u).axpy(lam, u).add(&a))
        }
        FlowKind::NonlinearPower { p } => {
            let lam = lambda_nonlinear(u, *p)?;
            let up = u.powi_or_f(*p);
            Ok(laplacian(u).axpy(lam, u).sub(&up))
        }
    }
}

/// u / ‖u‖₂. Errors on the zero field.
pub fn renormalize(u: &ScalarField) -> Result<ScalarField> {
    let norm = l2_norm(u);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateField);
    }
    Ok(u.scale(1.0 / norm))
}
