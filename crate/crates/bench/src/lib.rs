//! Shared fixtures for the criterion benchmarks.

use std::f64::consts::PI;
use std::sync::Arc;

use nlheat_core::{FlowSpec, ScalarField, TorusGrid};

pub fn grid_1d(n: usize) -> Arc<TorusGrid> {
    TorusGrid::unit_1d(n).unwrap()
}

pub fn grid_2d(n: usize) -> Arc<TorusGrid> {
    TorusGrid::unit_2d([n, n]).unwrap()
}

pub fn perturbed(grid: &Arc<TorusGrid>, amp: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        1.0 + amp * x.iter().map(|xi| (2.0 * PI * xi).sin()).product::<f64>()
    })
}

pub fn nonlinear_spec(grid: &Arc<TorusGrid>, p: f64) -> FlowSpec {
    FlowSpec::nonlinear(perturbed(grid, 0.3), p).unwrap()
}
