//! Discrete flat-torus geometry and compatible difference operators.
//!
//! The gradient is the forward difference and the Laplacian is its negative
//! adjoint composed with itself, so discrete integration by parts holds
//! exactly: `∫ u Δu = -∫ |∇u|²` to rounding on every field, not just smooth
//! ones. Quadrature is the rectangle rule, which on a uniform periodic grid
//! coincides with the trapezoid rule and is exact for bandlimited integrands.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Periodic uniform grid in 1 or 2 dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    shape: Vec<usize>,
    period: Vec<f64>,
    spacing: Vec<f64>,
    cell_volume: f64,
}

impl TorusGrid {
    pub fn new_1d(n: usize, length: f64) -> Result<Arc<Self>> {
        Self::new(&[n], &[length])
    }

    pub fn new_2d(n: [usize; 2], length: [f64; 2]) -> Result<Arc<Self>> {
        Self::new(&n, &length)
    }

    /// Unit-period torus, the default domain: constants have unit L2 norm.
    pub fn unit_1d(n: usize) -> Result<Arc<Self>> {
        Self::new_1d(n, 1.0)
    }

    pub fn unit_2d(n: [usize; 2]) -> Result<Arc<Self>> {
        Self::new_2d(n, [1.0, 1.0])
    }

    pub fn new(shape: &[usize], period: &[f64]) -> Result<Arc<Self>> {
        if shape.is_empty() || shape.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                shape.len()
            )));
        }
        if shape.len() != period.len() {
            return Err(Error::InvalidGrid(format!(
                "shape has {} axes but period has {}",
                shape.len(),
                period.len()
            )));
        }
        for (&n, &l) in shape.iter().zip(period) {
            if n < 4 {
                return Err(Error::InvalidGrid(format!("need n >= 4 per axis, got {n}")));
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidGrid(format!("period must be positive, got {l}")));
            }
        }
        let spacing: Vec<f64> = shape
            .iter()
            .zip(period)
            .map(|(&n, &l)| l / n as f64)
            .collect();
        let cell_volume = spacing.iter().product();
        Ok(Arc::new(Self {
            shape: shape.to_vec(),
            period: period.to_vec(),
            spacing,
            cell_volume,
        }))
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn period(&self) -> &[f64] {
        &self.period
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of a node given its row-major flat index.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        match self.shape.len() {
            1 => vec![idx as f64 * self.spacing[0]],
            2 => {
                let nc = self.shape[1];
                vec![
                    (idx / nc) as f64 * self.spacing[0],
                    (idx % nc) as f64 * self.spacing[1],
                ]
            }
            _ => unreachable!(),
        }
    }

    /// Smallest nonzero eigenvalue of the discrete Laplacian stencil,
    /// (2/h²)(1 - cos(2πh/L)) minimized over axes.
    pub fn spectral_gap(&self) -> f64 {
        self.shape
            .iter()
            .zip(&self.spacing)
            .zip(&self.period)
            .map(|((_, &h), &l)| {
                2.0 / (h * h) * (1.0 - (2.0 * std::f64::consts::PI * h / l).cos())
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Real-valued function sampled on a [`TorusGrid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<TorusGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: &Arc<TorusGrid>, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_values(grid: &Arc<TorusGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { context: "from_values" });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "fields live on different grids".to_string(),
            ));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a * b)
    }

    /// u + c*v, the workhorse of the steppers.
    pub fn axpy(&self, c: f64, v: &ScalarField) -> ScalarField {
        self.zip_map(v, |a, b| a + c * b)
    }

    /// u^q; repeated multiplication for integer q, exp(q log u) otherwise.
    /// Non-integer q requires u > 0 at the call site.
    pub fn powi_or_f(&self, q: f64) -> ScalarField {
        if q == q.round() && q.abs() <= 64.0 {
            let k = q.round() as i32;
            self.map(|v| v.powi(k))
        } else {
            self.map(|v| v.powf(q))
        }
    }

    pub fn assert_finite(&self, context: &'static str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { context })
        }
    }
}

fn for_each_neighbor_pair(grid: &TorusGrid, mut f: impl FnMut(usize, usize, usize)) {
    // Calls f(axis, i, fwd) for every node i with fwd its periodic forward
    // neighbor along the axis.
    match grid.shape() {
        [n] => {
            let n = *n;
            for i in 0..n {
                f(0, i, if i + 1 == n { 0 } else { i + 1 });
            }
        }
        [nr, nc] => {
            let (nr, nc) = (*nr, *nc);
            for r in 0..nr {
                let rn = if r + 1 == nr { 0 } else { r + 1 };
                for c in 0..nc {
                    let cn = if c + 1 == nc { 0 } else { c + 1 };
                    let i = r * nc + c;
                    f(0, i, rn * nc + c);
                    f(1, i, r * nc + cn);
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Periodic 3-point (1-D) / 5-point (2-D) Laplacian; exactly the negative
/// adjoint-square of the forward difference used by [`grad_sq`].
pub fn laplacian(u: &ScalarField) -> ScalarField {
    let grid = u.grid().clone();
    let v = u.values();
    let mut out = vec![0.0; v.len()];
    match grid.shape() {
        [n] => {
            let n = *n;
            let inv_h2 = 1.0 / (grid.spacing()[0] * grid.spacing()[0]);
            for i in 0..n {
                let ip = if i + 1 == n { 0 } else { i + 1 };
                let im = if i == 0 { n - 1 } else { i - 1 };
                out[i] = (v[ip] - 2.0 * v[i] + v[im]) * inv_h2;
            }
        }
        [nr, nc] => {
            let (nr, nc) = (*nr, *nc);
            let inv_h0 = 1.0 / (grid.spacing()[0] * grid.spacing()[0]);
            let inv_h1 = 1.0 / (grid.spacing()[1] * grid.spacing()[1]);
            for r in 0..nr {
                let rp = if r + 1 == nr { 0 } else { r + 1 };
                let rm = if r == 0 { nr - 1 } else { r - 1 };
                for c in 0..nc {
                    let cp = if c + 1 == nc { 0 } else { c + 1 };
                    let cm = if c == 0 { nc - 1 } else { c - 1 };
                    let i = r * nc + c;
                    out[i] = (v[rp * nc + c] - 2.0 * v[i] + v[rm * nc + c]) * inv_h0
                        + (v[r * nc + cp] - 2.0 * v[i] + v[r * nc + cm]) * inv_h1;
                }
            }
        }
        _ => unreachable!(),
    }
    ScalarField {
        grid,
        values: out,
    }
}

/// Nodewise squared forward-difference gradient,
/// `Σ_axes ((u(x + h e_a) - u(x)) / h_a)²`.
pub fn grad_sq(u: &ScalarField) -> ScalarField {
    let grid = u.grid().clone();
    let v = u.values();
    let mut out = vec![0.0; v.len()];
    let spacing = grid.spacing().to_vec();
    for_each_neighbor_pair(&grid, |axis, i, fwd| {
        let d = (v[fwd] - v[i]) / spacing[axis];
        out[i] += d * d;
    });
    ScalarField {
        grid,
        values: out,
    }
}

/// Rectangle-rule integral `Σ values · cell_volume`.
pub fn integrate(u: &ScalarField) -> f64 {
    u.values().iter().sum::<f64>() * u.grid().cell_volume()
}

/// L2 inner product `∫ u v`.
pub fn inner(u: &ScalarField, v: &ScalarField) -> f64 {
    debug_assert_eq!(u.grid(), v.grid());
    u.values()
        .iter()
        .zip(v.values())
        .map(|(&a, &b)| a * b)
        .sum::<f64>()
        * u.grid().cell_volume()
}

/// `sqrt(∫ u²)`.
pub fn l2_norm(u: &ScalarField) -> f64 {
    inner(u, u).max(0.0).sqrt()
}

/// Max-norm over nodes.
pub fn max_norm(u: &ScalarField) -> f64 {
    u.values().iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}
