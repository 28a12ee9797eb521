//! Exponentially-fitted local bases, discrete fluxes and weighted
//! interpolation.

pub mod dense;
mod interp;
mod local;
mod piola;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bernoulli::{BernoulliError, BernoulliKernel, StableBernoulli};
use crate::elements::{FormValue, Space};
use crate::mesh::{CellGeometry, Point};

pub use interp::{weighted_average, weighted_dofs, WeightedQuadrature};
pub use local::LocalFit;
pub use piola::{reference_cell, solve_via_reference};

pub type VectorField = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type FormField = Arc<dyn Fn(&Point) -> FormValue + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpFitError {
    #[error(transparent)]
    Bernoulli(#[from] BernoulliError),
    #[error("diffusion coefficient must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("{space} is not available in {dim}D")]
    UnsupportedSpace { space: Space, dim: usize },
    #[error("local system is singular (min pivot ratio {min_pivot_ratio:e})")]
    Singular { min_pivot_ratio: f64 },
    #[error("non-finite value in local system")]
    NonFinite,
    #[error("the affine map reverses orientation")]
    OrientationReversing,
    #[error("expected {expected} DOF values, got {got}")]
    DofCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveDiagnostics {
    /// Sign of the local determinant, normalized so that it is `+1` for
    /// vanishing convection.
    pub det_sign: f64,
    pub log_abs_det: f64,
    pub min_pivot_ratio: f64,
    pub refined: bool,
    pub residual: f64,
}

impl SolveDiagnostics {
    fn trivial() -> SolveDiagnostics {
        SolveDiagnostics { det_sign: 1.0, log_abs_det: 0.0, min_pivot_ratio: 1.0, refined: false, residual: 0.0 }
    }
}

/// Values and fluxes of all local basis functions at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBasisEval {
    pub space: Space,
    pub x: Point,
    pub values: Vec<FormValue>,
    pub fluxes: Vec<FormValue>,
    pub diagnostics: SolveDiagnostics,
}

impl PointBasisEval {
    /// Value and flux of the local function with the given DOFs.
    pub fn combine(&self, dofs: &[f64]) -> (FormValue, FormValue) {
        let mut v = self.values[0] * dofs[0];
        let mut j = self.fluxes[0] * dofs[0];
        for s in 1..dofs.len() {
            v += self.values[s] * dofs[s];
            j += self.fluxes[s] * dofs[s];
        }
        (v, j)
    }
}

/// Coefficients of one convection-diffusion-reaction problem
/// `d*(eps d u + beta ^ u) + gamma u = f` in a chosen space.
#[derive(Clone)]
pub struct ProblemConfig {
    pub space: Space,
    pub eps: f64,
    pub beta: VectorField,
    pub gamma: ScalarField,
    pub load: FormField,
    /// Dirichlet trace data; `None` means homogeneous.
    pub boundary: Option<FormField>,
    pub kernel: Arc<dyn BernoulliKernel>,
}

impl fmt::Debug for ProblemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemConfig")
            .field("space", &self.space)
            .field("eps", &self.eps)
            .field("boundary", &self.boundary.is_some())
            .finish_non_exhaustive()
    }
}

impl ProblemConfig {
    /// Zero convection, reaction and load; homogeneous boundary data.
    pub fn new(space: Space, eps: f64) -> ProblemConfig {
        let scalar = space.is_scalar();
        ProblemConfig {
            space,
            eps,
            beta: Arc::new(|_| Point::zeros()),
            gamma: Arc::new(|_| 0.0),
            load: Arc::new(move |_| FormValue::zero(scalar)),
            boundary: None,
            kernel: Arc::new(StableBernoulli),
        }
    }

    pub fn with_beta(mut self, beta: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        self.beta = Arc::new(beta);
        self
    }

    pub fn with_constant_beta(self, beta: Point) -> Self {
        self.with_beta(move |_| beta)
    }

    pub fn with_gamma(mut self, gamma: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        self.gamma = Arc::new(gamma);
        self
    }

    pub fn with_load(mut self, load: impl Fn(&Point) -> FormValue + Send + Sync + 'static) -> Self {
        self.load = Arc::new(load);
        self
    }

    pub fn with_boundary(mut self, g: impl Fn(&Point) -> FormValue + Send + Sync + 'static) -> Self {
        self.boundary = Some(Arc::new(g));
        self
    }

    pub fn with_kernel(mut self, kernel: Arc<dyn BernoulliKernel>) -> Self {
        self.kernel = kernel;
        self
    }

    /// Exponent gradient `beta / eps` of the fitting weight.
    pub fn theta(&self, x: &Point) -> Point {
        (self.beta)(x) / self.eps
    }

    pub fn fit(&self) -> LocalFit<'_> {
        LocalFit { eps: self.eps, kernel: self.kernel.as_ref() }
    }

    /// Local basis of the configured space at `x`, with `beta` frozen at `x`.
    pub fn solve_at(&self, cell: &CellGeometry, x: &Point) -> Result<PointBasisEval, ExpFitError> {
        self.fit().solve(self.space, cell, &(self.beta)(x), x)
    }
}

pub fn solve_grad_point(cell: &CellGeometry, config: &ProblemConfig, x: &Point) -> Result<PointBasisEval, ExpFitError> {
    config.fit().solve(Space::Grad, cell, &(config.beta)(x), x)
}

pub fn solve_curl_point(cell: &CellGeometry, config: &ProblemConfig, x: &Point) -> Result<PointBasisEval, ExpFitError> {
    config.fit().solve(Space::Curl, cell, &(config.beta)(x), x)
}

pub fn solve_div_point(cell: &CellGeometry, config: &ProblemConfig, x: &Point) -> Result<PointBasisEval, ExpFitError> {
    config.fit().solve(Space::Div, cell, &(config.beta)(x), x)
}

/// Discrete flux `sum_S dof_S j_S(x)` of the local function with `dofs`.
pub fn discrete_flux(
    cell: &CellGeometry,
    config: &ProblemConfig,
    dofs: &[f64],
    x: &Point,
) -> Result<FormValue, ExpFitError> {
    evaluate(cell, config, dofs, x).map(|(_, j)| j)
}

/// Value and discrete flux of the local function with `dofs` at `x`.
pub fn evaluate(
    cell: &CellGeometry,
    config: &ProblemConfig,
    dofs: &[f64],
    x: &Point,
) -> Result<(FormValue, FormValue), ExpFitError> {
    let expected = config.space.local_dofs(cell.dim());
    if dofs.len() != expected {
        return Err(ExpFitError::DofCount { expected, got: dofs.len() });
    }
    Ok(config.solve_at(cell, x)?.combine(dofs))
}

#[cfg(test)]
mod tests;
