//! Verification harness: manufactured convergence studies, the stability
//! demo, the structural property suite and output writers.

pub mod basis_dump;
pub mod cases;
pub mod convergence;
pub mod oracle;
pub mod polynomial;
pub mod properties;
pub mod stability;
pub mod vtk;

use thiserror::Error;

use crate::expfit::ExpFitError;
use crate::mesh::MeshError;
use crate::solver::SolverError;

pub use cases::ManufacturedCase;
pub use convergence::{l2_errors, run_convergence, ConvergenceRow, ConvergenceTable};
pub use properties::{run_property_suites, PropertyReport, PropertyResult, SuiteSettings};
pub use stability::{run_stability_demo, StabilitySummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    ExpFit(#[from] ExpFitError),
    #[error("cell {cell}: {source}")]
    Local { cell: usize, source: ExpFitError },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
