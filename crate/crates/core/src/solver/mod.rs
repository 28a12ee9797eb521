//! Global Petrov-Galerkin assembly and linear solves.
//!
//! Trial functions are the exponentially-fitted bases, test functions the
//! Whitney forms.  On each cell the trial flux is frozen at its value at the
//! barycenter, so the diffusion-convection block is
//! `A[test, trial] = J(trial)(b_T) . integral of d(test)`; the reaction and
//! load terms use a quadrature rule on the cell.

pub mod sparse;

use log::debug;
use rayon::prelude::*;
use thiserror::Error;

use crate::elements::{whitney_basis, whitney_derivative, FormValue, Space};
use crate::expfit::{weighted_average, ExpFitError, ProblemConfig, WeightedQuadrature};
use crate::mesh::SimplicialMesh;
use crate::quadrature::SimplexRule;

pub use sparse::{CsrMatrix, GmresSettings};
use sparse::{BandedLu, Ilu0, SparseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("cell {cell}: {source}")]
    Local { cell: usize, source: ExpFitError },
    #[error("{space} is not available in {dim}D")]
    UnsupportedSpace { space: Space, dim: usize },
    #[error("problem is set up for {expected}, mesh/DOF map uses {got}")]
    SpaceMismatch { expected: Space, got: Space },
    #[error("boundary data has {got} values, expected {expected}")]
    BoundaryLength { expected: usize, got: usize },
    #[error("linear system is singular (zero pivot at {0})")]
    Singular(usize),
    #[error("iterative solver stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("non-finite values in the linear system or its solution")]
    NonFinite,
    #[error("no free DOFs: every DOF is constrained")]
    NoFreeDofs,
}

impl From<SparseError> for SolverError {
    fn from(e: SparseError) -> Self {
        match e {
            SparseError::ZeroPivot(k) => SolverError::Singular(k),
            SparseError::NotConverged { iterations, residual } => SolverError::NotConverged { iterations, residual },
            SparseError::NonFinite => SolverError::NonFinite,
        }
    }
}

/// Global numbering of the DOFs of one space: vertices, edges, facets or
/// cells of the mesh, with the sign relating each local DOF to the global
/// orientation of its entity.
#[derive(Debug, Clone)]
pub struct DofMap {
    space: Space,
    n_local: usize,
    n_global: usize,
    dofs: Vec<usize>,
    signs: Vec<f64>,
    boundary: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &SimplicialMesh, space: Space) -> Result<DofMap, SolverError> {
        let dim = mesh.dim();
        if !space.exists_in(dim) {
            return Err(SolverError::UnsupportedSpace { space, dim });
        }
        let n_local = space.local_dofs(dim);
        let mut dofs = Vec::with_capacity(n_local * mesh.n_cells());
        let mut signs = Vec::with_capacity(n_local * mesh.n_cells());
        for c in 0..mesh.n_cells() {
            match space {
                Space::Grad => {
                    dofs.extend_from_slice(mesh.cell(c));
                    signs.extend(std::iter::repeat_n(1.0, n_local));
                }
                Space::Curl => {
                    dofs.extend_from_slice(mesh.cell_edges(c));
                    signs.extend_from_slice(mesh.cell_edge_signs(c));
                }
                Space::Div => {
                    dofs.extend_from_slice(mesh.cell_facets(c));
                    signs.extend_from_slice(mesh.cell_facet_signs(c));
                }
                Space::L2 => {
                    dofs.push(c);
                    signs.push(1.0);
                }
            }
        }
        let (n_global, boundary): (usize, Vec<bool>) = match space {
            Space::Grad => (mesh.n_vertices(), (0..mesh.n_vertices()).map(|v| mesh.is_boundary_vertex(v)).collect()),
            Space::Curl => (mesh.n_edges(), (0..mesh.n_edges()).map(|e| mesh.is_boundary_edge(e)).collect()),
            Space::Div => (mesh.n_facets(), (0..mesh.n_facets()).map(|f| mesh.is_boundary_facet(f)).collect()),
            Space::L2 => (mesh.n_cells(), vec![false; mesh.n_cells()]),
        };
        Ok(DofMap { space, n_local, n_global, dofs, signs, boundary })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n_global(&self) -> usize {
        self.n_global
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.dofs[c * self.n_local..(c + 1) * self.n_local]
    }

    pub fn cell_signs(&self, c: usize) -> &[f64] {
        &self.signs[c * self.n_local..(c + 1) * self.n_local]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Local DOF values of cell `c` from a global coefficient vector.
    pub fn local_values(&self, c: usize, global: &[f64]) -> Vec<f64> {
        self.cell_dofs(c).iter().zip(self.cell_signs(c)).map(|(&g, &s)| s * global[g]).collect()
    }
}

/// Polynomial degree of the rules for the reaction and load terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyQuadrature {
    pub reaction_degree: usize,
    pub load_degree: usize,
}

impl Default for AssemblyQuadrature {
    fn default() -> Self {
        AssemblyQuadrature { reaction_degree: 2, load_degree: 2 }
    }
}

fn rule_of_degree(dim: usize, degree: usize) -> SimplexRule {
    if degree <= 2 {
        SimplexRule::degree2(dim)
    } else if degree <= 4 {
        SimplexRule::degree4(dim)
    } else {
        SimplexRule::gauss_duffy(dim, degree.div_ceil(2) + 1, 1)
    }
}

/// Assembled global system over all DOFs, before boundary conditions.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

struct CellContribution {
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

pub fn assemble(
    mesh: &SimplicialMesh,
    config: &ProblemConfig,
    dofmap: &DofMap,
    quad: &AssemblyQuadrature,
) -> Result<SparseSystem, SolverError> {
    if dofmap.space() != config.space {
        return Err(SolverError::SpaceMismatch { expected: config.space, got: dofmap.space() });
    }
    let dim = mesh.dim();
    let space = config.space;
    let n = dofmap.n_local();
    let reaction_rule = rule_of_degree(dim, quad.reaction_degree);
    let load_rule = rule_of_degree(dim, quad.load_degree);
    let contributions: Vec<CellContribution> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cell = mesh.cell_geometry(c);
            let vol = cell.volume();
            let local_err = |source| SolverError::Local { cell: c, source };
            let mut matrix = vec![0.0; n * n];
            let mut rhs = vec![0.0; n];
            if space != Space::L2 {
                let center = config.solve_at(&cell, &cell.barycenter()).map_err(local_err)?;
                let dtest = whitney_derivative(space, &cell);
                for r in 0..n {
                    for s in 0..n {
                        matrix[r * n + s] = vol * center.fluxes[s].dot(dtest[r]);
                    }
                }
            }
            for q in 0..reaction_rule.len() {
                let x = cell.point_from_barycentric(reaction_rule.point(q));
                let gamma = (config.gamma)(&x);
                if gamma == 0.0 {
                    continue;
                }
                let trial = config.solve_at(&cell, &x).map_err(local_err)?;
                let test = whitney_basis(space, &cell, &x);
                let w = vol * reaction_rule.weights[q] * gamma;
                for r in 0..n {
                    for s in 0..n {
                        matrix[r * n + s] += w * trial.values[s].dot(test[r]);
                    }
                }
            }
            for q in 0..load_rule.len() {
                let x = cell.point_from_barycentric(load_rule.point(q));
                let f = (config.load)(&x);
                let test = whitney_basis(space, &cell, &x);
                let w = vol * load_rule.weights[q];
                for r in 0..n {
                    rhs[r] += w * f.dot(test[r]);
                }
            }
            Ok(CellContribution { matrix, rhs })
        })
        .collect::<Result<_, SolverError>>()?;

    let mut triplets = Vec::with_capacity(contributions.len() * n * n);
    let mut rhs = vec![0.0; dofmap.n_global()];
    for (c, contrib) in contributions.iter().enumerate() {
        let dofs = dofmap.cell_dofs(c);
        let signs = dofmap.cell_signs(c);
        for r in 0..n {
            rhs[dofs[r]] += signs[r] * contrib.rhs[r];
            for s in 0..n {
                triplets.push((dofs[r], dofs[s], signs[r] * signs[s] * contrib.matrix[r * n + s]));
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(dofmap.n_global(), dofmap.n_global(), &triplets);
    if matrix.values.iter().chain(&rhs).any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    Ok(SparseSystem { matrix, rhs })
}

/// Weighted DOF values of the Dirichlet data on every boundary entity, in
/// global orientation; interior entries are zero.  With no boundary data
/// configured all values are zero.
pub fn boundary_values(
    mesh: &SimplicialMesh,
    config: &ProblemConfig,
    dofmap: &DofMap,
    quad: &WeightedQuadrature,
) -> Vec<f64> {
    let mut values = vec![0.0; dofmap.n_global()];
    let Some(g) = &config.boundary else { return values };
    for (dof, value) in values.iter_mut().enumerate() {
        if !dofmap.is_boundary(dof) {
            continue;
        }
        *value = match config.space {
            Space::Grad => g(&mesh.vertex(dof)).scalar(),
            Space::Curl => {
                let [a, b] = mesh.edge(dof);
                let pts = [mesh.vertex(a), mesh.vertex(b)];
                let t = pts[1] - pts[0];
                let theta = config.theta(&((pts[0] + pts[1]) / 2.0));
                weighted_average(&pts, &theta, |y| FormValue::Scalar(g(y).vector().dot(&t)), quad).scalar()
            }
            Space::Div => {
                let pts: Vec<_> = mesh.facet(dof).iter().map(|&v| mesh.vertex(v)).collect();
                let n = mesh.facet_area_normal(dof);
                let center = pts.iter().sum::<crate::mesh::Point>() / pts.len() as f64;
                let theta = config.theta(&center);
                weighted_average(&pts, &theta, |y| FormValue::Scalar(g(y).vector().dot(&n)), quad).scalar()
            }
            Space::L2 => 0.0,
        };
    }
    values
}

/// System restricted to the free (interior) DOFs.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global index of every free DOF.
    pub free: Vec<usize>,
    /// Full-length vector holding the prescribed boundary values.
    pub boundary: Vec<f64>,
}

impl ReducedSystem {
    /// Full coefficient vector from a solution of the reduced system.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut full = self.boundary.clone();
        for (&g, &v) in self.free.iter().zip(free_values) {
            full[g] = v;
        }
        full
    }
}

/// Eliminate boundary DOFs: `A_ff x_f = b_f - A_fb g_b`.
pub fn apply_dirichlet(system: &SparseSystem, dofmap: &DofMap, values: &[f64]) -> Result<ReducedSystem, SolverError> {
    let n = dofmap.n_global();
    if values.len() != n {
        return Err(SolverError::BoundaryLength { expected: n, got: values.len() });
    }
    let mut map = vec![None; n];
    let mut free = Vec::new();
    for dof in 0..n {
        if !dofmap.is_boundary(dof) {
            map[dof] = Some(free.len());
            free.push(dof);
        }
    }
    let mut boundary = vec![0.0; n];
    for dof in 0..n {
        if dofmap.is_boundary(dof) {
            boundary[dof] = values[dof];
        }
    }
    let lifted = system.matrix.mul_vec(&boundary);
    let rhs: Vec<f64> = free.iter().map(|&g| system.rhs[g] - lifted[g]).collect();
    let matrix = system.matrix.submatrix(&map, &map, free.len(), free.len());
    Ok(ReducedSystem { matrix, rhs, free, boundary })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMethod {
    /// Banded LU after reverse Cuthill-McKee reordering.
    Direct,
    /// GMRES with an ILU(0) preconditioner.
    Iterative(GmresSettings),
    /// Direct when the band fits in memory, iterative otherwise.
    Auto,
}

/// Entries of band storage above which `Auto` switches to the iterative solver.
const DIRECT_STORAGE_LIMIT: usize = 40_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub direct: bool,
    pub iterations: usize,
    pub bandwidth: (usize, usize),
    pub relative_residual: f64,
    pub seconds: f64,
}

pub fn solve_linear(a: &CsrMatrix, b: &[f64], method: SolveMethod) -> Result<(Vec<f64>, SolveReport), SolverError> {
    let n = a.n_rows;
    if n == 0 {
        return Err(SolverError::NoFreeDofs);
    }
    let start = std::time::Instant::now();
    let (x, direct, iterations, bandwidth) = match method {
        SolveMethod::Iterative(settings) => {
            let (x, it) = sparse::gmres(a, b, &Ilu0::new(a), &settings)?;
            (x, false, it, (0, 0))
        }
        SolveMethod::Direct | SolveMethod::Auto => {
            let perm = sparse::reverse_cuthill_mckee(a);
            let (kl, ku) = sparse::bandwidths(a, &perm);
            let storage = BandedLu::storage_estimate(n, kl, ku);
            if method == SolveMethod::Auto && storage > DIRECT_STORAGE_LIMIT {
                debug!("band storage {storage} too large, switching to GMRES");
                let (x, it) = sparse::gmres(a, b, &Ilu0::new(a), &GmresSettings::default())?;
                (x, false, it, (kl, ku))
            } else {
                let lu = BandedLu::factor(a, perm)?;
                (lu.solve(b), true, 0, (kl, ku))
            }
        }
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let ax = a.mul_vec(&x);
    let rn: f64 = b.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let bn: f64 = b.iter().map(|b| b * b).sum::<f64>().sqrt();
    let relative_residual = if bn > 0.0 { rn / bn } else { rn };
    let seconds = start.elapsed().as_secs_f64();
    Ok((x, SolveReport { direct, iterations, bandwidth, relative_residual, seconds }))
}

/// Assemble, apply the boundary data and solve.  Returns the global
/// coefficient vector.
pub fn solve_problem(
    mesh: &SimplicialMesh,
    config: &ProblemConfig,
    method: SolveMethod,
) -> Result<(DofMap, Vec<f64>, SolveReport), SolverError> {
    let dofmap = DofMap::new(mesh, config.space)?;
    let system = assemble(mesh, config, &dofmap, &AssemblyQuadrature::default())?;
    let g = boundary_values(mesh, config, &dofmap, &WeightedQuadrature::default());
    let reduced = apply_dirichlet(&system, &dofmap, &g)?;
    let (x, report) = solve_linear(&reduced.matrix, &reduced.rhs, method)?;
    debug!(
        "{} DOFs ({} free), direct {}, band {:?}, residual {:e}",
        dofmap.n_global(),
        reduced.free.len(),
        report.direct,
        report.bandwidth,
        report.relative_residual
    );
    Ok((dofmap, reduced.expand(&x), report))
}

#[cfg(test)]
mod tests;
