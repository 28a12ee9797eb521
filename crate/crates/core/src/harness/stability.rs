//! Boundary-layer demo for 2D H(div): rotating convection, unit reaction,
//! load `(1, 1)` and vanishing normal trace.

use rayon::prelude::*;

use crate::elements::{FormValue, Space};
use crate::expfit::ProblemConfig;
use crate::mesh::{unit_square, Point, SimplicialMesh};
use crate::quadrature::SimplexRule;
use crate::solver::{solve_problem, SolveMethod};

use super::vtk::{unstructured_grid, CellField};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySummary {
    pub eps: f64,
    pub n: usize,
    /// Largest `|u_h|` over the sample points of all cells.
    pub max_norm: f64,
    /// Largest jump of the cell-averaged `u_h` across an interior facet.
    pub oscillation: f64,
    pub finite: bool,
}

pub struct StabilityRun {
    pub summary: StabilitySummary,
    pub mesh: SimplicialMesh,
    pub cell_solution: Vec<FormValue>,
    pub cell_flux: Vec<FormValue>,
}

impl StabilityRun {
    pub fn to_vtk(&self) -> String {
        unstructured_grid(
            &self.mesh,
            &format!("u_h for eps = {:e}, n = {}", self.summary.eps, self.summary.n),
            &[
                CellField { name: "u_h", values: &self.cell_solution },
                CellField { name: "flux", values: &self.cell_flux },
            ],
        )
    }
}

pub fn stability_config(eps: f64) -> ProblemConfig {
    ProblemConfig::new(Space::Div, eps)
        .with_beta(|x| Point::new(-x.y, x.x, 0.0))
        .with_gamma(|_| 1.0)
        .with_load(|_| FormValue::Vector(Point::new(1.0, 1.0, 0.0)))
}

pub fn run_stability(eps: f64, n: usize) -> Result<StabilityRun, HarnessError> {
    let mesh = unit_square(n)?;
    let config = stability_config(eps);
    let (dofmap, x, _) = solve_problem(&mesh, &config, SolveMethod::Auto)?;
    let rule = SimplexRule::degree4(2);
    let per_cell: Vec<(FormValue, FormValue, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cell = mesh.cell_geometry(c);
            let local = dofmap.local_values(c, &x);
            let mut u_avg = FormValue::zero(false);
            let mut j_avg = FormValue::zero(true);
            let mut max_norm = 0.0f64;
            for q in 0..rule.len() {
                let p = cell.point_from_barycentric(rule.point(q));
                let eval = config.solve_at(&cell, &p).map_err(|e| HarnessError::Local { cell: c, source: e })?;
                let (u, j) = eval.combine(&local);
                u_avg += u * rule.weights[q];
                j_avg += j * rule.weights[q];
                max_norm = max_norm.max(u.norm());
            }
            Ok((u_avg, j_avg, max_norm))
        })
        .collect::<Result<_, HarnessError>>()?;
    let cell_solution: Vec<FormValue> = per_cell.iter().map(|p| p.0).collect();
    let cell_flux: Vec<FormValue> = per_cell.iter().map(|p| p.1).collect();
    let max_norm = per_cell.iter().fold(0.0f64, |m, p| m.max(p.2));
    let mut oscillation = 0.0f64;
    for f in 0..mesh.n_facets() {
        if let (a, Some(b)) = mesh.facet_cells(f) {
            oscillation = oscillation.max((cell_solution[a] - cell_solution[b]).norm());
        }
    }
    let finite = per_cell.iter().all(|p| p.0.is_finite() && p.1.is_finite() && p.2.is_finite());
    Ok(StabilityRun {
        summary: StabilitySummary { eps, n, max_norm, oscillation, finite },
        mesh,
        cell_solution,
        cell_flux,
    })
}

/// Runs every `eps`, returning the summaries and the VTK text per run.
pub fn run_stability_demo(eps_list: &[f64], n: usize) -> Result<Vec<(StabilitySummary, String)>, HarnessError> {
    eps_list
        .iter()
        .map(|&eps| {
            let run = run_stability(eps, n)?;
            let vtk = run.to_vtk();
            Ok((run.summary, vtk))
        })
        .collect()
}

pub fn summary_csv(summaries: &[StabilitySummary]) -> String {
    let mut out = String::from("eps,n,max_norm,oscillation,finite\n");
    for s in summaries {
        out.push_str(&format!("{},{},{},{},{}\n", s.eps, s.n, s.max_norm, s.oscillation, s.finite));
    }
    out
}
