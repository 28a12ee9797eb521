//! L2 errors of solution and flux, and convergence tables under uniform
//! refinement.

use std::fmt::Write as _;
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use crate::elements::FormValue;
use crate::expfit::ProblemConfig;
use crate::mesh::{Point, SimplicialMesh};
use crate::quadrature::SimplexRule;
use crate::solver::{solve_problem, DofMap, SolveMethod, SolveReport};

use super::cases::ManufacturedCase;
use super::HarnessError;

/// `||u - u_h||` and `||J - J_h||` in L2, with `u_h` and its discrete flux
/// evaluated through the pointwise solves on a degree-4 rule per cell.
pub fn l2_errors<U, J>(
    mesh: &SimplicialMesh,
    config: &ProblemConfig,
    dofmap: &DofMap,
    coefficients: &[f64],
    exact: U,
    exact_flux: J,
) -> Result<(f64, f64), HarnessError>
where
    U: Fn(&Point) -> FormValue + Sync,
    J: Fn(&Point) -> FormValue + Sync,
{
    let rule = SimplexRule::degree4(mesh.dim());
    let per_cell: Vec<(f64, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cell = mesh.cell_geometry(c);
            let local = dofmap.local_values(c, coefficients);
            let mut eu = 0.0;
            let mut ej = 0.0;
            for q in 0..rule.len() {
                let x = cell.point_from_barycentric(rule.point(q));
                let eval = config.solve_at(&cell, &x).map_err(|e| HarnessError::Local { cell: c, source: e })?;
                let (u, j) = eval.combine(&local);
                eu += rule.weights[q] * (u - exact(&x)).norm_squared();
                ej += rule.weights[q] * (j - exact_flux(&x)).norm_squared();
            }
            Ok((cell.volume() * eu, cell.volume() * ej))
        })
        .collect::<Result<_, HarnessError>>()?;
    let (eu, ej) = per_cell.iter().fold((0.0, 0.0), |(a, b), (u, j)| (a + u, b + j));
    Ok((eu.sqrt(), ej.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub inv_h: usize,
    pub eps: f64,
    pub err_solution: f64,
    pub order_solution: Option<f64>,
    pub err_flux: f64,
    pub order_flux: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

pub const CSV_HEADER: &str = "inv_h,eps,err_solution,order_solution,err_flux,order_flux";

/// Observed order between a coarse and a fine level.
pub fn observed_order(coarse_err: f64, fine_err: f64, coarse_inv_h: usize, fine_inv_h: usize) -> f64 {
    (coarse_err / fine_err).ln() / (fine_inv_h as f64 / coarse_inv_h as f64).ln()
}

impl ConvergenceTable {
    /// Rows for one `eps`, in the order they were computed.
    pub fn rows_for(&self, eps: f64) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.eps == eps).collect()
    }

    pub fn row(&self, eps: f64, inv_h: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.eps == eps && r.inv_h == inv_h)
    }

    /// Append a level and fill in its orders from the previous level with
    /// the same `eps`.
    pub fn push(&mut self, inv_h: usize, eps: f64, err_solution: f64, err_flux: f64) {
        let prev = self.rows.iter().rev().find(|r| r.eps == eps);
        let (order_solution, order_flux) = match prev {
            Some(p) => (
                Some(observed_order(p.err_solution, err_solution, p.inv_h, inv_h)),
                Some(observed_order(p.err_flux, err_flux, p.inv_h, inv_h)),
            ),
            None => (None, None),
        };
        self.rows.push(ConvergenceRow { inv_h, eps, err_solution, order_solution, err_flux, order_flux });
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.inv_h,
                r.eps,
                r.err_solution,
                opt(r.order_solution),
                r.err_flux,
                opt(r.order_flux)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<ConvergenceTable, HarnessError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            _ => return Err(HarnessError::Parse("missing CSV header".into())),
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| HarnessError::Parse(format!("{s:?}: {e}")));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 6 {
                return Err(HarnessError::Parse(format!("expected 6 fields: {line:?}")));
            }
            rows.push(ConvergenceRow {
                inv_h: f[0].parse().map_err(|e| HarnessError::Parse(format!("{:?}: {e}", f[0])))?,
                eps: num(f[1])?,
                err_solution: num(f[2])?,
                order_solution: opt(f[3])?,
                err_flux: num(f[4])?,
                order_flux: opt(f[5])?,
            });
        }
        Ok(ConvergenceTable { rows })
    }

    /// Fixed-width text rendering for terminals.
    pub fn render(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        let mut out = format!("{:>6} {:>8} {:>12} {:>7} {:>12} {:>7}\n", "1/h", "eps", "err_u", "order", "err_J", "order");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6} {:>8.0e} {:>12.5e} {:>7} {:>12.5e} {:>7}",
                r.inv_h,
                r.eps,
                r.err_solution,
                opt(r.order_solution),
                r.err_flux,
                opt(r.order_flux)
            );
        }
        out
    }
}

/// Result of one level of a convergence study.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub inv_h: usize,
    pub eps: f64,
    pub n_dofs: usize,
    pub report: SolveReport,
    pub seconds: f64,
}

pub fn solve_level(case: &ManufacturedCase, eps: f64, inv_h: usize, method: SolveMethod) -> Result<(f64, f64, LevelResult), HarnessError> {
    let start = Instant::now();
    let mesh = case.mesh(inv_h)?;
    let config = case.config(eps);
    let (dofmap, x, report) = solve_problem(&mesh, &config, method)?;
    let (eu, ej) = l2_errors(&mesh, &config, &dofmap, &x, |p| (case.solution)(p), |p| case.flux(eps, p))?;
    let level = LevelResult { inv_h, eps, n_dofs: dofmap.n_global(), report, seconds: start.elapsed().as_secs_f64() };
    info!("{} eps {eps:e} 1/h {inv_h}: err_u {eu:.4e} err_J {ej:.4e} ({:.2}s)", case.name, level.seconds);
    Ok((eu, ej, level))
}

/// Levels run one after another for every `eps`; each level assembles in
/// parallel.
pub fn run_convergence(
    case: &ManufacturedCase,
    eps_list: &[f64],
    levels: &[usize],
    method: SolveMethod,
) -> Result<(ConvergenceTable, Vec<LevelResult>), HarnessError> {
    let mut table = ConvergenceTable::default();
    let mut details = Vec::new();
    for &eps in eps_list {
        for &n in levels {
            let (eu, ej, level) = solve_level(case, eps, n, method)?;
            table.push(n, eps, eu, ej);
            details.push(level);
        }
    }
    Ok((table, details))
}
