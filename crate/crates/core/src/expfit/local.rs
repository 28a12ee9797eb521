//! Point-wise local systems.
//!
//! At an evaluation point `x` the convection field is frozen at `beta(x)` and
//! the cell is split into sub-simplices that share `x`.  Integrating the
//! constitutive relation `j = eps E^{-1} d(E phi)` with `E = exp(beta . y / eps)`
//! over each piece gives a small linear system for the basis value `phi(x)`
//! and the constant flux `j(x)`; the Bernoulli functions are the ratios of
//! the exponential averages that appear.  All sub-simplex quantities are
//! written in terms of `l_i = x_i - x` and `s_i = beta . l_i`.

use crate::bernoulli::BernoulliKernel;
use crate::elements::{FormValue, Space};
use crate::mesh::{local_edges, CellGeometry, Point};

use super::dense::{self, DenseError};
use super::{ExpFitError, PointBasisEval, SolveDiagnostics};

/// Diffusion coefficient together with the source of Bernoulli values.
#[derive(Clone, Copy)]
pub struct LocalFit<'a> {
    pub eps: f64,
    pub kernel: &'a dyn BernoulliKernel,
}

/// Residual tolerance (normwise backward error) for an accepted local solve.
const RESIDUAL_TOLERANCE: f64 = 1e-12;

impl LocalFit<'_> {
    /// Solve the local system of `space` at `x` with the convection frozen
    /// at `beta`.  `L2` needs no fitting and returns the Whitney constant.
    pub fn solve(
        &self,
        space: Space,
        cell: &CellGeometry,
        beta: &Point,
        x: &Point,
    ) -> Result<PointBasisEval, ExpFitError> {
        if !space.exists_in(cell.dim()) {
            return Err(ExpFitError::UnsupportedSpace { space, dim: cell.dim() });
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(ExpFitError::InvalidEpsilon(self.eps));
        }
        if !beta.iter().chain(x.iter()).all(|c| c.is_finite()) {
            return Err(ExpFitError::NonFinite);
        }
        match space {
            Space::Grad => self.solve_grad(cell, beta, x),
            Space::Curl => self.solve_curl(cell, beta, x),
            Space::Div => self.solve_div(cell, beta, x),
            Space::L2 => Ok(PointBasisEval {
                space,
                x: *x,
                values: vec![FormValue::Scalar(1.0 / cell.volume())],
                fluxes: vec![FormValue::Scalar(0.0)],
                diagnostics: SolveDiagnostics::trivial(),
            }),
        }
    }

    fn geometry(&self, cell: &CellGeometry, beta: &Point, x: &Point) -> ([Point; 4], [f64; 4]) {
        let mut l = [Point::zeros(); 4];
        let mut s = [0.0; 4];
        for i in 0..cell.n_vertices() {
            l[i] = cell.vertex(i) - x;
            s[i] = beta.dot(&l[i]);
        }
        (l, s)
    }

    fn solve_grad(&self, cell: &CellGeometry, beta: &Point, x: &Point) -> Result<PointBasisEval, ExpFitError> {
        let d = cell.dim();
        let n = d + 1;
        let (l, s) = self.geometry(cell, beta, x);
        // unknowns: (j_1..j_d, phi); row i integrates along the segment [x, x_i]
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            a[i * n..i * n + d].copy_from_slice(&l[i].as_slice()[..d]);
            a[i * n + d] = self.kernel.b1(s[i], self.eps)?;
            b[i * n + i] = self.kernel.b1(-s[i], self.eps)?;
        }
        let sol = solve_checked(&a, n, &b)?;
        let mut values = Vec::with_capacity(n);
        let mut fluxes = Vec::with_capacity(n);
        for c in 0..n {
            let mut j = Point::zeros();
            for r in 0..d {
                j[r] = sol.x[r * n + c];
            }
            values.push(FormValue::Scalar(sol.x[d * n + c]));
            fluxes.push(FormValue::Vector(j));
        }
        Ok(finish(Space::Grad, cell, x, values, fluxes, &sol))
    }

    fn solve_curl(&self, cell: &CellGeometry, beta: &Point, x: &Point) -> Result<PointBasisEval, ExpFitError> {
        let (l, s) = self.geometry(cell, beta, x);
        let n = 6;
        // unknowns: (j, phi); row (a, b) integrates over the triangle (x, x_a, x_b)
        let mut m = vec![0.0; n * n];
        let mut rhs = vec![0.0; n * n];
        for (row, &[p, q]) in local_edges(3).iter().enumerate() {
            let area = l[p].cross(&l[q]) / 2.0;
            let bp = self.kernel.b2(s[p], s[q], self.eps)?;
            let bq = self.kernel.b2(s[q], s[p], self.eps)?;
            let tang = l[q] * bq - l[p] * bp;
            m[row * n..row * n + 3].copy_from_slice(area.as_slice());
            m[row * n + 3..row * n + 6].copy_from_slice(tang.as_slice());
            rhs[row * n + row] = self.kernel.b2(s[q] - s[p], -s[p], self.eps)?;
        }
        let sol = solve_checked(&m, n, &rhs)?;
        let mut values = Vec::with_capacity(n);
        let mut fluxes = Vec::with_capacity(n);
        for c in 0..n {
            let col = |r: usize| sol.x[r * n + c];
            fluxes.push(FormValue::Vector(Point::new(col(0), col(1), col(2))));
            values.push(FormValue::Vector(Point::new(col(3), col(4), col(5))));
        }
        Ok(finish(Space::Curl, cell, x, values, fluxes, &sol))
    }

    fn solve_div(&self, cell: &CellGeometry, beta: &Point, x: &Point) -> Result<PointBasisEval, ExpFitError> {
        let d = cell.dim();
        let n = d + 1;
        let o = cell.orientation();
        let (_, s) = self.geometry(cell, beta, x);
        // unknowns: (j, phi_1..phi_d); row j integrates over the cell with
        // vertex j replaced by x
        let mut m = vec![0.0; n * n];
        let mut rhs = vec![0.0; n * n];
        for jv in 0..n {
            let mut sub = [Point::zeros(); 4];
            sub[..n].copy_from_slice(cell.vertices());
            sub[jv] = *x;
            let others: Vec<usize> = (0..n).filter(|&v| v != jv).collect();
            let (volume, normal_sum) = if d == 2 {
                let e1 = sub[1] - sub[0];
                let e2 = sub[2] - sub[0];
                let vol = o * (e1.x * e2.y - e1.y * e2.x) / 2.0;
                let mut acc = Point::zeros();
                for &r in &others {
                    // the side (x, x_t) lies opposite x_r
                    let t = others.iter().copied().find(|&v| v != r).unwrap();
                    let (a, bb) = ((r + 1) % 3, (r + 2) % 3);
                    let e = sub[bb] - sub[a];
                    let normal = Point::new(e.y, -e.x, 0.0) * o;
                    acc += normal * self.kernel.b2(s[t], s[r], self.eps)?;
                }
                (vol, acc)
            } else {
                let vol = o * (sub[1] - sub[0]).cross(&(sub[2] - sub[0])).dot(&(sub[3] - sub[0])) / 6.0;
                let mut acc = Point::zeros();
                for &r in &others {
                    // the face (x, x_p, x_q) lies opposite x_r
                    let pq: Vec<usize> = others.iter().copied().filter(|&v| v != r).collect();
                    let [_, a, bb, c] = EVEN_PERMUTATIONS[r];
                    let normal = (sub[bb] - sub[a]).cross(&(sub[c] - sub[a])) * (0.5 * o);
                    acc += normal * self.kernel.b3(s[pq[0]], s[pq[1]], s[r], self.eps)?;
                }
                (vol, acc)
            };
            m[jv * n] = volume;
            for c in 0..d {
                m[jv * n + 1 + c] = -normal_sum[c];
            }
            let (p, q) = (others[0], others[1]);
            rhs[jv * n + jv] = if d == 2 {
                self.kernel.b2(s[q] - s[p], -s[p], self.eps)?
            } else {
                let r = others[2];
                self.kernel.b3(s[q] - s[p], s[r] - s[p], -s[p], self.eps)?
            };
        }
        let sol = solve_checked(&m, n, &rhs)?;
        let mut values = Vec::with_capacity(n);
        let mut fluxes = Vec::with_capacity(n);
        for c in 0..n {
            let mut phi = Point::zeros();
            for r in 0..d {
                phi[r] = sol.x[(r + 1) * n + c];
            }
            fluxes.push(FormValue::Scalar(sol.x[c]));
            values.push(FormValue::Vector(phi));
        }
        Ok(finish(Space::Div, cell, x, values, fluxes, &sol))
    }
}

/// For each `r`, an even permutation of `(0, 1, 2, 3)` starting with `r`;
/// on a positively oriented tetrahedron `(v_b - v_a) x (v_c - v_a) / 2` is
/// then the outward area normal of the face opposite `v_r`.
const EVEN_PERMUTATIONS: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 0, 1, 3], [3, 0, 2, 1]];

fn solve_checked(a: &[f64], n: usize, b: &[f64]) -> Result<dense::DenseSolution, ExpFitError> {
    let sol = dense::solve(a, n, b, n).map_err(|e| match e {
        DenseError::Singular => ExpFitError::Singular { min_pivot_ratio: 0.0 },
        DenseError::NonFinite => ExpFitError::NonFinite,
    })?;
    if sol.residual > RESIDUAL_TOLERANCE && sol.refined {
        return Err(ExpFitError::Singular { min_pivot_ratio: sol.min_pivot_ratio });
    }
    Ok(sol)
}

fn finish(
    space: Space,
    cell: &CellGeometry,
    x: &Point,
    values: Vec<FormValue>,
    fluxes: Vec<FormValue>,
    sol: &dense::DenseSolution,
) -> PointBasisEval {
    let dim = cell.dim();
    // sign making the determinant positive for beta = 0 on either orientation
    let convention = match (space, dim) {
        (Space::Grad, 2) | (Space::Div, 2) | (Space::L2, _) => 1.0,
        _ => -1.0,
    };
    let orientation_power = if space == Space::L2 { 1.0 } else { cell.orientation() };
    PointBasisEval {
        space,
        x: *x,
        values,
        fluxes,
        diagnostics: SolveDiagnostics {
            det_sign: sol.det_sign * convention * orientation_power,
            log_abs_det: sol.log_abs_det,
            min_pivot_ratio: sol.min_pivot_ratio,
            refined: sol.refined,
            residual: sol.residual,
        },
    }
}
