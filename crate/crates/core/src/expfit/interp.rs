//! Weighted interpolation: DOFs computed against the fitting weight
//! `exp(theta . y)`, normalized by the mean of the weight on each
//! sub-simplex.  For variable `theta` the exponent gradient is frozen at the
//! barycenter of the sub-simplex.

use crate::bernoulli::simplex_exp_average_scaled;
use crate::elements::{FormValue, Space};
use crate::mesh::{local_edges, CellGeometry, Point};
use crate::quadrature::{exponential_gauss, SimplexRule};

/// Quadrature settings for weighted averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightedQuadrature {
    /// Points of the exponential rule on edges.
    pub edge_points: usize,
    /// Gauss points per collapsed direction on facets and cells.
    pub simplex_points: usize,
    /// Largest number of subintervals per collapsed direction; the actual
    /// count grows with the variation of the weight across the simplex.
    pub max_refine: usize,
}

impl Default for WeightedQuadrature {
    fn default() -> Self {
        WeightedQuadrature { edge_points: 8, simplex_points: 6, max_refine: 8 }
    }
}

impl WeightedQuadrature {
    /// Settings for reference computations in tests.
    pub fn accurate() -> Self {
        WeightedQuadrature { edge_points: 12, simplex_points: 10, max_refine: 16 }
    }
}

/// Average of `g` over the simplex spanned by `points` against the
/// probability density proportional to `exp(theta . y)`.
pub fn weighted_average<F>(points: &[Point], theta: &Point, g: F, quad: &WeightedQuadrature) -> FormValue
where
    F: Fn(&Point) -> FormValue,
{
    let p0 = points[0];
    match points.len() {
        1 => g(&p0),
        2 => {
            let e = points[1] - p0;
            let (t, w) = exponential_gauss(theta.dot(&e), quad.edge_points);
            let mut acc = g(&(p0 + e * t[0])) * w[0];
            for q in 1..t.len() {
                acc += g(&(p0 + e * t[q])) * w[q];
            }
            acc
        }
        n => {
            let args: Vec<f64> = points[1..].iter().map(|p| theta.dot(&(p - p0))).collect();
            let spread = args.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let refine = (spread.ceil() as usize).clamp(1, quad.max_refine.max(1));
            let rule = SimplexRule::gauss_duffy(n - 1, quad.simplex_points, refine);
            let mass = simplex_exp_average_scaled(&args).expect("finite exponents");
            let mut acc: Option<FormValue> = None;
            for q in 0..rule.len() {
                let lam = rule.point(q);
                let y: Point = points.iter().zip(lam).map(|(p, l)| p * *l).sum();
                let expo: f64 = args.iter().zip(&lam[1..]).map(|(a, l)| a * l).sum();
                let weight = rule.weights[q] * (expo - mass.shift).exp() / mass.mantissa;
                let v = g(&y) * weight;
                acc = Some(match acc {
                    Some(a) => a + v,
                    None => v,
                });
            }
            acc.expect("non-empty rule")
        }
    }
}

/// DOFs of the weighted interpolant of `w` on `cell` for exponent gradient
/// `theta`.
pub fn weighted_dofs<T, F>(space: Space, cell: &CellGeometry, theta: T, w: F, quad: &WeightedQuadrature) -> Vec<f64>
where
    T: Fn(&Point) -> Point,
    F: Fn(&Point) -> FormValue,
{
    let dim = cell.dim();
    let bary = |pts: &[Point]| pts.iter().sum::<Point>() / pts.len() as f64;
    match space {
        Space::Grad => (0..=dim).map(|i| w(&cell.vertex(i)).scalar()).collect(),
        Space::Curl => local_edges(dim)
            .iter()
            .map(|&[i, j]| {
                let pts = [cell.vertex(i), cell.vertex(j)];
                let t = pts[1] - pts[0];
                let th = theta(&bary(&pts));
                weighted_average(&pts, &th, |y| FormValue::Scalar(w(y).vector().dot(&t)), quad).scalar()
            })
            .collect(),
        Space::Div => (0..=dim)
            .map(|i| {
                let pts: Vec<Point> = cell.facet_vertices(i).iter().map(|&v| cell.vertex(v)).collect();
                let n = cell.facet_area_normal(i);
                let th = theta(&bary(&pts));
                weighted_average(&pts, &th, |y| FormValue::Scalar(w(y).vector().dot(&n)), quad).scalar()
            })
            .collect(),
        Space::L2 => {
            let th = theta(&cell.barycenter());
            vec![cell.volume() * weighted_average(cell.vertices(), &th, |y| w(y), quad).scalar()]
        }
    }
}
