//! Lowest-order Whitney elements: P1 Lagrange, first-kind Nedelec edge
//! elements, Raviart-Thomas face elements and piecewise constants.
//!
//! Local numbering: vertex DOFs follow the cell vertices, edge DOFs follow
//! [`local_edges`] with tangent from the lower to the higher local vertex, and
//! facet DOFs are indexed by the opposite vertex with outward normals.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::mesh::{local_edges, CellGeometry, Point};
use crate::quadrature::SimplexRule;

/// Which Sobolev space a family of forms conforms to.
///
/// The numeric index (0 to 3) is used on the command line and in the
/// manufactured-case tables; in 2D only `Grad`, `Div` and `L2` exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Grad,
    Curl,
    Div,
    L2,
}

impl Space {
    pub fn index(self) -> usize {
        match self {
            Space::Grad => 0,
            Space::Curl => 1,
            Space::Div => 2,
            Space::L2 => 3,
        }
    }

    pub fn from_index(k: usize) -> Option<Space> {
        [Space::Grad, Space::Curl, Space::Div, Space::L2].get(k).copied()
    }

    pub fn exists_in(self, dim: usize) -> bool {
        dim == 3 || self != Space::Curl
    }

    /// Number of local DOFs on a cell of dimension `dim`.
    pub fn local_dofs(self, dim: usize) -> usize {
        match self {
            Space::Grad | Space::Div => dim + 1,
            Space::Curl => local_edges(dim).len(),
            Space::L2 => 1,
        }
    }

    /// Space that the exterior derivative maps into.
    pub fn derivative_space(self, dim: usize) -> Option<Space> {
        match self {
            Space::Grad if dim == 3 => Some(Space::Curl),
            Space::Curl if dim == 3 => Some(Space::Div),
            Space::Div => Some(Space::L2),
            _ => None,
        }
    }

    /// Whether values are scalars (`Grad`, `L2`) or vectors.
    pub fn is_scalar(self) -> bool {
        matches!(self, Space::Grad | Space::L2)
    }

    /// Whether the flux (the derivative side) is scalar-valued.
    pub fn flux_is_scalar(self) -> bool {
        matches!(self, Space::Div | Space::L2)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Space::Grad => "H(grad)",
            Space::Curl => "H(curl)",
            Space::Div => "H(div)",
            Space::L2 => "L2",
        };
        f.write_str(s)
    }
}

/// A scalar or vector value of a differential form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormValue {
    Scalar(f64),
    Vector(Point),
}

impl FormValue {
    pub fn zero(scalar: bool) -> FormValue {
        if scalar {
            FormValue::Scalar(0.0)
        } else {
            FormValue::Vector(Point::zeros())
        }
    }

    pub fn scalar(self) -> f64 {
        match self {
            FormValue::Scalar(s) => s,
            FormValue::Vector(_) => panic!("expected a scalar form value"),
        }
    }

    pub fn vector(self) -> Point {
        match self {
            FormValue::Vector(v) => v,
            FormValue::Scalar(_) => panic!("expected a vector form value"),
        }
    }

    pub fn dot(self, other: FormValue) -> f64 {
        match (self, other) {
            (FormValue::Scalar(a), FormValue::Scalar(b)) => a * b,
            (FormValue::Vector(a), FormValue::Vector(b)) => a.dot(&b),
            _ => panic!("mismatched form values"),
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(self) -> f64 {
        match self {
            FormValue::Scalar(a) => a.abs(),
            FormValue::Vector(v) => v.amax(),
        }
    }

    pub fn is_finite(self) -> bool {
        match self {
            FormValue::Scalar(a) => a.is_finite(),
            FormValue::Vector(v) => v.iter().all(|c| c.is_finite()),
        }
    }
}

impl Add for FormValue {
    type Output = FormValue;
    fn add(self, rhs: FormValue) -> FormValue {
        match (self, rhs) {
            (FormValue::Scalar(a), FormValue::Scalar(b)) => FormValue::Scalar(a + b),
            (FormValue::Vector(a), FormValue::Vector(b)) => FormValue::Vector(a + b),
            _ => panic!("mismatched form values"),
        }
    }
}

impl AddAssign for FormValue {
    fn add_assign(&mut self, rhs: FormValue) {
        *self = *self + rhs;
    }
}

impl Sub for FormValue {
    type Output = FormValue;
    fn sub(self, rhs: FormValue) -> FormValue {
        self + (-rhs)
    }
}

impl Neg for FormValue {
    type Output = FormValue;
    fn neg(self) -> FormValue {
        self * -1.0
    }
}

impl Mul<f64> for FormValue {
    type Output = FormValue;
    fn mul(self, s: f64) -> FormValue {
        match self {
            FormValue::Scalar(a) => FormValue::Scalar(a * s),
            FormValue::Vector(v) => FormValue::Vector(v * s),
        }
    }
}

/// Whitney basis functions of `space` at `x`.
pub fn whitney_basis(space: Space, cell: &CellGeometry, x: &Point) -> Vec<FormValue> {
    let dim = cell.dim();
    let lambda = cell.barycentric(x);
    match space {
        Space::Grad => lambda[..=dim].iter().map(|&l| FormValue::Scalar(l)).collect(),
        Space::Curl => local_edges(dim)
            .iter()
            .map(|&[i, j]| {
                FormValue::Vector(
                    cell.grad_lambda(j) * lambda[i] - cell.grad_lambda(i) * lambda[j],
                )
            })
            .collect(),
        Space::Div => {
            let scale = 1.0 / (dim as f64 * cell.volume());
            (0..=dim).map(|i| FormValue::Vector((x - cell.vertex(i)) * scale)).collect()
        }
        Space::L2 => vec![FormValue::Scalar(1.0 / cell.volume())],
    }
}

/// Exterior derivatives (gradient, curl, divergence) of the Whitney basis;
/// they are constant on the cell.  `L2` has no derivative and yields zeros.
pub fn whitney_derivative(space: Space, cell: &CellGeometry) -> Vec<FormValue> {
    let dim = cell.dim();
    match space {
        Space::Grad => (0..=dim).map(|i| FormValue::Vector(cell.grad_lambda(i))).collect(),
        Space::Curl => local_edges(dim)
            .iter()
            .map(|&[i, j]| FormValue::Vector(cell.grad_lambda(i).cross(&cell.grad_lambda(j)) * 2.0))
            .collect(),
        Space::Div => vec![FormValue::Scalar(1.0 / cell.volume()); dim + 1],
        Space::L2 => vec![FormValue::Scalar(0.0)],
    }
}

/// Average of `f` over the simplex spanned by `points`.
pub fn simplex_average<F>(points: &[Point], rule: &SimplexRule, f: F) -> FormValue
where
    F: Fn(&Point) -> FormValue,
{
    debug_assert_eq!(rule.dim + 1, points.len());
    let mut acc: Option<FormValue> = None;
    for q in 0..rule.len() {
        let y: Point = points.iter().zip(rule.point(q)).map(|(p, l)| p * *l).sum();
        let v = f(&y) * rule.weights[q];
        acc = Some(match acc {
            Some(a) => a + v,
            None => v,
        });
    }
    acc.expect("empty quadrature rule")
}

/// Canonical DOFs of `w`: vertex values, edge tangential integrals, facet
/// normal fluxes or the cell integral.
pub fn canonical_dofs<F>(space: Space, cell: &CellGeometry, w: F, degree: usize) -> Vec<f64>
where
    F: Fn(&Point) -> FormValue,
{
    let dim = cell.dim();
    let rule = |d: usize| {
        if degree <= 2 {
            SimplexRule::degree2(d)
        } else if degree <= 4 {
            SimplexRule::degree4(d)
        } else {
            SimplexRule::gauss_duffy(d, degree.div_ceil(2) + 1, 1)
        }
    };
    match space {
        Space::Grad => (0..=dim).map(|i| w(&cell.vertex(i)).scalar()).collect(),
        Space::Curl => {
            let r = rule(1);
            local_edges(dim)
                .iter()
                .map(|&[i, j]| {
                    let t = cell.edge_vector(i, j);
                    simplex_average(&[cell.vertex(i), cell.vertex(j)], &r, |y| {
                        FormValue::Scalar(w(y).vector().dot(&t))
                    })
                    .scalar()
                })
                .collect()
        }
        Space::Div => {
            let r = rule(dim - 1);
            (0..=dim)
                .map(|i| {
                    let n = cell.facet_area_normal(i);
                    let pts: Vec<Point> =
                        cell.facet_vertices(i).iter().map(|&v| cell.vertex(v)).collect();
                    simplex_average(&pts, &r, |y| FormValue::Scalar(w(y).vector().dot(&n)))
                        .scalar()
                })
                .collect()
        }
        Space::L2 => {
            let r = rule(dim);
            let mean = simplex_average(cell.vertices(), &r, |y| FormValue::Scalar(w(y).scalar())).scalar();
            vec![mean * cell.volume()]
        }
    }
}
