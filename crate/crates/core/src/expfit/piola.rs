//! Evaluation through the reference simplex.
//!
//! With `F(y) = x_0 + B y` and `beta_ref = B^T beta`, the local systems on the
//! physical and reference cells have identical Bernoulli arguments, so the
//! physical basis is the Piola transform of the reference one.

use nalgebra::Matrix3;

use crate::elements::{FormValue, Space};
use crate::mesh::{CellGeometry, Point};

use super::{ExpFitError, LocalFit, PointBasisEval};

/// The unit simplex with vertices at the origin and the coordinate vectors.
pub fn reference_cell(dim: usize) -> CellGeometry {
    let mut v = vec![Point::zeros()];
    for i in 0..dim {
        let mut e = Point::zeros();
        e[i] = 1.0;
        v.push(e);
    }
    CellGeometry::new(dim, &v).expect("reference simplex is valid")
}

/// Local basis at `x` computed on the reference cell and mapped back.
pub fn solve_via_reference(
    fit: &LocalFit<'_>,
    space: Space,
    cell: &CellGeometry,
    beta: &Point,
    x: &Point,
) -> Result<PointBasisEval, ExpFitError> {
    let dim = cell.dim();
    let mut b = Matrix3::identity();
    for c in 0..dim {
        b.set_column(c, &(cell.vertex(c + 1) - cell.vertex(0)));
    }
    let det = b.determinant();
    if space == Space::Div && det < 0.0 {
        return Err(ExpFitError::OrientationReversing);
    }
    let inv = b.try_inverse().ok_or(ExpFitError::NonFinite)?;
    let x_ref = inv * (x - cell.vertex(0));
    let beta_ref = b.transpose() * beta;
    let reference = reference_cell(dim);
    let mut eval = fit.solve(space, &reference, &beta_ref, &x_ref)?;
    let inv_t = inv.transpose();
    let map = |v: FormValue, m: &Matrix3<f64>, s: f64| match v {
        FormValue::Scalar(a) => FormValue::Scalar(a * s),
        FormValue::Vector(u) => FormValue::Vector(m * u * s),
    };
    let id = Matrix3::identity();
    let (value_map, value_scale, flux_map, flux_scale) = match space {
        Space::Grad => (id, 1.0, inv_t, 1.0),
        Space::Curl => (inv_t, 1.0, b, 1.0 / det),
        Space::Div => (b, 1.0 / det, id, 1.0 / det),
        Space::L2 => (id, 1.0 / det.abs(), id, 1.0),
    };
    for v in eval.values.iter_mut() {
        *v = map(*v, &value_map, value_scale);
    }
    for j in eval.fluxes.iter_mut() {
        *j = map(*j, &flux_map, flux_scale);
    }
    eval.x = *x;
    Ok(eval)
}
