//! Samples of the local basis and fluxes on the reference cell, as CSV.

use std::fmt::Write as _;

use crate::elements::{FormValue, Space};
use crate::expfit::{reference_cell, ExpFitError, LocalFit};
use crate::bernoulli::StableBernoulli;
use crate::mesh::Point;

fn components(v: FormValue) -> [f64; 3] {
    match v {
        FormValue::Scalar(s) => [s, 0.0, 0.0],
        FormValue::Vector(p) => [p.x, p.y, p.z],
    }
}

/// Lattice points `i / n` of the reference cell, including its boundary.
pub fn reference_lattice(dim: usize, n: usize) -> Vec<Point> {
    let mut pts = Vec::new();
    let kmax = if dim == 3 { n } else { 0 };
    for k in 0..=kmax {
        for j in 0..=n - k {
            for i in 0..=n - k - j {
                pts.push(Point::new(i as f64, j as f64, k as f64) / n as f64);
            }
        }
    }
    pts
}

/// One row per (point, basis function):
/// `x,y,z,basis,value_x,value_y,value_z,flux_x,flux_y,flux_z`; scalars are
/// stored in the first component.
pub fn basis_dump(space: Space, dim: usize, eps: f64, beta: Point, n: usize) -> Result<String, ExpFitError> {
    let cell = reference_cell(dim);
    let fit = LocalFit { eps, kernel: &StableBernoulli };
    let mut out = String::from("x,y,z,basis,value_x,value_y,value_z,flux_x,flux_y,flux_z\n");
    for x in reference_lattice(dim, n) {
        let e = fit.solve(space, &cell, &beta, &x)?;
        for (s, (v, j)) in e.values.iter().zip(&e.fluxes).enumerate() {
            let v = components(*v);
            let j = components(*j);
            let _ = writeln!(out, "{},{},{},{s},{},{},{},{},{},{}", x.x, x.y, x.z, v[0], v[1], v[2], j[0], j[1], j[2]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_sizes() {
        assert_eq!(reference_lattice(2, 4).len(), 15);
        assert_eq!(reference_lattice(3, 2).len(), 10);
    }

    #[test]
    fn dump_has_row_per_point_and_basis() {
        let csv = basis_dump(Space::Curl, 3, 0.1, Point::new(1.0, 2.0, 3.0), 2).unwrap();
        assert_eq!(csv.lines().count(), 1 + 10 * 6);
    }
}
