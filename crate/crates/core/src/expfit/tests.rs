use super::*;
use crate::elements::{whitney_basis, whitney_derivative};
use crate::mesh::local_edges;

fn tet(flip: bool) -> CellGeometry {
    let mut v = vec![
        Point::new(0.3, 0.1, 0.0),
        Point::new(1.2, 0.2, 0.1),
        Point::new(0.1, 1.0, 0.2),
        Point::new(0.4, 0.5, 0.9),
    ];
    if flip {
        v.swap(2, 3);
    }
    CellGeometry::new(3, &v).unwrap()
}

fn tri(flip: bool) -> CellGeometry {
    let mut v = vec![Point::new(0.1, 0.2, 0.0), Point::new(1.3, 0.4, 0.0), Point::new(0.5, 1.1, 0.0)];
    if flip {
        v.swap(1, 2);
    }
    CellGeometry::new(2, &v).unwrap()
}

fn cells() -> Vec<CellGeometry> {
    vec![tri(false), tri(true), tet(false), tet(true)]
}

fn spaces(dim: usize) -> Vec<Space> {
    [Space::Grad, Space::Curl, Space::Div].into_iter().filter(|s| s.exists_in(dim)).collect()
}

fn interior_points(cell: &CellGeometry) -> Vec<Point> {
    let bary: &[&[f64]] = &[
        &[0.25, 0.25, 0.25, 0.25],
        &[0.7, 0.1, 0.1, 0.1],
        &[0.05, 0.15, 0.3, 0.5],
        &[0.2, 0.6, 0.2, 0.0],
    ];
    bary.iter()
        .map(|b| {
            let mut l = b[..=cell.dim()].to_vec();
            let s: f64 = l.iter().sum();
            l.iter_mut().for_each(|v| *v /= s);
            cell.point_from_barycentric(&l)
        })
        .collect()
}

fn diff(a: FormValue, b: FormValue) -> f64 {
    (a - b).max_abs()
}

#[test]
fn zero_convection_gives_whitney_forms() {
    let fit = LocalFit { eps: 0.37, kernel: &StableBernoulli };
    for cell in cells() {
        for space in spaces(cell.dim()) {
            let dw = whitney_derivative(space, &cell);
            for x in interior_points(&cell) {
                let e = fit.solve(space, &cell, &Point::zeros(), &x).unwrap();
                let w = whitney_basis(space, &cell, &x);
                for s in 0..w.len() {
                    assert!(diff(e.values[s], w[s]) < 1e-12, "{space} value {s}");
                    assert!(diff(e.fluxes[s], dw[s] * 0.37) < 1e-12, "{space} flux {s}");
                }
                assert_eq!(e.diagnostics.det_sign, 1.0);
            }
        }
    }
}

fn betas() -> Vec<Point> {
    vec![
        Point::new(3.0, -1.0, 0.5),
        Point::new(-40.0, 25.0, 10.0),
        Point::new(0.01, 0.02, -0.03),
        Point::new(900.0, -300.0, 700.0),
    ]
}

#[test]
fn determinant_stays_positive() {
    for eps in [1.0, 1e-2, 1e-6] {
        let fit = LocalFit { eps, kernel: &StableBernoulli };
        for cell in cells() {
            for space in spaces(cell.dim()) {
                for beta in betas() {
                    let beta = if cell.dim() == 2 { Point::new(beta.x, beta.y, 0.0) } else { beta };
                    for x in interior_points(&cell) {
                        let e = fit.solve(space, &cell, &beta, &x).unwrap();
                        assert_eq!(e.diagnostics.det_sign, 1.0, "{space} eps {eps} beta {beta:?}");
                    }
                }
            }
        }
    }
}

/// Points on the sub-simplex with the given local vertices.
fn points_on(cell: &CellGeometry, verts: &[usize]) -> Vec<Point> {
    let weights: &[&[f64]] = &[&[0.5, 0.5, 0.5], &[0.9, 0.1, 0.3], &[0.2, 0.7, 0.1], &[0.05, 0.3, 0.65]];
    weights
        .iter()
        .map(|w| {
            let w = &w[..verts.len()];
            let s: f64 = w.iter().sum();
            verts.iter().zip(w).map(|(&v, &c)| cell.vertex(v) * (c / s)).sum()
        })
        .collect()
}

#[test]
fn dofs_are_kronecker_pointwise() {
    for eps in [1.0, 1e-2] {
        let fit = LocalFit { eps, kernel: &StableBernoulli };
        for cell in cells() {
            for beta in betas().into_iter().take(3) {
                let beta = if cell.dim() == 2 { Point::new(beta.x, beta.y, 0.0) } else { beta };
                // vertex values
                for i in 0..=cell.dim() {
                    let e = fit.solve(Space::Grad, &cell, &beta, &cell.vertex(i)).unwrap();
                    for s in 0..=cell.dim() {
                        let want = if s == i { 1.0 } else { 0.0 };
                        assert!((e.values[s].scalar() - want).abs() < 1e-12);
                    }
                }
                // tangential traces on edges
                if cell.dim() == 3 {
                    for (r, &[a, b]) in local_edges(3).iter().enumerate() {
                        let t = cell.edge_vector(a, b);
                        for y in points_on(&cell, &[a, b]) {
                            let e = fit.solve(Space::Curl, &cell, &beta, &y).unwrap();
                            for s in 0..6 {
                                let want = if s == r { 1.0 } else { 0.0 };
                                let got = e.values[s].vector().dot(&t);
                                assert!((got - want).abs() < 1e-10, "edge {r} basis {s}: {got}");
                            }
                        }
                    }
                }
                // normal traces on facets
                for f in 0..=cell.dim() {
                    let n = cell.facet_area_normal(f);
                    for y in points_on(&cell, &cell.facet_vertices(f)) {
                        let e = fit.solve(Space::Div, &cell, &beta, &y).unwrap();
                        for s in 0..=cell.dim() {
                            let want = if s == f { 1.0 } else { 0.0 };
                            let got = e.values[s].vector().dot(&n);
                            assert!((got - want).abs() < 1e-10, "facet {f} basis {s}: {got}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn reference_evaluation_matches_direct() {
    let fit = LocalFit { eps: 0.05, kernel: &StableBernoulli };
    for cell in cells() {
        for space in spaces(cell.dim()) {
            for beta in betas().into_iter().take(3) {
                let beta = if cell.dim() == 2 { Point::new(beta.x, beta.y, 0.0) } else { beta };
                for x in interior_points(&cell) {
                    let direct = fit.solve(space, &cell, &beta, &x).unwrap();
                    match solve_via_reference(&fit, space, &cell, &beta, &x) {
                        Ok(mapped) => {
                            for s in 0..direct.values.len() {
                                let scale = 1.0 + direct.values[s].max_abs();
                                assert!(diff(direct.values[s], mapped.values[s]) < 1e-10 * scale);
                                let scale = 1.0 + direct.fluxes[s].max_abs();
                                assert!(diff(direct.fluxes[s], mapped.fluxes[s]) < 1e-10 * scale);
                            }
                        }
                        Err(ExpFitError::OrientationReversing) => {
                            assert!(space == Space::Div && cell.orientation() < 0.0)
                        }
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }
}

#[test]
fn scaling_eps_and_beta_scales_flux_only() {
    let cell = tet(false);
    let beta = Point::new(2.0, -1.0, 0.5);
    let x = cell.barycenter();
    for space in spaces(3) {
        let a = LocalFit { eps: 0.1, kernel: &StableBernoulli }.solve(space, &cell, &beta, &x).unwrap();
        let b = LocalFit { eps: 0.3, kernel: &StableBernoulli }.solve(space, &cell, &(beta * 3.0), &x).unwrap();
        for s in 0..a.values.len() {
            assert!(diff(a.values[s], b.values[s]) < 1e-12);
            assert!(diff(a.fluxes[s] * 3.0, b.fluxes[s]) < 1e-11);
        }
    }
}

#[test]
fn rejects_invalid_input() {
    let fit = LocalFit { eps: 0.0, kernel: &StableBernoulli };
    let cell = tri(false);
    assert!(matches!(
        fit.solve(Space::Grad, &cell, &Point::zeros(), &cell.barycenter()),
        Err(ExpFitError::InvalidEpsilon(_))
    ));
    let fit = LocalFit { eps: 1.0, kernel: &StableBernoulli };
    assert!(matches!(
        fit.solve(Space::Curl, &cell, &Point::zeros(), &cell.barycenter()),
        Err(ExpFitError::UnsupportedSpace { .. })
    ));
    assert!(fit.solve(Space::Grad, &cell, &Point::new(f64::NAN, 0.0, 0.0), &cell.barycenter()).is_err());
}

#[test]
fn constant_theta_weighted_average_of_one_is_one() {
    let cell = tet(false);
    let theta = Point::new(7.0, -3.0, 2.0);
    let q = WeightedQuadrature::default();
    for pts in [cell.vertices().to_vec(), cell.vertices()[..3].to_vec(), cell.vertices()[..2].to_vec()] {
        let a = weighted_average(&pts, &theta, |_| FormValue::Scalar(1.0), &q).scalar();
        assert!((a - 1.0).abs() < 1e-9, "{a}");
    }
}
