use super::*;
use crate::mesh::{unit_cube, unit_square, Point};

#[test]
fn dof_counts_and_boundary() {
    let m = unit_square(4).unwrap();
    let d = DofMap::new(&m, Space::Grad).unwrap();
    assert_eq!(d.n_global(), 25);
    assert_eq!(d.n_boundary(), 16);
    let d = DofMap::new(&m, Space::Div).unwrap();
    assert_eq!(d.n_global(), m.n_edges());
    assert_eq!(d.n_boundary(), 16);
    assert!(DofMap::new(&m, Space::Curl).is_err());

    let m = unit_cube(2).unwrap();
    let d = DofMap::new(&m, Space::Curl).unwrap();
    assert_eq!(d.n_global(), m.n_edges());
    assert_eq!(d.n_local(), 6);
}

fn constant_solution(mesh: &SimplicialMesh, space: Space, value: FormValue, beta: Point, method: SolveMethod) {
    let dim = mesh.dim();
    let beta = if dim == 2 { Point::new(beta.x, beta.y, 0.0) } else { beta };
    let config = ProblemConfig::new(space, 0.05)
        .with_constant_beta(beta)
        .with_gamma(|_| 1.0)
        .with_load(move |_| value)
        .with_boundary(move |_| value);
    let (dofmap, x, report) = solve_problem(mesh, &config, method).unwrap();
    // GMRES stops at a relative residual of 1e-12, not at machine precision
    let tol = if report.direct { 1e-9 } else { 1e-7 };
    assert!(report.relative_residual < 1e-10);
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell_geometry(c);
        let local = dofmap.local_values(c, &x);
        let eval = config.solve_at(&cell, &cell.barycenter()).unwrap();
        let (u, _) = eval.combine(&local);
        assert!((u - value).max_abs() < tol, "{space} cell {c}: {u:?}");
    }
}

#[test]
fn reproduces_constants() {
    let beta = Point::new(3.0, -2.0, 1.0);
    let sq = unit_square(5).unwrap();
    let cube = unit_cube(2).unwrap();
    constant_solution(&sq, Space::Grad, FormValue::Scalar(1.5), beta, SolveMethod::Direct);
    constant_solution(&sq, Space::Div, FormValue::Vector(Point::new(0.5, -1.0, 0.0)), beta, SolveMethod::Direct);
    constant_solution(&cube, Space::Grad, FormValue::Scalar(-2.0), beta, SolveMethod::Auto);
    constant_solution(&cube, Space::Curl, FormValue::Vector(Point::new(0.3, 0.7, -0.2)), beta, SolveMethod::Direct);
    constant_solution(&cube, Space::Div, FormValue::Vector(Point::new(1.0, 0.2, 0.4)), beta, SolveMethod::Iterative(GmresSettings::default()));
}

#[test]
fn direct_and_gmres_agree_on_assembled_system() {
    let m = unit_square(6).unwrap();
    let config = ProblemConfig::new(Space::Grad, 0.01)
        .with_beta(|x| Point::new(-x.y, x.x, 0.0))
        .with_load(|x| FormValue::Scalar(x.x * x.y));
    let (_, a, _) = solve_problem(&m, &config, SolveMethod::Direct).unwrap();
    let (_, b, r) = solve_problem(&m, &config, SolveMethod::Iterative(GmresSettings::default())).unwrap();
    assert!(!r.direct);
    let diff = a.iter().zip(&b).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn assembly_is_deterministic() {
    let m = unit_cube(2).unwrap();
    let config = ProblemConfig::new(Space::Curl, 0.1)
        .with_beta(|x| Point::new(x.y, x.z, x.x))
        .with_load(|x| FormValue::Vector(Point::new(x.z.sin(), x.x.sin(), x.y.sin())));
    let d = DofMap::new(&m, Space::Curl).unwrap();
    let a = assemble(&m, &config, &d, &AssemblyQuadrature::default()).unwrap();
    let b = assemble(&m, &config, &d, &AssemblyQuadrature::default()).unwrap();
    assert_eq!(a.matrix.values, b.matrix.values);
    assert_eq!(a.rhs, b.rhs);
}

#[test]
fn rejects_space_mismatch() {
    let m = unit_square(2).unwrap();
    let d = DofMap::new(&m, Space::Grad).unwrap();
    let config = ProblemConfig::new(Space::Div, 1.0);
    assert!(matches!(
        assemble(&m, &config, &d, &AssemblyQuadrature::default()),
        Err(SolverError::SpaceMismatch { .. })
    ));
    let sys = assemble(&m, &ProblemConfig::new(Space::Grad, 1.0), &d, &AssemblyQuadrature::default()).unwrap();
    assert!(matches!(apply_dirichlet(&sys, &d, &[0.0]), Err(SolverError::BoundaryLength { .. })));
}

#[test]
fn single_interior_dof_and_empty_system() {
    let a = CsrMatrix::from_triplets(1, 1, &[(0, 0, 4.0)]);
    let (x, _) = solve_linear(&a, &[2.0], SolveMethod::Direct).unwrap();
    assert_eq!(x, vec![0.5]);
    let m = unit_square(1).unwrap();
    let config = ProblemConfig::new(Space::Grad, 1.0);
    assert!(matches!(solve_problem(&m, &config, SolveMethod::Auto), Err(SolverError::NoFreeDofs)));
}

#[test]
fn zero_convection_matches_p1_galerkin() {
    // stiffness + mass on a unit right triangle, assembled by hand
    let m = unit_square(2).unwrap();
    let config = ProblemConfig::new(Space::Grad, 1.0).with_gamma(|_| 1.0);
    let d = DofMap::new(&m, Space::Grad).unwrap();
    let sys = assemble(&m, &config, &d, &AssemblyQuadrature::default()).unwrap();
    let mut triplets = Vec::new();
    for c in 0..m.n_cells() {
        let cell = m.cell_geometry(c);
        let vol = cell.volume();
        for (r, &vr) in m.cell(c).iter().enumerate() {
            for (s, &vs) in m.cell(c).iter().enumerate() {
                let mass = vol * if r == s { 1.0 / 6.0 } else { 1.0 / 12.0 };
                triplets.push((vr, vs, vol * cell.grad_lambda(r).dot(&cell.grad_lambda(s)) + mass));
            }
        }
    }
    let reference = CsrMatrix::from_triplets(m.n_vertices(), m.n_vertices(), &triplets);
    for r in 0..m.n_vertices() {
        for c in 0..m.n_vertices() {
            assert!((sys.matrix.get(r, c) - reference.get(r, c)).abs() < 1e-10);
        }
    }
}
