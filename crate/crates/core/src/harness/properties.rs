//! Randomized checks of the structural identities of the fitted spaces.
//!
//! Every check draws its own sample from a generator seeded with
//! `settings.seed` and the check index, so one failing check can be rerun in
//! isolation.  Errors are relative: a computed combination of basis values
//! or fluxes is compared against `sum |dof| * max |part|`, a trace against
//! `max(1, |value|)`.  For sums of
//! weighted DOFs the magnitude of a DOF is the weighted mean of the absolute
//! integrand, since a DOF whose integrand changes sign is only known to that
//! absolute accuracy.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bernoulli::{BernoulliError, BernoulliKernel, StableBernoulli};
use crate::elements::{whitney_basis, whitney_derivative, FormValue, Space};
use crate::expfit::{
    solve_via_reference, weighted_average, weighted_dofs, ExpFitError, LocalFit, PointBasisEval, ProblemConfig, WeightedQuadrature,
};
use crate::mesh::{local_edges, CellGeometry, Point, SimplicialMesh};
use crate::solver::DofMap;

use super::cases::coupling;
use super::oracle;
use super::polynomial::{Quadratic, VectorQuadratic};

#[derive(Clone)]
pub struct SuiteSettings {
    pub seed: u64,
    /// Random cells per dimension.
    pub cells: usize,
    /// Random convection fields per cell.
    pub betas: usize,
    pub eps_list: Vec<f64>,
    /// Random argument tuples per `eps` for the Bernoulli oracle.
    pub bernoulli_samples: usize,
    /// Random interior facets per dimension for the trace checks.
    pub facets: usize,
    pub kernel: Arc<dyn BernoulliKernel>,
}

impl SuiteSettings {
    pub fn full(seed: u64) -> SuiteSettings {
        SuiteSettings {
            seed,
            cells: 50,
            betas: 20,
            eps_list: vec![1.0, 1e-2, 1e-4],
            bernoulli_samples: 1000,
            facets: 200,
            kernel: Arc::new(StableBernoulli),
        }
    }

    pub fn quick(seed: u64) -> SuiteSettings {
        SuiteSettings { cells: 8, betas: 4, bernoulli_samples: 100, facets: 30, ..SuiteSettings::full(seed) }
    }

    pub fn with_kernel(mut self, kernel: Arc<dyn BernoulliKernel>) -> SuiteSettings {
        self.kernel = kernel;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    /// Description of the worst sample.
    pub worst: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyReport {
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.name).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(
                out,
                "{} {:<24} max {:.3e} tol {:.0e} samples {:>7} seed {} ({:.2}s){}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.max_error,
                r.tolerance,
                r.samples,
                r.seed,
                r.seconds,
                if r.passed { String::new() } else { format!("\n     worst: {}", r.worst) }
            );
        }
        out
    }
}

/// Worst error seen by one check.
struct Tracker {
    max_error: f64,
    samples: usize,
    worst: String,
}

impl Tracker {
    fn new() -> Tracker {
        Tracker { max_error: 0.0, samples: 0, worst: String::new() }
    }

    fn record(&mut self, err: f64, what: impl FnOnce() -> String) {
        self.samples += 1;
        // NaN counts as the worst possible error
        if !(err <= self.max_error) {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
            self.worst = what();
        }
    }

    fn fail(&mut self, what: String) {
        self.samples += 1;
        self.max_error = f64::INFINITY;
        self.worst = what;
    }

    fn finish(self, name: &'static str, tolerance: f64, seed: u64, start: Instant) -> PropertyResult {
        PropertyResult {
            name,
            passed: self.max_error <= tolerance && self.samples > 0,
            max_error: self.max_error,
            tolerance,
            samples: self.samples,
            seed,
            worst: self.worst,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// A cell with vertices in the unit cube and no very flat corner; either
/// orientation.
pub fn random_cell<R: Rng>(rng: &mut R, dim: usize) -> CellGeometry {
    loop {
        let v: Vec<Point> = (0..=dim)
            .map(|_| {
                let z = if dim == 3 { rng.random::<f64>() } else { 0.0 };
                Point::new(rng.random(), rng.random(), z)
            })
            .collect();
        if let Ok(cell) = CellGeometry::new(dim, &v) {
            let d = cell.diameter();
            let regular = if dim == 2 { d * d * 3f64.sqrt() / 4.0 } else { d * d * d / (6.0 * 2f64.sqrt()) };
            if cell.volume() > 0.1 * regular {
                return cell;
            }
        }
    }
}

/// A random point of the simplex spanned by `points`.
pub fn random_point_on<R: Rng>(rng: &mut R, points: &[Point]) -> Point {
    let w: Vec<f64> = points.iter().map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    points.iter().zip(&w).map(|(p, w)| p * (w / s)).sum()
}

fn random_vector<R: Rng>(rng: &mut R, dim: usize, max_norm: f64) -> Point {
    loop {
        let z = if dim == 3 { rng.random_range(-1.0..1.0) } else { 0.0 };
        let v = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), z);
        let n = v.norm();
        if n <= 1.0 && n > 1e-3 {
            return v * (max_norm * rng.random::<f64>());
        }
    }
}

/// Affine convection `b + M (x - c)` with `|beta| <= max_norm` on the cell.
#[derive(Debug, Clone, Copy)]
struct AffineField {
    base: Point,
    slope: nalgebra::Matrix3<f64>,
    center: Point,
}

impl AffineField {
    fn random<R: Rng>(rng: &mut R, cell: &CellGeometry, max_norm: f64) -> AffineField {
        let dim = cell.dim();
        let base = random_vector(rng, dim, 0.5 * max_norm);
        let mut slope = nalgebra::Matrix3::zeros();
        let scale = 0.5 * max_norm / (cell.diameter() * 3.0);
        for i in 0..dim {
            for j in 0..dim {
                slope[(i, j)] = scale * rng.random_range(-1.0..1.0);
            }
        }
        AffineField { base, slope, center: cell.barycenter() }
    }

    fn at(&self, x: &Point) -> Point {
        self.base + self.slope * (x - self.center)
    }
}

fn spaces(dim: usize) -> Vec<Space> {
    [Space::Grad, Space::Curl, Space::Div].into_iter().filter(|s| s.exists_in(dim)).collect()
}

fn rng_for(settings: &SuiteSettings, check: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(settings.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ check)
}

fn fit(settings: &SuiteSettings, eps: f64) -> LocalFit<'_> {
    LocalFit { eps, kernel: settings.kernel.as_ref() }
}

/// `|got - want|` over the magnitude of the terms that were summed.
fn sum_error(got: FormValue, want: FormValue, terms: f64) -> f64 {
    (got - want).norm() / terms.max(want.norm()).max(f64::MIN_POSITIVE)
}

/// Weighted DOFs of `|w . t|`, `|w . N|` or `|w|`: the size of the terms
/// summed inside each DOF, which bounds its rounding error.
fn dof_magnitudes<F>(space: Space, cell: &CellGeometry, theta: &Point, w: F, quad: &WeightedQuadrature) -> Vec<f64>
where
    F: Fn(&Point) -> FormValue,
{
    let dim = cell.dim();
    let abs_avg = |verts: &[usize], g: &dyn Fn(&Point) -> f64| {
        let pts: Vec<Point> = verts.iter().map(|&v| cell.vertex(v)).collect();
        weighted_average(&pts, theta, |y| FormValue::Scalar(g(y).abs()), quad).scalar()
    };
    match space {
        Space::Grad => (0..=dim).map(|i| w(&cell.vertex(i)).norm()).collect(),
        Space::Curl => local_edges(dim)
            .iter()
            .map(|&[a, b]| {
                let t = cell.edge_vector(a, b);
                abs_avg(&[a, b], &|y| w(y).vector().dot(&t))
            })
            .collect(),
        Space::Div => (0..=dim)
            .map(|f| {
                let n = cell.facet_area_normal(f);
                abs_avg(&cell.facet_vertices(f), &|y| w(y).vector().dot(&n))
            })
            .collect(),
        Space::L2 => vec![cell.volume() * abs_avg(&(0..=dim).collect::<Vec<_>>(), &|y| w(y).scalar())],
    }
}

/// Size of `sum_s dofs_s parts_s`.  The parts come out of one linear solve
/// and are accurate relative to the largest of them, not one by one.
fn combination_scale(dofs: &[f64], parts: &[FormValue]) -> f64 {
    let largest = parts.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    dofs.iter().map(|c| c.abs()).sum::<f64>() * largest
}

fn bernoulli_oracle(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 1);
    let mut t = Tracker::new();
    let k = settings.kernel.as_ref();
    for &eps in &settings.eps_list {
        for _ in 0..settings.bernoulli_samples {
            let s: [f64; 3] = std::array::from_fn(|_| rng.random_range(-50.0..50.0));
            let got = [k.b1(s[0], eps), k.b2(s[0], s[1], eps), k.b3(s[0], s[1], s[2], eps)];
            for (order, g) in got.iter().enumerate() {
                let want = oracle::bernoulli(&s[..=order], eps);
                match g {
                    // below the normal range only the floor is representable
                    Ok(g) if want < f64::MIN_POSITIVE => {
                        let err = if *g <= f64::MIN_POSITIVE { 0.0 } else { f64::INFINITY };
                        t.record(err, || format!("B{} {:?} eps {eps:e}: {g} vs underflow", order + 1, &s[..=order]))
                    }
                    Ok(g) => t.record((g - want).abs() / want, || format!("B{} {:?} eps {eps:e}: {g} vs {want}", order + 1, &s[..=order])),
                    Err(e) => t.fail(format!("B{} {:?} eps {eps:e}: {e}", order + 1, &s[..=order])),
                }
            }
        }
    }
    t.finish("bernoulli_oracle", 1e-9, settings.seed, start)
}

fn bernoulli_positivity(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 2);
    let mut t = Tracker::new();
    let k = settings.kernel.as_ref();
    for _ in 0..settings.bernoulli_samples * 3 {
        let eps = 10f64.powf(rng.random_range(-6.0..0.0));
        let s: [f64; 3] = std::array::from_fn(|_| eps * 1e6 * rng.random_range(-1.0..1.0));
        for r in [k.b1(s[0], eps), k.b2(s[0], s[1], eps), k.b3(s[0], s[1], s[2], eps)] {
            match r {
                Ok(v) if v > 0.0 && v.is_finite() => t.record(0.0, String::new),
                Ok(v) => t.fail(format!("{s:?} eps {eps:e}: {v}")),
                Err(e) => t.fail(format!("{s:?} eps {eps:e}: {e}")),
            }
        }
    }
    t.finish("bernoulli_positivity", 0.0, settings.seed, start)
}

/// Points on the sub-simplex with the given local vertices.
fn points_on<R: Rng>(rng: &mut R, cell: &CellGeometry, verts: &[usize], n: usize) -> Vec<Point> {
    let pts: Vec<Point> = verts.iter().map(|&v| cell.vertex(v)).collect();
    (0..n).map(|_| random_point_on(rng, &pts)).collect()
}

fn kronecker(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 3);
    let mut t = Tracker::new();
    for dim in [2, 3] {
        for ci in 0..settings.cells {
            let cell = random_cell(&mut rng, dim);
            for _ in 0..settings.betas.div_ceil(4) {
                let beta = AffineField::random(&mut rng, &cell, 100.0);
                for &eps in &settings.eps_list {
                    let f = fit(settings, eps);
                    let mut check = |space: Space, x: &Point, trace: &dyn Fn(FormValue) -> f64, row: usize| {
                        match f.solve(space, &cell, &beta.at(x), x) {
                            Ok(e) => {
                                for (s, v) in e.values.iter().enumerate() {
                                    let want = if s == row { 1.0 } else { 0.0 };
                                    let err = (trace(*v) - want).abs() / v.norm().max(1.0);
                                    t.record(err, || format!("{dim}D cell {ci} {space} dof {row} basis {s} eps {eps:e} x {x:?}"));
                                }
                            }
                            Err(e) => t.fail(format!("{dim}D cell {ci} {space} eps {eps:e}: {e}")),
                        }
                    };
                    for i in 0..=dim {
                        check(Space::Grad, &cell.vertex(i), &|v| v.scalar(), i);
                    }
                    if dim == 3 {
                        for (r, &[a, b]) in local_edges(3).iter().enumerate() {
                            let tangent = cell.edge_vector(a, b);
                            for y in points_on(&mut rng, &cell, &[a, b], 2) {
                                check(Space::Curl, &y, &|v| v.vector().dot(&tangent), r);
                            }
                        }
                    }
                    for fi in 0..=dim {
                        let n = cell.facet_area_normal(fi);
                        for y in points_on(&mut rng, &cell, &cell.facet_vertices(fi), 2) {
                            check(Space::Div, &y, &|v| v.vector().dot(&n), fi);
                        }
                    }
                }
            }
        }
    }
    t.finish("dof_kronecker", 1e-9, settings.seed, start)
}

fn whitney_reduction(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 4);
    let mut t = Tracker::new();
    for dim in [2, 3] {
        for ci in 0..settings.cells {
            let cell = random_cell(&mut rng, dim);
            for &eps in &settings.eps_list {
                let f = fit(settings, eps);
                for space in spaces(dim) {
                    let dw = whitney_derivative(space, &cell);
                    for _ in 0..4 {
                        let x = random_point_on(&mut rng, cell.vertices());
                        match f.solve(space, &cell, &Point::zeros(), &x) {
                            Ok(e) => {
                                let w = whitney_basis(space, &cell, &x);
                                for s in 0..w.len() {
                                    let ev = (e.values[s] - w[s]).norm() / w[s].norm().max(1.0);
                                    let want = dw[s] * eps;
                                    let ej = (e.fluxes[s] - want).norm() / want.norm().max(eps);
                                    t.record(ev.max(ej), || format!("{dim}D cell {ci} {space} basis {s} eps {eps:e}"));
                                }
                            }
                            Err(e) => t.fail(format!("{dim}D cell {ci} {space}: {e}")),
                        }
                    }
                }
            }
        }
    }
    t.finish("zero_convection_whitney", 1e-12, settings.seed, start)
}

/// DOFs of a constant vector field: tangential or normal components.
fn constant_dofs(space: Space, cell: &CellGeometry, c: &Point) -> Vec<f64> {
    match space {
        Space::Curl => local_edges(3).iter().map(|&[a, b]| c.dot(&cell.edge_vector(a, b))).collect(),
        Space::Div => (0..=cell.dim()).map(|f| c.dot(&cell.facet_area_normal(f))).collect(),
        _ => unreachable!("constants are checked for vector spaces"),
    }
}

fn constants_contained(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 5);
    let mut t = Tracker::new();
    for dim in [2, 3] {
        for ci in 0..settings.cells {
            let cell = random_cell(&mut rng, dim);
            for _ in 0..settings.betas.div_ceil(4) {
                let beta = AffineField::random(&mut rng, &cell, 100.0);
                let c = random_vector(&mut rng, dim, 1.0);
                for &eps in &settings.eps_list {
                    let f = fit(settings, eps);
                    for space in [Space::Curl, Space::Div].into_iter().filter(|s| s.exists_in(dim)) {
                        let dofs = constant_dofs(space, &cell, &c);
                        for _ in 0..3 {
                            let x = random_point_on(&mut rng, cell.vertices());
                            let b = beta.at(&x);
                            match f.solve(space, &cell, &b, &x) {
                                Ok(e) => {
                                    let (u, j) = e.combine(&dofs);
                                    let want_u = FormValue::Vector(c);
                                    let want_j = coupling(space, &b, want_u);
                                    let eu = sum_error(u, want_u, combination_scale(&dofs, &e.values));
                                    let ej = sum_error(j, want_j, combination_scale(&dofs, &e.fluxes));
                                    t.record(eu.max(ej), || format!("{dim}D cell {ci} {space} eps {eps:e} x {x:?}: u {eu:e} J {ej:e}"));
                                }
                                Err(e) => t.fail(format!("{dim}D cell {ci} {space}: {e}")),
                            }
                        }
                    }
                }
            }
        }
    }
    t.finish("constants_contained", 1e-9, settings.seed, start)
}

/// Constant `theta` with `|theta| diam(T) <= 35`, so every weighted DOF stays
/// in the range where the exponential edge rule is a composite Gauss rule.
fn moderate_theta<R: Rng>(rng: &mut R, cell: &CellGeometry) -> Point {
    random_vector(rng, cell.dim(), 35.0 / cell.diameter())
}

/// Smooth test field `E_{-theta} p1 + p2` for a space, with its exact flux.
struct MixedField {
    space: Space,
    theta: Point,
    eps: f64,
    center: Point,
    exp_part: VectorQuadratic,
    poly_part: VectorQuadratic,
}

impl MixedField {
    fn random<R: Rng>(rng: &mut R, space: Space, cell: &CellGeometry, theta: Point, eps: f64) -> MixedField {
        let dim = cell.dim();
        MixedField {
            space,
            theta,
            eps,
            center: cell.barycenter(),
            exp_part: VectorQuadratic::random(rng, dim),
            poly_part: VectorQuadratic::random(rng, dim),
        }
    }

    fn weight(&self, x: &Point) -> f64 {
        (-self.theta.dot(&(x - self.center))).exp()
    }

    fn poly(&self, p: &VectorQuadratic, x: &Point) -> FormValue {
        if self.space == Space::Grad {
            FormValue::Scalar(p.0[0].eval(x))
        } else {
            FormValue::Vector(p.eval(x))
        }
    }

    fn derivative(&self, p: &VectorQuadratic, x: &Point) -> FormValue {
        match self.space {
            Space::Grad => FormValue::Vector(p.0[0].gradient(x)),
            Space::Curl => FormValue::Vector(p.curl(x)),
            _ => FormValue::Scalar(p.div(x)),
        }
    }

    fn value(&self, x: &Point) -> FormValue {
        self.poly(&self.exp_part, x) * self.weight(x) + self.poly(&self.poly_part, x)
    }

    /// `J w = eps E^{-1} d(E w)` with `E = exp(theta . x)`.
    fn flux(&self, x: &Point) -> FormValue {
        let beta = self.theta * self.eps;
        self.derivative(&self.exp_part, x) * (self.eps * self.weight(x))
            + self.derivative(&self.poly_part, x) * self.eps
            + coupling(self.space, &beta, self.poly(&self.poly_part, x))
    }
}

/// Field in the kernel of the flux for constant `theta`.
fn kernel_field<R: Rng>(rng: &mut R, space: Space, cell: &CellGeometry, theta: Point) -> impl Fn(&Point) -> FormValue {
    let dim = cell.dim();
    let q = Quadratic::random(rng, dim);
    let qv = VectorQuadratic::random(rng, dim);
    let c0 = rng.random_range(0.5..2.0);
    let center = cell.barycenter();
    move |x: &Point| {
        let w = (-theta.dot(&(x - center))).exp();
        match (space, dim) {
            (Space::Grad, _) => FormValue::Scalar(c0 * w),
            (Space::Curl, _) => FormValue::Vector(q.gradient(x) * w),
            (Space::Div, 3) => FormValue::Vector(qv.curl(x) * w),
            _ => {
                let g = q.gradient(x);
                FormValue::Vector(Point::new(g.y, -g.x, 0.0) * w)
            }
        }
    }
}

fn constant_config(settings: &SuiteSettings, space: Space, eps: f64, theta: Point) -> ProblemConfig {
    ProblemConfig::new(space, eps).with_constant_beta(theta * eps).with_kernel(settings.kernel.clone())
}

fn kernel_preservation(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 6);
    let mut t = Tracker::new();
    let quad = WeightedQuadrature::accurate();
    for dim in [2, 3] {
        for ci in 0..settings.cells {
            let cell = random_cell(&mut rng, dim);
            let theta = moderate_theta(&mut rng, &cell);
            let eps = settings.eps_list[ci % settings.eps_list.len()];
            for space in spaces(dim) {
                let w = kernel_field(&mut rng, space, &cell, theta);
                let dofs = weighted_dofs(space, &cell, |_| theta, &w, &quad);
                let sizes = dof_magnitudes(space, &cell, &theta, &w, &quad);
                let config = constant_config(settings, space, eps, theta);
                for _ in 0..20 {
                    let x = random_point_on(&mut rng, cell.vertices());
                    match config.solve_at(&cell, &x) {
                        Ok(e) => {
                            let (_, j) = e.combine(&dofs);
                            let zero = FormValue::zero(space.flux_is_scalar());
                            let err = sum_error(j, zero, combination_scale(&sizes, &e.fluxes));
                            t.record(err, || format!("{dim}D cell {ci} {space} theta {theta:?} eps {eps:e}"));
                        }
                        Err(e) => t.fail(format!("{dim}D cell {ci} {space}: {e}")),
                    }
                }
            }
        }
    }
    t.finish("kernel_preservation", 1e-8, settings.seed, start)
}

fn evaluate_or_fail(config: &ProblemConfig, cell: &CellGeometry, x: &Point) -> Result<PointBasisEval, ExpFitError> {
    config.solve_at(cell, x)
}

fn commutativity(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 7);
    let mut t = Tracker::new();
    let quad = WeightedQuadrature::accurate();
    for dim in [2, 3] {
        for ci in 0..settings.cells {
            let cell = random_cell(&mut rng, dim);
            let theta = moderate_theta(&mut rng, &cell);
            let eps = settings.eps_list[ci % settings.eps_list.len()];
            for space in spaces(dim) {
                let Some(next) = space.derivative_space(dim) else { continue };
                let field = MixedField::random(&mut rng, space, &cell, theta, eps);
                let dofs = weighted_dofs(space, &cell, |_| theta, |x| field.value(x), &quad);
                let flux_dofs = weighted_dofs(next, &cell, |_| theta, |x| field.flux(x), &quad);
                let sizes = dof_magnitudes(space, &cell, &theta, |x| field.value(x), &quad);
                let flux_sizes = dof_magnitudes(next, &cell, &theta, |x| field.flux(x), &quad);
                let here = constant_config(settings, space, eps, theta);
                let there = constant_config(settings, next, eps, theta);
                for _ in 0..10 {
                    let x = random_point_on(&mut rng, cell.vertices());
                    match (evaluate_or_fail(&here, &cell, &x), evaluate_or_fail(&there, &cell, &x)) {
                        (Ok(a), Ok(b)) => {
                            let (_, discrete) = a.combine(&dofs);
                            let (interpolated, _) = b.combine(&flux_dofs);
                            let scale = combination_scale(&sizes, &a.fluxes).max(combination_scale(&flux_sizes, &b.values));
                            let err = sum_error(discrete, interpolated, scale);
                            t.record(err, || format!("{dim}D cell {ci} {space} theta {theta:?} eps {eps:e}"));
                        }
                        (Err(e), _) | (_, Err(e)) => t.fail(format!("{dim}D cell {ci} {space}: {e}")),
                    }
                }
            }
        }
    }
    t.finish("commutativity", 1e-8, settings.seed, start)
}

fn complex_exactness(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 8);
    let mut t = Tracker::new();
    let quad = WeightedQuadrature::accurate();
    for ci in 0..settings.cells {
        let cell = random_cell(&mut rng, 3);
        let theta = moderate_theta(&mut rng, &cell);
        let eps = settings.eps_list[ci % settings.eps_list.len()];
        for space in [Space::Grad, Space::Curl] {
            let next = space.derivative_space(3).expect("3D complex");
            let field = MixedField::random(&mut rng, space, &cell, theta, eps);
            let dofs = weighted_dofs(next, &cell, |_| theta, |x| field.flux(x), &quad);
            let sizes = dof_magnitudes(next, &cell, &theta, |x| field.flux(x), &quad);
            let config = constant_config(settings, next, eps, theta);
            for _ in 0..10 {
                let x = random_point_on(&mut rng, cell.vertices());
                match config.solve_at(&cell, &x) {
                    Ok(e) => {
                        let (_, j) = e.combine(&dofs);
                        let zero = FormValue::zero(next.flux_is_scalar());
                        let err = sum_error(j, zero, combination_scale(&sizes, &e.fluxes));
                        t.record(err, || format!("cell {ci} {space} -> {next} theta {theta:?} eps {eps:e}"));
                    }
                    Err(e) => t.fail(format!("cell {ci} {next}: {e}")),
                }
            }
        }
    }
    t.finish("complex_composition_zero", 1e-9, settings.seed, start)
}

fn determinant_positivity(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 9);
    let mut t = Tracker::new();
    let mut eps_list = settings.eps_list.clone();
    eps_list.push(1e-6);
    for dim in [2, 3] {
        for ci in 0..settings.cells {
            let cell = random_cell(&mut rng, dim);
            for _ in 0..settings.betas {
                let beta = AffineField::random(&mut rng, &cell, 100.0);
                for &eps in &eps_list {
                    let f = fit(settings, eps);
                    let x = random_point_on(&mut rng, cell.vertices());
                    for space in spaces(dim) {
                        match f.solve(space, &cell, &beta.at(&x), &x) {
                            Ok(e) if e.diagnostics.det_sign > 0.0 => t.record(0.0, String::new),
                            Ok(_) => t.fail(format!("{dim}D cell {ci} {space} eps {eps:e} x {x:?}: negative determinant")),
                            Err(e) => t.fail(format!("{dim}D cell {ci} {space} eps {eps:e}: {e}")),
                        }
                    }
                }
            }
        }
    }
    t.finish("determinant_positivity", 0.0, settings.seed, start)
}

/// Two cells sharing the facet spanned by the first `dim` vertices.
fn random_pair<R: Rng>(rng: &mut R, dim: usize) -> SimplicialMesh {
    loop {
        let base = random_cell(rng, dim);
        let facet: Vec<Point> = (0..dim).map(|i| base.vertex(i)).collect();
        let apex = base.vertex(dim);
        let center = facet.iter().sum::<Point>() / dim as f64;
        // reflect the apex through the facet plane and jitter it
        let n = base.facet_normal(dim);
        let h = (apex - center).dot(&n);
        let jitter = random_vector(rng, dim, 0.3 * base.diameter());
        let other = apex - n * (2.0 * h) + jitter - n * jitter.dot(&n) - n * (0.3 * h * rng.random::<f64>());
        let mut vertices = facet.clone();
        vertices.push(apex);
        vertices.push(other);
        let shared: Vec<usize> = (0..dim).collect();
        let mut a = shared.clone();
        a.push(dim);
        let mut b = shared;
        b.push(dim + 1);
        if let Ok(mesh) = SimplicialMesh::new(dim, vertices, &[a, b]) {
            let second = mesh.cell_geometry(1);
            let d = second.diameter();
            let regular = if dim == 2 { d * d * 3f64.sqrt() / 4.0 } else { d * d * d / (6.0 * 2f64.sqrt()) };
            if second.volume() > 0.05 * regular {
                return mesh;
            }
        }
    }
}

fn conformity(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 10);
    let mut t = Tracker::new();
    for dim in [2, 3] {
        for pi in 0..settings.facets {
            let mesh = random_pair(&mut rng, dim);
            let cells = [mesh.cell_geometry(0), mesh.cell_geometry(1)];
            let beta = AffineField::random(&mut rng, &cells[0], 100.0);
            let eps = settings.eps_list[pi % settings.eps_list.len()];
            let f = fit(settings, eps);
            let shared = (0..mesh.n_facets()).find(|&fc| mesh.facet_cells(fc).1.is_some()).expect("shared facet");
            let facet_pts: Vec<Point> = mesh.facet(shared).iter().map(|&v| mesh.vertex(v)).collect();
            let normal = mesh.facet_area_normal(shared).normalize();
            for space in spaces(dim) {
                let dofmap = DofMap::new(&mesh, space).expect("space exists");
                let trace = |v: FormValue| -> FormValue {
                    match space {
                        Space::Grad => v,
                        Space::Curl => FormValue::Vector(v.vector() - normal * v.vector().dot(&normal)),
                        _ => FormValue::Scalar(v.vector().dot(&normal)),
                    }
                };
                for _ in 0..2 {
                    let y = random_point_on(&mut rng, &facet_pts);
                    let b = beta.at(&y);
                    let evals: Result<Vec<_>, _> = cells.iter().map(|c| f.solve(space, c, &b, &y)).collect();
                    let evals = match evals {
                        Ok(e) => e,
                        Err(e) => {
                            t.fail(format!("{dim}D pair {pi} {space}: {e}"));
                            continue;
                        }
                    };
                    // global basis functions restricted to each cell
                    let mut traces = vec![[FormValue::zero(space != Space::Curl); 2]; dofmap.n_global()];
                    for c in 0..2 {
                        for (s, (&g, &sign)) in dofmap.cell_dofs(c).iter().zip(dofmap.cell_signs(c)).enumerate() {
                            traces[g][c] = trace(evals[c].values[s] * sign);
                        }
                    }
                    for (g, [a, b]) in traces.iter().enumerate() {
                        let scale = a.norm().max(b.norm()).max(1.0);
                        let err = (*a - *b).norm() / scale;
                        t.record(err, || format!("{dim}D pair {pi} {space} global dof {g} eps {eps:e} y {y:?}"));
                    }
                }
            }
        }
    }
    t.finish("conformity_traces", 1e-9, settings.seed, start)
}

fn piola_covariance(settings: &SuiteSettings) -> PropertyResult {
    let start = Instant::now();
    let mut rng = rng_for(settings, 11);
    let mut t = Tracker::new();
    for dim in [2, 3] {
        for ci in 0..settings.cells {
            let cell = random_cell(&mut rng, dim);
            let beta = AffineField::random(&mut rng, &cell, 100.0);
            for &eps in &settings.eps_list {
                let f = fit(settings, eps);
                for space in spaces(dim) {
                    let x = random_point_on(&mut rng, cell.vertices());
                    let b = beta.at(&x);
                    match (f.solve(space, &cell, &b, &x), solve_via_reference(&f, space, &cell, &b, &x)) {
                        (Ok(direct), Ok(mapped)) => {
                            // normwise over the whole multi-right-hand-side solution
                            let worst = |d: &[FormValue], m: &[FormValue]| {
                                let diff = d.iter().zip(m).fold(0.0f64, |acc, (a, b)| acc.max((*a - *b).norm()));
                                let size = d.iter().fold(0.0f64, |acc, a| acc.max(a.norm()));
                                diff / size.max(f64::MIN_POSITIVE)
                            };
                            let ev = worst(&direct.values, &mapped.values);
                            let ej = worst(&direct.fluxes, &mapped.fluxes);
                            t.record(ev.max(ej), || {
                                format!(
                                    "{dim}D cell {ci} {space} eps {eps:e}: value {ev:e} flux {ej:e}, min pivot {:e}, |theta| {:e}",
                                    direct.diagnostics.min_pivot_ratio,
                                    b.norm() / eps
                                )
                            });
                        }
                        (Ok(_), Err(ExpFitError::OrientationReversing)) if space == Space::Div && cell.orientation() < 0.0 => {
                            t.record(0.0, String::new)
                        }
                        (Err(e), _) | (_, Err(e)) => t.fail(format!("{dim}D cell {ci} {space}: {e}")),
                    }
                }
            }
        }
    }
    t.finish("piola_covariance", 1e-10, settings.seed, start)
}

/// Runs every check; results come back in a fixed order.
pub fn run_property_suites(settings: &SuiteSettings) -> PropertyReport {
    let checks: [fn(&SuiteSettings) -> PropertyResult; 11] = [
        bernoulli_oracle,
        bernoulli_positivity,
        kronecker,
        whitney_reduction,
        constants_contained,
        kernel_preservation,
        commutativity,
        complex_exactness,
        determinant_positivity,
        conformity,
        piola_covariance,
    ];
    PropertyReport { results: checks.iter().map(|c| c(settings)).collect() }
}

/// Which Bernoulli function a [`PerturbedBernoulli`] corrupts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbed {
    B1,
    B2,
    B3,
}

/// Correct Bernoulli values except for one function, which is scaled by
/// `1 + relative` whenever its first argument is nonzero.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedBernoulli {
    pub which: Perturbed,
    pub relative: f64,
}

impl PerturbedBernoulli {
    fn scale(&self, which: Perturbed, s: f64) -> f64 {
        if which == self.which && s != 0.0 {
            1.0 + self.relative
        } else {
            1.0
        }
    }
}

impl BernoulliKernel for PerturbedBernoulli {
    fn b1(&self, s: f64, eps: f64) -> Result<f64, BernoulliError> {
        Ok(StableBernoulli.b1(s, eps)? * self.scale(Perturbed::B1, s))
    }
    fn b2(&self, s1: f64, s2: f64, eps: f64) -> Result<f64, BernoulliError> {
        Ok(StableBernoulli.b2(s1, s2, eps)? * self.scale(Perturbed::B2, s1))
    }
    fn b3(&self, s1: f64, s2: f64, s3: f64, eps: f64) -> Result<f64, BernoulliError> {
        Ok(StableBernoulli.b3(s1, s2, s3, eps)? * self.scale(Perturbed::B3, s1))
    }
}
