//! Finite-difference residual oracle shared by the integration targets.
#![allow(dead_code)]

use expfit::elements::{FormValue, Space};
use expfit::harness::cases::coupling;
use expfit::harness::ManufacturedCase;
use expfit::mesh::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-3;

pub fn components(v: FormValue) -> [f64; 3] {
    match v {
        FormValue::Scalar(s) => [s, 0.0, 0.0],
        FormValue::Vector(v) => [v.x, v.y, v.z],
    }
}

/// Fourth-order central difference of every component along `axis`.
fn partial(g: &dyn Fn(&Point) -> [f64; 3], x: &Point, axis: usize) -> [f64; 3] {
    let mut e = Point::zeros();
    e[axis] = STEP;
    let (p2, p1, m1, m2) = (g(&(x + 2.0 * e)), g(&(x + e)), g(&(x - e)), g(&(x - 2.0 * e)));
    std::array::from_fn(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * STEP))
}

/// Exterior derivative for a `k`-form of the given space (as a proxy field).
fn d(space: Space, dim: usize, g: &dyn Fn(&Point) -> [f64; 3], x: &Point) -> FormValue {
    let p: Vec<[f64; 3]> = (0..dim).map(|a| partial(g, x, a)).collect();
    match space {
        Space::Grad => FormValue::Vector(Point::new(p[0][0], p[1][0], if dim == 3 { p[2][0] } else { 0.0 })),
        Space::Curl => FormValue::Vector(Point::new(p[1][2] - p[2][1], p[2][0] - p[0][2], p[0][1] - p[1][0])),
        Space::Div => FormValue::Scalar((0..dim).map(|a| p[a][a]).sum()),
        Space::L2 => FormValue::Scalar(0.0),
    }
}

/// Formal adjoint of `d` acting on the flux of a form in `space`.
fn codiff(space: Space, dim: usize, g: &dyn Fn(&Point) -> [f64; 3], x: &Point) -> FormValue {
    let p: Vec<[f64; 3]> = (0..dim).map(|a| partial(g, x, a)).collect();
    match space {
        Space::Grad => FormValue::Scalar(-(0..dim).map(|a| p[a][a]).sum::<f64>()),
        Space::Curl => FormValue::Vector(Point::new(p[1][2] - p[2][1], p[2][0] - p[0][2], p[0][1] - p[1][0])),
        Space::Div => FormValue::Vector(-Point::new(p[0][0], p[1][0], if dim == 3 { p[2][0] } else { 0.0 })),
        Space::L2 => FormValue::Scalar(0.0),
    }
}

fn norm(v: [f64; 3]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(std::array::from_fn(|i| a[i] - b[i]))
}

pub type Load<'a> = &'a dyn Fn(&ManufacturedCase, f64, &Point) -> FormValue;

/// Worst relative load and flux mismatch over `points` random interior points
/// and every tabulated `eps` of the case.
pub fn check_case(name: &str, points: usize, seed: u64, load: Load<'_>) -> (f64, f64) {
    let case = ManufacturedCase::by_name(name).unwrap();
    let (space, dim) = (case.space, case.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 4.0 * STEP;
    let (mut worst_load, mut worst_flux) = (0.0f64, 0.0f64);
    for _ in 0..points {
        let mut x = Point::zeros();
        for a in 0..dim {
            x[a] = rng.random_range(margin..1.0 - margin);
        }
        for &eps in &case.eps_list {
            let u = |y: &Point| components((case.solution)(y));
            let flux_fd = |y: &Point| {
                let du = components(d(space, dim, &u, y));
                let c = components(coupling(space, &(case.beta)(y), (case.solution)(y)));
                std::array::from_fn(|i| eps * du[i] + c[i])
            };
            let flux_err = diff(flux_fd(&x), components(case.flux(eps, &x)));
            worst_flux = worst_flux.max(flux_err / norm(flux_fd(&x)).max(f64::MIN_POSITIVE));

            // scale by the size of the individual terms so cancellation between
            // them does not hide an error
            let du_fd = |y: &Point| components(d(space, dim, &u, y));
            let coupling_fd = |y: &Point| components(coupling(space, &(case.beta)(y), (case.solution)(y)));
            let diffusive = components(codiff(space, dim, &du_fd, &x)).map(|v| eps * v);
            let convective = components(codiff(space, dim, &coupling_fd, &x));
            let reaction = u(&x).map(|v| (case.gamma)(&x) * v);
            let residual: [f64; 3] = std::array::from_fn(|i| diffusive[i] + convective[i] + reaction[i]);
            let scale = norm(diffusive) + norm(convective) + norm(reaction);
            let load_err = diff(residual, components(load(&case, eps, &x)));
            worst_load = worst_load.max(load_err / scale.max(f64::MIN_POSITIVE));
        }
    }
    (worst_load, worst_flux)
}

