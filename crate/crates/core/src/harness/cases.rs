//! Manufactured solutions on the unit square and unit cube.
//!
//! Each case stores the exact solution `u`, its exterior derivative `du`, the
//! convection field and the reaction coefficient.  The flux is
//! `J = eps du + beta o u` (product, cross product or dot product depending on
//! the space) and the load is `f = eps d*(du) + d*(beta o u) + gamma u`, where
//! `d*` is `-div`, `curl` or `-grad`.  The two `d*` terms are hand-derived per
//! case, which keeps the dependence on `eps` explicit.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::elements::{FormValue, Space};
use crate::expfit::{FormField, ProblemConfig, ScalarField, VectorField};
use crate::mesh::{unit_cube, unit_square, MeshError, Point, SimplicialMesh};

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub dim: usize,
    pub space: Space,
    pub solution: FormField,
    pub derivative: FormField,
    pub beta: VectorField,
    pub gamma: ScalarField,
    /// `d*` applied to `du`.
    pub codiff_derivative: FormField,
    /// `d*` applied to `beta o u`.
    pub codiff_coupling: FormField,
    /// Whether `u` has a vanishing trace on the boundary.
    pub homogeneous: bool,
    /// Values of `eps` tabulated by default.
    pub eps_list: Vec<f64>,
    /// Default mesh resolutions `1/h`.
    pub levels: Vec<usize>,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("space", &self.space)
            .finish_non_exhaustive()
    }
}

/// `beta o u` for the space of `u`.
pub fn coupling(space: Space, beta: &Point, u: FormValue) -> FormValue {
    match space {
        Space::Grad => FormValue::Vector(beta * u.scalar()),
        Space::Curl => FormValue::Vector(beta.cross(&u.vector())),
        Space::Div => FormValue::Scalar(beta.dot(&u.vector())),
        Space::L2 => FormValue::Scalar(0.0),
    }
}

impl ManufacturedCase {
    pub fn by_name(name: &str) -> Option<ManufacturedCase> {
        match name {
            "div2d" => Some(div2d()),
            "curl3d" => Some(curl3d()),
            "grad2d" => Some(grad2d()),
            "grad3d" => Some(grad3d()),
            "div3d" => Some(div3d()),
            _ => None,
        }
    }

    pub fn names() -> [&'static str; 5] {
        ["div2d", "curl3d", "grad2d", "grad3d", "div3d"]
    }

    pub fn flux(&self, eps: f64, x: &Point) -> FormValue {
        (self.derivative)(x) * eps + coupling(self.space, &(self.beta)(x), (self.solution)(x))
    }

    pub fn load(&self, eps: f64, x: &Point) -> FormValue {
        (self.codiff_derivative)(x) * eps + (self.codiff_coupling)(x) + (self.solution)(x) * (self.gamma)(x)
    }

    pub fn mesh(&self, n: usize) -> Result<SimplicialMesh, MeshError> {
        if self.dim == 2 {
            unit_square(n)
        } else {
            unit_cube(n)
        }
    }

    pub fn config(&self, eps: f64) -> ProblemConfig {
        let beta = self.beta.clone();
        let gamma = self.gamma.clone();
        let case = self.clone();
        let mut config = ProblemConfig::new(self.space, eps)
            .with_beta(move |x| beta(x))
            .with_gamma(move |x| gamma(x))
            .with_load(move |x| case.load(eps, x));
        if !self.homogeneous {
            let u = self.solution.clone();
            config = config.with_boundary(move |x| u(x));
        }
        config
    }
}

fn rotation2d() -> VectorField {
    Arc::new(|x: &Point| Point::new(-x.y, x.x, 0.0))
}

fn cyclic3d() -> VectorField {
    Arc::new(|x: &Point| Point::new(x.y, x.z, x.x))
}

fn unit_gamma() -> ScalarField {
    Arc::new(|_: &Point| 1.0)
}

/// H(div) in 2D: `u = (xy(1-x)(1-y), sin(pi x) sin(pi y))`, rotating convection.
pub fn div2d() -> ManufacturedCase {
    ManufacturedCase {
        name: "div2d",
        dim: 2,
        space: Space::Div,
        solution: Arc::new(|x: &Point| {
            let (a, b) = (x.x, x.y);
            FormValue::Vector(Point::new(a * b * (1.0 - a) * (1.0 - b), (PI * a).sin() * (PI * b).sin(), 0.0))
        }),
        derivative: Arc::new(|x: &Point| {
            let (a, b) = (x.x, x.y);
            FormValue::Scalar(b * (1.0 - b) * (1.0 - 2.0 * a) + PI * (PI * a).sin() * (PI * b).cos())
        }),
        beta: rotation2d(),
        gamma: unit_gamma(),
        codiff_derivative: Arc::new(|x: &Point| {
            let (a, b) = (x.x, x.y);
            let pi2 = PI * PI;
            let da = -2.0 * b * (1.0 - b) + pi2 * (PI * a).cos() * (PI * b).cos();
            let db = (1.0 - 2.0 * a) * (1.0 - 2.0 * b) - pi2 * (PI * a).sin() * (PI * b).sin();
            FormValue::Vector(Point::new(-da, -db, 0.0))
        }),
        codiff_coupling: Arc::new(|x: &Point| {
            // c = -y p + x s
            let (a, b) = (x.x, x.y);
            let p = a * b * (1.0 - a) * (1.0 - b);
            let pa = b * (1.0 - b) * (1.0 - 2.0 * a);
            let pb = a * (1.0 - a) * (1.0 - 2.0 * b);
            let s = (PI * a).sin() * (PI * b).sin();
            let sa = PI * (PI * a).cos() * (PI * b).sin();
            let sb = PI * (PI * a).sin() * (PI * b).cos();
            let ca = -b * pa + s + a * sa;
            let cb = -p - b * pb + a * sb;
            FormValue::Vector(Point::new(-ca, -cb, 0.0))
        }),
        homogeneous: true,
        eps_list: vec![1.0, 1e-2, 1e-6],
        levels: vec![4, 8, 16, 32, 64],
    }
}

/// H(curl) in 3D: `u = (sin z, sin x, sin y)`, cyclic convection.
pub fn curl3d() -> ManufacturedCase {
    ManufacturedCase {
        name: "curl3d",
        dim: 3,
        space: Space::Curl,
        solution: Arc::new(|x: &Point| FormValue::Vector(Point::new(x.z.sin(), x.x.sin(), x.y.sin()))),
        derivative: Arc::new(|x: &Point| FormValue::Vector(Point::new(x.y.cos(), x.z.cos(), x.x.cos()))),
        beta: cyclic3d(),
        gamma: unit_gamma(),
        codiff_derivative: Arc::new(|x: &Point| FormValue::Vector(Point::new(x.z.sin(), x.x.sin(), x.y.sin()))),
        codiff_coupling: Arc::new(|x: &Point| {
            FormValue::Vector(Point::new(
                x.x.sin() - x.x * x.z.cos(),
                x.y.sin() - x.y * x.x.cos(),
                x.z.sin() - x.z * x.y.cos(),
            ))
        }),
        homogeneous: false,
        eps_list: vec![1.0, 1e-2, 1e-6],
        levels: vec![2, 4, 8],
    }
}

/// H(grad) in 2D: `u = sin(pi x) sin(pi y)`, rotating convection.
pub fn grad2d() -> ManufacturedCase {
    ManufacturedCase {
        name: "grad2d",
        dim: 2,
        space: Space::Grad,
        solution: Arc::new(|x: &Point| FormValue::Scalar((PI * x.x).sin() * (PI * x.y).sin())),
        derivative: Arc::new(|x: &Point| {
            FormValue::Vector(Point::new(
                PI * (PI * x.x).cos() * (PI * x.y).sin(),
                PI * (PI * x.x).sin() * (PI * x.y).cos(),
                0.0,
            ))
        }),
        beta: rotation2d(),
        gamma: unit_gamma(),
        codiff_derivative: Arc::new(|x: &Point| FormValue::Scalar(2.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin())),
        codiff_coupling: Arc::new(|x: &Point| {
            // beta is divergence free: -div(beta u) = -beta . grad u
            let ux = PI * (PI * x.x).cos() * (PI * x.y).sin();
            let uy = PI * (PI * x.x).sin() * (PI * x.y).cos();
            FormValue::Scalar(x.y * ux - x.x * uy)
        }),
        homogeneous: true,
        eps_list: vec![1.0, 1e-2, 1e-6],
        levels: vec![4, 8, 16, 32, 64],
    }
}

/// H(grad) in 3D: `u = sin x sin y sin z`, cyclic convection.
pub fn grad3d() -> ManufacturedCase {
    ManufacturedCase {
        name: "grad3d",
        dim: 3,
        space: Space::Grad,
        solution: Arc::new(|x: &Point| FormValue::Scalar(x.x.sin() * x.y.sin() * x.z.sin())),
        derivative: Arc::new(|x: &Point| {
            let (s, c) = ((x.x.sin(), x.y.sin(), x.z.sin()), (x.x.cos(), x.y.cos(), x.z.cos()));
            FormValue::Vector(Point::new(c.0 * s.1 * s.2, s.0 * c.1 * s.2, s.0 * s.1 * c.2))
        }),
        beta: cyclic3d(),
        gamma: unit_gamma(),
        codiff_derivative: Arc::new(|x: &Point| FormValue::Scalar(3.0 * x.x.sin() * x.y.sin() * x.z.sin())),
        codiff_coupling: Arc::new(|x: &Point| {
            let (s, c) = ((x.x.sin(), x.y.sin(), x.z.sin()), (x.x.cos(), x.y.cos(), x.z.cos()));
            FormValue::Scalar(-(x.y * c.0 * s.1 * s.2 + x.z * s.0 * c.1 * s.2 + x.x * s.0 * s.1 * c.2))
        }),
        homogeneous: false,
        eps_list: vec![1.0, 1e-2, 1e-6],
        levels: vec![2, 4, 8],
    }
}

/// H(div) in 3D: `u = (sin(pi x) yz, sin(pi y) zx, sin(pi z) xy)`, cyclic
/// convection; the normal trace vanishes on the cube.
pub fn div3d() -> ManufacturedCase {
    let sc = |x: &Point| {
        let s = Point::new((PI * x.x).sin(), (PI * x.y).sin(), (PI * x.z).sin());
        let c = Point::new((PI * x.x).cos(), (PI * x.y).cos(), (PI * x.z).cos());
        (s, c)
    };
    ManufacturedCase {
        name: "div3d",
        dim: 3,
        space: Space::Div,
        solution: Arc::new(move |x: &Point| {
            let (s, _) = sc(x);
            FormValue::Vector(Point::new(s.x * x.y * x.z, s.y * x.z * x.x, s.z * x.x * x.y))
        }),
        derivative: Arc::new(move |x: &Point| {
            let (_, c) = sc(x);
            FormValue::Scalar(PI * (c.x * x.y * x.z + c.y * x.z * x.x + c.z * x.x * x.y))
        }),
        beta: cyclic3d(),
        gamma: unit_gamma(),
        codiff_derivative: Arc::new(move |x: &Point| {
            let (s, c) = sc(x);
            let pi2 = PI * PI;
            let gx = -pi2 * s.x * x.y * x.z + PI * c.y * x.z + PI * c.z * x.y;
            let gy = PI * c.x * x.z - pi2 * s.y * x.z * x.x + PI * c.z * x.x;
            let gz = PI * c.x * x.y + PI * c.y * x.x - pi2 * s.z * x.x * x.y;
            FormValue::Vector(-Point::new(gx, gy, gz))
        }),
        codiff_coupling: Arc::new(move |x: &Point| {
            // beta . u = sin(pi x) y^2 z + sin(pi y) z^2 x + sin(pi z) x^2 y
            let (s, c) = sc(x);
            let gx = PI * c.x * x.y * x.y * x.z + s.y * x.z * x.z + 2.0 * s.z * x.x * x.y;
            let gy = 2.0 * s.x * x.y * x.z + PI * c.y * x.z * x.z * x.x + s.z * x.x * x.x;
            let gz = s.x * x.y * x.y + 2.0 * s.y * x.z * x.x + PI * c.z * x.x * x.x * x.y;
            FormValue::Vector(-Point::new(gx, gy, gz))
        }),
        homogeneous: true,
        eps_list: vec![1.0, 1e-2, 1e-6],
        levels: vec![2, 4, 8],
    }
}
