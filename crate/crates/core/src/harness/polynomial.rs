//! Random quadratic polynomials with exact derivatives, used as smooth test
//! fields by the property suite.

use nalgebra::Matrix3;
use rand::Rng;

use crate::mesh::Point;

/// `c + g . x + x^T h x / 2` with symmetric `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub constant: f64,
    pub linear: Point,
    pub hessian: Matrix3<f64>,
}

impl Quadratic {
    /// Coefficients uniform in `[-1, 1]`; in 2D nothing depends on `z`.
    pub fn random<R: Rng>(rng: &mut R, dim: usize) -> Quadratic {
        let mut u = || rng.random_range(-1.0..1.0);
        let mut linear = Point::new(u(), u(), u());
        let mut hessian = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let v = u();
                hessian[(i, j)] = v;
                hessian[(j, i)] = v;
            }
        }
        if dim == 2 {
            linear.z = 0.0;
            for i in 0..3 {
                hessian[(2, i)] = 0.0;
                hessian[(i, 2)] = 0.0;
            }
        }
        Quadratic { constant: u(), linear, hessian }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.constant + self.linear.dot(x) + 0.5 * x.dot(&(self.hessian * x))
    }

    pub fn gradient(&self, x: &Point) -> Point {
        self.linear + self.hessian * x
    }
}

/// A vector field with quadratic components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorQuadratic(pub [Quadratic; 3]);

impl VectorQuadratic {
    /// In 2D the third component is zero.
    pub fn random<R: Rng>(rng: &mut R, dim: usize) -> VectorQuadratic {
        let a = Quadratic::random(rng, dim);
        let b = Quadratic::random(rng, dim);
        let mut c = Quadratic::random(rng, dim);
        if dim == 2 {
            c = Quadratic { constant: 0.0, linear: Point::zeros(), hessian: Matrix3::zeros() };
        }
        VectorQuadratic([a, b, c])
    }

    pub fn eval(&self, x: &Point) -> Point {
        Point::new(self.0[0].eval(x), self.0[1].eval(x), self.0[2].eval(x))
    }

    /// `jac[(i, j)] = d p_i / d x_j`.
    pub fn jacobian(&self, x: &Point) -> Matrix3<f64> {
        let rows: Vec<_> = self.0.iter().map(|p| p.gradient(x).transpose()).collect();
        Matrix3::from_rows(&rows)
    }

    pub fn curl(&self, x: &Point) -> Point {
        let j = self.jacobian(x);
        Point::new(j[(2, 1)] - j[(1, 2)], j[(0, 2)] - j[(2, 0)], j[(1, 0)] - j[(0, 1)])
    }

    pub fn div(&self, x: &Point) -> f64 {
        self.jacobian(x).trace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn derivatives_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = VectorQuadratic::random(&mut rng, 3);
        let x = Point::new(0.3, -0.2, 0.7);
        let h = 1e-5;
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let mut e = Point::zeros();
            e[j] = h;
            let d = (q.eval(&(x + e)) - q.eval(&(x - e))) / (2.0 * h);
            for i in 0..3 {
                jac[(i, j)] = d[i];
            }
        }
        assert!((jac - q.jacobian(&x)).amax() < 1e-8);
        let c = q.curl(&x);
        assert!((c.x - (jac[(2, 1)] - jac[(1, 2)])).abs() < 1e-8);
        assert!((q.div(&x) - jac.trace()).abs() < 1e-8);
    }
}
