//! Quadrature rules on reference simplices.
//!
//! Points are returned in barycentric coordinates (`dim + 1` entries) with
//! weights summing to one, so a rule integrates the *average* of a function;
//! multiply by the simplex measure to get the integral.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule {
    pub dim: usize,
    /// Barycentric coordinates, `dim + 1` per point, flattened.
    pub bary: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, q: usize) -> &[f64] {
        let n = self.dim + 1;
        &self.bary[q * n..(q + 1) * n]
    }

    /// Low-order rule used for reaction and load terms: exact for quadratics.
    pub fn degree2(dim: usize) -> SimplexRule {
        match dim {
            1 => SimplexRule::gauss_duffy(1, 2, 1),
            2 => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                SimplexRule {
                    dim,
                    bary: vec![a, b, b, b, a, b, b, b, a],
                    weights: vec![1.0 / 3.0; 3],
                }
            }
            3 => {
                let a = 0.585_410_196_624_968_5;
                let b = 0.138_196_601_125_010_5;
                SimplexRule {
                    dim,
                    bary: vec![a, b, b, b, b, a, b, b, b, b, a, b, b, b, b, a],
                    weights: vec![0.25; 4],
                }
            }
            _ => panic!("unsupported simplex dimension {dim}"),
        }
    }

    /// Default rule for DOF functionals and error norms (exact through degree 4).
    pub fn degree4(dim: usize) -> SimplexRule {
        match dim {
            1 => SimplexRule::gauss_duffy(1, 3, 1),
            2 => {
                // symmetric six-point rule
                let (a1, b1, w1) = (0.816_847_572_980_459, 0.091_576_213_509_771, 0.109_951_743_655_322);
                let (a2, b2, w2) = (0.108_103_018_168_070, 0.445_948_490_915_965, 0.223_381_589_678_011);
                let mut bary = Vec::with_capacity(18);
                let mut weights = Vec::with_capacity(6);
                for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
                    for p in [[a, b, b], [b, a, b], [b, b, a]] {
                        bary.extend_from_slice(&p);
                        weights.push(w);
                    }
                }
                let s: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= s);
                SimplexRule { dim, bary, weights }
            }
            3 => {
                // fourteen-point rule with positive weights, exact through degree 5
                let mut bary = Vec::with_capacity(56);
                let mut weights = Vec::with_capacity(14);
                for (a, w) in [(0.092_735_250_310_891_23, 0.073_493_043_116_361_96), (0.310_885_919_263_300_6, 0.112_687_925_718_015_9)] {
                    let b = 1.0 - 3.0 * a;
                    for i in 0..4 {
                        let mut p = [a; 4];
                        p[i] = b;
                        bary.extend_from_slice(&p);
                        weights.push(w);
                    }
                }
                let (a, w) = (0.454_496_295_874_350_4, 0.042_546_020_777_081_47);
                let b = 0.5 - a;
                for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                    let mut p = [b; 4];
                    p[i] = a;
                    p[j] = a;
                    bary.extend_from_slice(&p);
                    weights.push(w);
                }
                let s: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= s);
                SimplexRule { dim, bary, weights }
            }
            _ => panic!("unsupported simplex dimension {dim}"),
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule with `n` points per direction on
    /// each of `m` subintervals per direction; exact through degree
    /// `2n - dim` when `m = 1`.
    pub fn gauss_duffy(dim: usize, n: usize, m: usize) -> SimplexRule {
        let (x, w) = composite_gauss_legendre(n, m);
        let mut bary = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                for (xi, wi) in x.iter().zip(&w) {
                    bary.extend_from_slice(&[1.0 - xi, *xi]);
                    weights.push(*wi);
                }
            }
            2 => {
                for (u, wu) in x.iter().zip(&w) {
                    for (v, wv) in x.iter().zip(&w) {
                        let s1 = *u;
                        let s2 = v * (1.0 - u);
                        bary.extend_from_slice(&[1.0 - s1 - s2, s1, s2]);
                        // area of the reference triangle is 1/2
                        weights.push(2.0 * wu * wv * (1.0 - u));
                    }
                }
            }
            3 => {
                for (u, wu) in x.iter().zip(&w) {
                    for (v, wv) in x.iter().zip(&w) {
                        for (t, wt) in x.iter().zip(&w) {
                            let s1 = *u;
                            let s2 = v * (1.0 - u);
                            let s3 = t * (1.0 - u) * (1.0 - v);
                            bary.extend_from_slice(&[1.0 - s1 - s2 - s3, s1, s2, s3]);
                            weights.push(6.0 * wu * wv * wt * (1.0 - u) * (1.0 - u) * (1.0 - v));
                        }
                    }
                }
            }
            _ => panic!("unsupported simplex dimension {dim}"),
        }
        SimplexRule { dim, bary, weights }
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 1.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Gauss-Legendre on `m` equal subintervals of `[0, 1]`.
pub fn composite_gauss_legendre(n: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 1.0 / m as f64;
    let mut xs = Vec::with_capacity(n * m);
    let mut ws = Vec::with_capacity(n * m);
    for j in 0..m {
        for (xi, wi) in x.iter().zip(&w) {
            xs.push(h * (j as f64 + xi));
            ws.push(h * wi);
        }
    }
    (xs, ws)
}

/// Nodes and weights for averages on `[0, 1]` against the probability
/// density proportional to `exp(a t)`; the weights sum to one.
///
/// Moderate exponents use composite Gauss-Legendre on the weighted integrand
/// normalized by the exact mass.  Once the layer is thinner than the interval
/// by a wide margin the interval is treated as a half-line and Gauss-Laguerre
/// nodes are placed in the layer.
pub fn exponential_gauss(a: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    if a.abs() > LAGUERRE_THRESHOLD {
        let (s, w) = gauss_laguerre(n);
        let t = s
            .iter()
            .map(|&s| if a > 0.0 { 1.0 - s / a } else { s / -a })
            .map(|t| t.clamp(0.0, 1.0))
            .collect();
        return (t, w);
    }
    let m = (a.abs().ceil() as usize).max(1);
    let (t, w) = composite_gauss_legendre(n, m);
    let top = a.max(0.0);
    // exact mass times exp(-top)
    let mass = if a == 0.0 { 1.0 } else { -(-a.abs()).exp_m1() / a.abs() };
    let w = t.iter().zip(&w).map(|(t, w)| w * (a * t - top).exp() / mass).collect();
    (t, w)
}

const LAGUERRE_THRESHOLD: f64 = 40.0;

/// Gauss-Laguerre nodes and weights for the weight `exp(-s)` on `[0, inf)`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2])
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (p1 - p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        x[i] = z;
        w[i] = -1.0 / (pp * nf * p2);
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_average(rule: &SimplexRule, powers: &[i32]) -> f64 {
        (0..rule.len())
            .map(|q| {
                let p = rule.point(q);
                rule.weights[q] * powers.iter().zip(p).map(|(&k, &l)| l.powi(k)).product::<f64>()
            })
            .sum()
    }

    // average over a d-simplex of prod l_i^{k_i} = d! prod k_i! / (d + sum k)!
    fn exact_average(dim: usize, powers: &[i32]) -> f64 {
        let f = |n: i32| (1..=n).map(|i| i as f64).product::<f64>();
        let total: i32 = powers.iter().sum();
        f(dim as i32) * powers.iter().map(|&k| f(k)).product::<f64>() / f(dim as i32 + total)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "{k}");
        }
    }

    #[test]
    fn simplex_rules_are_exact_to_their_degree() {
        for dim in 1..=3 {
            for (rule, deg) in [
                (SimplexRule::degree2(dim), 2),
                (SimplexRule::degree4(dim), 4),
                (SimplexRule::gauss_duffy(dim, 5, 1), 10 - dim as i32),
                (SimplexRule::gauss_duffy(dim, 4, 3), 8 - dim as i32),
            ] {
                let n = dim + 1;
                let total = (deg as usize + 1).pow(n as u32);
                for code in 0..total {
                    let mut c = code;
                    let powers: Vec<i32> = (0..n)
                        .map(|_| {
                            let k = (c % (deg as usize + 1)) as i32;
                            c /= deg as usize + 1;
                            k
                        })
                        .collect();
                    if powers.iter().sum::<i32>() > deg {
                        continue;
                    }
                    let got = monomial_average(&rule, &powers);
                    let want = exact_average(dim, &powers);
                    assert!((got - want).abs() < 1e-12, "dim {dim} {powers:?}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn exponential_rule_matches_closed_form() {
        for &a in &[-800.0, -30.0, -1.0, 0.0, 2.0, 50.0, 1e5] {
            let (t, w) = exponential_gauss(a, 6);
            // mean of t against exp(a t): derivative of ln avg
            let mean: f64 = t.iter().zip(&w).map(|(t, w)| t * w).sum();
            let want = if a == 0.0 {
                0.5
            } else if a > 0.0 {
                1.0 / (1.0 - (-a).exp()) - 1.0 / a
            } else {
                -1.0 / a - 1.0 / (1.0 - a.exp()) + 1.0
            };
            assert!((mean - want).abs() < 1e-12, "{a}: {mean} vs {want}");
            let total: f64 = w.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "{a}: mass {total}");
        }
    }

    #[test]
    fn laguerre_moments() {
        let (x, w) = gauss_laguerre(8);
        // int_0^inf s^k e^-s ds = k!
        let mut fact = 1.0;
        for k in 0..16 {
            if k > 0 {
                fact *= k as f64;
            }
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((s - fact).abs() < 1e-10 * fact, "{k}: {s} vs {fact}");
        }
    }
}
