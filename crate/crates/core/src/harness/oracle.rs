//! Reference values of the exponential simplex averages by adaptive
//! quadrature, independent of the divided-difference evaluation.
//!
//! The innermost integral is done in closed form and the outer ones by
//! adaptive Gauss-Kronrod on intervals graded towards both ends, so thin
//! exponential layers are resolved.  Everything is scaled by the maximum of
//! the integrand, which sits at a vertex of the simplex.
#![allow(clippy::excessive_precision)]

use crate::bernoulli::Scaled;

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let d = h * GK_NODES[i];
        let s = f(c - d) + f(c + d);
        kron += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: usize) -> f64 {
    let (value, err) = whole;
    // below a few ulps of the piece the Kronrod estimate is just rounding
    if err <= tol.max(64.0 * f64::EPSILON * value.abs()).max(1e-300) || depth == 0 {
        return value;
    }
    let m = 0.5 * (a + b);
    let left = gauss_kronrod(f, a, m);
    let right = gauss_kronrod(f, m, b);
    adaptive(f, a, m, left, tol * 0.5, depth - 1) + adaptive(f, m, b, right, tol * 0.5, depth - 1)
}

/// Integral over `[0, len]` of a positive integrand with layers of width
/// about `1 / rate` at either end, to relative accuracy `rel`.
fn integrate<F: Fn(f64) -> f64>(f: F, len: f64, rate: f64, rel: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let mut cuts = vec![0.0, len];
    let mut t = if rate * len > 1.0 { 1.0 / rate } else { len };
    while t < 0.5 * len {
        cuts.push(t);
        cuts.push(len - t);
        t *= 4.0;
    }
    cuts.push(0.5 * len);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces: Vec<_> = cuts.windows(2).map(|w| (w[0], w[1], gauss_kronrod(&f, w[0], w[1]))).collect();
    let rough: f64 = pieces.iter().map(|p| p.2 .0).sum();
    let tol = rel * rough.abs();
    pieces.iter().map(|&(a, b, gk)| adaptive(&f, a, b, gk, tol, 24)).sum()
}

/// `(1 - exp(-|z|)) / |z|`, the scaled mean of `exp(z t)` on `[0, 1]`.
fn scaled_mean(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-z.abs()).exp_m1() / z.abs()
    }
}

/// `int_{s_1 + .. + s_k <= len} exp(a . s) ds`, times `exp(-shift)`.
fn corner_integral(args: &[f64], len: f64, shift: f64, rel: f64) -> f64 {
    match args {
        [] => (-shift).exp(),
        [a] => {
            let z = a * len;
            len * scaled_mean(z) * (z.max(0.0) - shift).exp()
        }
        [a, rest @ ..] => {
            let rate = args.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            integrate(|s| corner_integral(rest, len - s, shift - a * s, rel * 0.01), len, rate, rel)
        }
    }
}

/// Mean of `exp(a . s)` over the standard simplex of dimension `a.len()`.
///
/// The mean only depends on the values `0, a_1, .., a_k` at the vertices, so
/// the largest one is moved to the origin first; then every exponent is
/// non-positive and nothing cancels against the shift.
pub fn simplex_exp_average(args: &[f64]) -> Scaled {
    let mut values = vec![0.0];
    values.extend_from_slice(args);
    let top = (0..values.len()).fold(0, |m, i| if values[i] > values[m] { i } else { m });
    let shift = values[top];
    let relative: Vec<f64> = values.iter().enumerate().filter(|&(i, _)| i != top).map(|(_, v)| v - shift).collect();
    let factorial: f64 = (1..=args.len()).map(|i| i as f64).product();
    Scaled { mantissa: factorial * corner_integral(&relative, 1.0, 0.0, 1e-11), shift }
}

/// Bernoulli function of order `args.len()` (1 to 3) from the oracle
/// averages.
pub fn bernoulli(args: &[f64], eps: f64) -> f64 {
    let scaled: Vec<f64> = args.iter().map(|s| s / eps).collect();
    let den = simplex_exp_average(&scaled);
    let num = simplex_exp_average(&scaled[..scaled.len() - 1]);
    eps * num.ratio(den)
}
