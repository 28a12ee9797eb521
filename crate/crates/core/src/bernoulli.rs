//! Exponential simplex averages and the Bernoulli functions built from them.
//!
//! For nodes `a_1..a_k`, the simplex average
//! `avg_k(a) = k! * dd[0, a_1, .., a_k](exp)` is the mean of `exp(a . s)` over
//! the standard `k`-simplex.  The Bernoulli functions are ratios of these
//! averages scaled by the diffusion coefficient:
//!
//! * `B1(s) = eps / avg_1(s/eps)`
//! * `B2(s1, s2) = eps * avg_1(s1/eps) / avg_2(s1/eps, s2/eps)`
//! * `B3(s1, s2, s3) = eps * avg_2(s1/eps, s2/eps) / avg_3(s1/eps, s2/eps, s3/eps)`
//!
//! All arithmetic is carried out on scaled values `mantissa * exp(shift)`, so
//! the ratios stay finite long after the averages themselves overflow.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BernoulliError {
    #[error("diffusion coefficient must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("non-finite argument {0}")]
    NonFinite(f64),
    #[error("simplex average needs between 1 and {max} nodes, got {got}")]
    Arity { got: usize, max: usize },
}

/// Node spread below which the Taylor expansion about the midpoint is used.
const SERIES_SPREAD: f64 = 1.0;
const MAX_NODES: usize = 8;

/// A positive number stored as `mantissa * exp(shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub shift: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        self.mantissa * self.shift.exp()
    }

    pub fn ln(self) -> f64 {
        self.mantissa.ln() + self.shift
    }

    /// `self / other` as a plain float.
    pub fn ratio(self, other: Scaled) -> f64 {
        (self.shift - other.shift).exp() * (self.mantissa / other.mantissa)
    }

    fn scale(self, f: f64) -> Scaled {
        Scaled { mantissa: self.mantissa * f, shift: self.shift }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Divided difference of `exp` over sorted nodes, as a scaled value.
fn exp_divided_difference(nodes: &[f64]) -> Scaled {
    let n = nodes.len();
    debug_assert!(n >= 1);
    let lo = nodes[0];
    let hi = nodes[n - 1];
    match n {
        1 => Scaled { mantissa: 1.0, shift: lo },
        2 => {
            let d = hi - lo;
            let m = if d == 0.0 { 1.0 } else { -(-d).exp_m1() / d };
            Scaled { mantissa: m, shift: hi }
        }
        _ if hi - lo <= SERIES_SPREAD => series_divided_difference(nodes),
        _ => {
            let left = exp_divided_difference(&nodes[..n - 1]);
            let right = exp_divided_difference(&nodes[1..]);
            let shift = left.shift.max(right.shift);
            let m = (right.mantissa * (right.shift - shift).exp()
                - left.mantissa * (left.shift - shift).exp())
                / (hi - lo);
            Scaled { mantissa: m, shift }
        }
    }
}

/// Taylor expansion about the midpoint of clustered nodes:
/// `dd[x_0..x_k] = e^c * sum_m h_m(x - c) / (m + k)!` with `h_m` the complete
/// homogeneous symmetric polynomials.
fn series_divided_difference(nodes: &[f64]) -> Scaled {
    let k = nodes.len() - 1;
    let c = 0.5 * (nodes[0] + nodes[k]);
    // h[m] for the prefix of nodes processed so far, built with the
    // recurrence h_m(y_1..y_j) = h_m(y_1..y_{j-1}) + y_j h_{m-1}(y_1..y_j).
    const TERMS: usize = 40;
    let mut h = [0.0f64; TERMS];
    h[0] = 1.0;
    let mut first = true;
    for &x in nodes {
        let y = x - c;
        if first {
            let mut p = 1.0;
            for hm in h.iter_mut() {
                *hm = p;
                p *= y;
            }
            first = false;
        } else {
            for m in 1..TERMS {
                h[m] += y * h[m - 1];
            }
        }
    }
    // |h_m| <= C(m + k, k) r^m, so the m-th term is bounded by r^m / (k! m!)
    let r = nodes.iter().fold(0.0f64, |acc, &x| acc.max((x - c).abs()));
    let mut sum = 0.0;
    let mut inv_fact = 1.0 / factorial(k);
    let mut bound = inv_fact;
    for (m, hm) in h.iter().enumerate() {
        sum += hm * inv_fact;
        bound *= r / (m + 1) as f64;
        if bound <= 1e-18 * sum.abs() {
            break;
        }
        inv_fact /= (m + k + 1) as f64;
    }
    Scaled { mantissa: sum, shift: c }
}

fn check_args(args: &[f64]) -> Result<(), BernoulliError> {
    if args.is_empty() || args.len() > MAX_NODES {
        return Err(BernoulliError::Arity { got: args.len(), max: MAX_NODES });
    }
    if let Some(&bad) = args.iter().find(|a| !a.is_finite()) {
        return Err(BernoulliError::NonFinite(bad));
    }
    Ok(())
}

/// Scaled form of [`simplex_exp_average`]; never overflows.
pub fn simplex_exp_average_scaled(args: &[f64]) -> Result<Scaled, BernoulliError> {
    check_args(args)?;
    let mut nodes = [0.0f64; MAX_NODES + 1];
    nodes[1..=args.len()].copy_from_slice(args);
    let nodes = &mut nodes[..=args.len()];
    nodes.sort_by(f64::total_cmp);
    let dd = exp_divided_difference(nodes);
    Ok(dd.scale(factorial(args.len())))
}

/// Mean of `exp(a . s)` over the standard simplex of dimension `a.len()`,
/// i.e. `k! * dd[0, a_1, .., a_k](exp)`.
pub fn simplex_exp_average(args: &[f64]) -> Result<f64, BernoulliError> {
    simplex_exp_average_scaled(args).map(Scaled::value)
}

fn check_eps(eps: f64) -> Result<(), BernoulliError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(BernoulliError::InvalidEpsilon(eps))
    }
}

/// Clamp underflowed ratios to the smallest normal float so the Bernoulli
/// functions stay strictly positive.
fn positive(v: f64) -> f64 {
    if v < f64::MIN_POSITIVE {
        f64::MIN_POSITIVE
    } else {
        v
    }
}

pub fn bernoulli1(s: f64, eps: f64) -> Result<f64, BernoulliError> {
    check_eps(eps)?;
    let a = simplex_exp_average_scaled(&[s / eps])?;
    Ok(positive(eps * Scaled { mantissa: 1.0, shift: 0.0 }.ratio(a)))
}

pub fn bernoulli2(s1: f64, s2: f64, eps: f64) -> Result<f64, BernoulliError> {
    check_eps(eps)?;
    let num = simplex_exp_average_scaled(&[s1 / eps])?;
    let den = simplex_exp_average_scaled(&[s1 / eps, s2 / eps])?;
    Ok(positive(eps * num.ratio(den)))
}

pub fn bernoulli3(s1: f64, s2: f64, s3: f64, eps: f64) -> Result<f64, BernoulliError> {
    check_eps(eps)?;
    let num = simplex_exp_average_scaled(&[s1 / eps, s2 / eps])?;
    let den = simplex_exp_average_scaled(&[s1 / eps, s2 / eps, s3 / eps])?;
    Ok(positive(eps * num.ratio(den)))
}

/// Source of Bernoulli values used by the local element constructions.
///
/// The production implementation is [`StableBernoulli`]; the property suite
/// swaps in deliberately broken kernels to check that it notices.
pub trait BernoulliKernel: Sync + Send {
    fn b1(&self, s: f64, eps: f64) -> Result<f64, BernoulliError>;
    fn b2(&self, s1: f64, s2: f64, eps: f64) -> Result<f64, BernoulliError>;
    fn b3(&self, s1: f64, s2: f64, s3: f64, eps: f64) -> Result<f64, BernoulliError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StableBernoulli;

impl BernoulliKernel for StableBernoulli {
    fn b1(&self, s: f64, eps: f64) -> Result<f64, BernoulliError> {
        bernoulli1(s, eps)
    }
    fn b2(&self, s1: f64, s2: f64, eps: f64) -> Result<f64, BernoulliError> {
        bernoulli2(s1, s2, eps)
    }
    fn b3(&self, s1: f64, s2: f64, s3: f64, eps: f64) -> Result<f64, BernoulliError> {
        bernoulli3(s1, s2, s3, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn first_order_closed_form() {
        for &a in &[-30.0f64, -1.0, -1e-9, 0.0, 1e-12, 0.3, 2.0, 40.0] {
            let expect = if a == 0.0 { 1.0 } else { a.exp_m1() / a };
            assert!(rel(simplex_exp_average(&[a]).unwrap(), expect) < 1e-15, "{a}");
        }
    }

    #[test]
    fn second_order_closed_form() {
        // avg_2(a, b) = 2 (b e^a - a e^b + a - b) / (a b (a - b)) for distinct nonzero nodes
        for &(a, b) in &[(1.5f64, -2.0f64), (5.0, 7.5), (-12.0, 3.0), (20.0, -20.0)] {
            let expect = 2.0 * (b * a.exp() - a * b.exp() + a - b) / (a * b * (a - b));
            assert!(rel(simplex_exp_average(&[a, b]).unwrap(), expect) < 1e-13);
        }
    }

    #[test]
    fn confluent_nodes() {
        // all nodes equal to a: k! dd = k! e^a / k! ... average over simplex of e^{a * sum s}
        // equals avg of e^{a t} against the density of t = sum s_i, which for all
        // nodes zero is 1.
        assert!(rel(simplex_exp_average(&[0.0, 0.0, 0.0]).unwrap(), 1.0) < 1e-15);
        // nodes (a, a): 2 dd[0, a, a] = 2 (e^a (a - 1) + 1) / a^2
        let a = 3.0f64;
        let expect = 2.0 * (a.exp() * (a - 1.0) + 1.0) / (a * a);
        assert!(rel(simplex_exp_average(&[a, a]).unwrap(), expect) < 1e-14);
    }

    #[test]
    fn symmetric_cluster() {
        // nodes symmetric about their midpoint make every odd term vanish
        let v = simplex_exp_average(&[0.2, 0.4]).unwrap();
        assert!(rel(v, 1.208_929_628_669_150_25 * simplex_exp_average(&[0.2, 0.4, -0.6]).unwrap()) < 1e-15);
    }

    #[test]
    fn symmetric_in_arguments() {
        let v = simplex_exp_average(&[3.0, -40.0, 0.7]).unwrap();
        let w = simplex_exp_average(&[-40.0, 0.7, 3.0]).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn beta_zero_gives_eps() {
        for eps in [1.0, 1e-3, 1e-8] {
            assert!(rel(bernoulli1(0.0, eps).unwrap(), eps) < 1e-15);
            assert!(rel(bernoulli2(0.0, 0.0, eps).unwrap(), eps) < 1e-15);
            assert!(rel(bernoulli3(0.0, 0.0, 0.0, eps).unwrap(), eps) < 1e-15);
        }
    }

    #[test]
    fn classical_bernoulli_identity() {
        // B1(s) = s / (e^s - 1) for eps = 1, and B1(-s) = B1(s) + s
        for &s in &[-5.0f64, -0.1, 0.2, 3.0, 25.0] {
            let b = bernoulli1(s, 1.0).unwrap();
            assert!(rel(b, s / s.exp_m1()) < 1e-14);
            assert!(rel(bernoulli1(-s, 1.0).unwrap(), b + s) < 1e-13);
        }
    }

    #[test]
    fn extreme_arguments_stay_positive() {
        for &s in &[1e6, -1e6, 700.0, -700.0] {
            for v in [
                bernoulli1(s, 1.0).unwrap(),
                bernoulli2(s, -s, 1.0).unwrap(),
                bernoulli2(-s, s, 1.0).unwrap(),
                bernoulli3(s, 0.5 * s, -s, 1.0).unwrap(),
                bernoulli3(-s, s, 0.0, 1.0).unwrap(),
            ] {
                assert!(v.is_finite() && v > 0.0, "{s} -> {v}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bernoulli1(1.0, 0.0).is_err());
        assert!(bernoulli1(1.0, -1.0).is_err());
        assert!(bernoulli2(f64::NAN, 1.0, 1.0).is_err());
        assert!(simplex_exp_average(&[]).is_err());
    }
}
