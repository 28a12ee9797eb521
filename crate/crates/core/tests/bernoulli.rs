use expfit::bernoulli::{bernoulli1, bernoulli2, bernoulli3, simplex_exp_average, BernoulliError};
use proptest::prelude::*;

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            ((1.0 - x) / 2.0, 1.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite rule on [0, 1].
fn integrate(f: &dyn Fn(f64) -> f64) -> f64 {
    const PANELS: usize = 16;
    let rule = gauss_legendre(16);
    let h = 1.0 / PANELS as f64;
    (0..PANELS)
        .map(|p| rule.iter().map(|&(t, w)| w * h * f(h * (p as f64 + t))).sum::<f64>())
        .sum()
}

/// Integral of `exp(a . s)` over the standard simplex of dimension `a.len()`,
/// peeling off the last coordinate: the remaining simplex is scaled by `1 - t`.
fn simplex_integral(a: &[f64]) -> f64 {
    match a {
        [] => 1.0,
        [b] if b.abs() < 1e-8 => 1.0 + b / 2.0,
        [b] => b.exp_m1() / b,
        [rest @ .., last] => {
            let k = a.len() as i32;
            integrate(&|t| {
                let inner: Vec<f64> = rest.iter().map(|r| r * (1.0 - t)).collect();
                (last * t).exp() * (1.0 - t).powi(k - 1) * simplex_integral(&inner)
            })
        }
    }
}

fn average(a: &[f64]) -> f64 {
    let fact: f64 = (1..=a.len()).map(|k| k as f64).product();
    fact * simplex_integral(a)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn reference_values() {
    assert_eq!(simplex_exp_average(&[0.0]).unwrap(), 1.0);
    assert_eq!(simplex_exp_average(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
    assert!(rel(simplex_exp_average(&[1.0]).unwrap(), std::f64::consts::E - 1.0) < 1e-15);
    assert!(rel(simplex_exp_average(&[3.0, -2.0]).unwrap(), average(&[3.0, -2.0])) < 1e-11);

    assert_eq!(bernoulli1(0.0, 0.7).unwrap(), 0.7);
    assert!(rel(bernoulli1(1.0, 1.0).unwrap(), 1.0 / (std::f64::consts::E - 1.0)) < 1e-14);
    assert!(rel(bernoulli1(-50.0, 1.0).unwrap(), 50.0) < 1e-9);
    assert_eq!(bernoulli2(0.0, 0.0, 1.0).unwrap(), 1.0);
    assert!(rel(bernoulli2(2.0, -1.0, 1.0).unwrap(), average(&[2.0]) / average(&[2.0, -1.0])) < 1e-10);
    let confluent = bernoulli2(5.0, 5.0, 1.0).unwrap();
    assert!(confluent > 0.0 && rel(confluent, average(&[5.0]) / average(&[5.0, 5.0])) < 1e-10);
}

#[test]
fn quadrature_oracle_is_sound() {
    // closed form of the triangle average with distinct nodes
    let (a, b) = (1.5f64, -0.5f64);
    let exact = 2.0 * ((a.exp() - 1.0) / a - (b.exp() - 1.0) / b) / (a - b);
    assert!(rel(average(&[a, b]), exact) < 1e-13);
}

#[test]
fn invalid_input_is_rejected() {
    assert!(matches!(bernoulli1(1.0, 0.0), Err(BernoulliError::InvalidEpsilon(_))));
    assert!(matches!(bernoulli2(1.0, 1.0, -1.0), Err(BernoulliError::InvalidEpsilon(_))));
    assert!(matches!(bernoulli3(1.0, f64::NAN, 1.0, 1.0), Err(BernoulliError::NonFinite(_))));
    assert!(simplex_exp_average(&[f64::INFINITY]).is_err());
    assert!(simplex_exp_average(&[]).is_err());
}

#[test]
fn large_arguments_neither_overflow_nor_vanish() {
    for s in [700.0, -700.0, 1e6, -1e6] {
        for v in [bernoulli1(s, 1.0), bernoulli2(s, -s, 1.0), bernoulli3(s, 0.5 * s, -s, 1.0)] {
            let v = v.unwrap();
            assert!(v > 0.0 && v.is_finite(), "{s}: {v}");
        }
    }
    assert!(rel(bernoulli1(-1e6, 1.0).unwrap(), 1e6) < 1e-12);
}

proptest! {
    #[test]
    fn averages_match_quadrature(a in prop::collection::vec(-20.0f64..20.0, 1..=3)) {
        let got = simplex_exp_average(&a).unwrap();
        prop_assert!(rel(got, average(&a)) < 1e-10, "{a:?}: {got} vs {}", average(&a));
    }

    #[test]
    fn averages_are_permutation_invariant(a in -30.0f64..30.0, b in -30.0f64..30.0, c in -30.0f64..30.0) {
        let base = simplex_exp_average(&[a, b, c]).unwrap();
        for p in [[a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            prop_assert!(rel(simplex_exp_average(&p).unwrap(), base) < 1e-12);
        }
        prop_assert!(rel(simplex_exp_average(&[b, a]).unwrap(), simplex_exp_average(&[a, b]).unwrap()) < 1e-12);
    }

    #[test]
    fn bernoulli_matches_quadrature(s in prop::collection::vec(-20.0f64..20.0, 3), eps in 0.5f64..2.0) {
        let a: Vec<f64> = s.iter().map(|v| v / eps).collect();
        prop_assert!(rel(bernoulli1(s[0], eps).unwrap(), eps / average(&a[..1])) < 1e-10);
        prop_assert!(rel(bernoulli2(s[0], s[1], eps).unwrap(), eps * average(&a[..1]) / average(&a[..2])) < 1e-10);
        prop_assert!(rel(bernoulli3(s[0], s[1], s[2], eps).unwrap(), eps * average(&a[..2]) / average(&a)) < 1e-10);
    }

    #[test]
    fn positive_and_finite(r in prop::collection::vec(-1e6f64..1e6, 3), log_eps in -6.0f64..0.0) {
        let eps = 10f64.powf(log_eps);
        let s: Vec<f64> = r.iter().map(|v| v * eps).collect();
        for v in [bernoulli1(s[0], eps), bernoulli2(s[0], s[1], eps), bernoulli3(s[0], s[1], s[2], eps)] {
            let v = v.unwrap();
            prop_assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn reflection_identity(s in -40.0f64..40.0, eps in 1e-2f64..10.0) {
        // B(-s) - B(s) = s
        let lhs = bernoulli1(-s, eps).unwrap() - bernoulli1(s, eps).unwrap();
        prop_assert!((lhs - s).abs() <= 1e-12 * (s.abs() + eps) * 4.0);
    }

    #[test]
    fn homogeneous_of_degree_one(s in prop::collection::vec(-30.0f64..30.0, 3), scale in 1e-3f64..1e3) {
        let t: Vec<f64> = s.iter().map(|v| v * scale).collect();
        prop_assert!(rel(bernoulli1(t[0], scale).unwrap(), scale * bernoulli1(s[0], 1.0).unwrap()) < 1e-12);
        prop_assert!(rel(bernoulli2(t[0], t[1], scale).unwrap(), scale * bernoulli2(s[0], s[1], 1.0).unwrap()) < 1e-12);
        prop_assert!(rel(bernoulli3(t[0], t[1], t[2], scale).unwrap(), scale * bernoulli3(s[0], s[1], s[2], 1.0).unwrap()) < 1e-12);
    }

    #[test]
    fn first_order_is_decreasing(s in -50.0f64..50.0, ds in 1e-3f64..5.0) {
        prop_assert!(bernoulli1(s + ds, 1.0).unwrap() < bernoulli1(s, 1.0).unwrap());
    }
}
