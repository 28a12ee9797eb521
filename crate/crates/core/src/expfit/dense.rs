//! Small dense solves for the local point systems (at most 7 unknowns).

/// Pivot size, relative to the equilibrated matrix norm, below which the
/// partial-pivoting factorization is not trusted.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    /// `n x m`, row-major.
    pub x: Vec<f64>,
    /// Sign and log-magnitude of the determinant of the original matrix.
    pub det_sign: f64,
    pub log_abs_det: f64,
    /// Smallest pivot magnitude over the row-equilibrated matrix norm.
    pub min_pivot_ratio: f64,
    /// Set when the fallback with complete pivoting and refinement ran.
    pub refined: bool,
    /// Normwise backward error of the computed solution.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseError {
    Singular,
    NonFinite,
}

/// Solve `A X = B` for `A` of size `n x n` and `B` of size `n x m`.
pub fn solve(a: &[f64], n: usize, b: &[f64], m: usize) -> Result<DenseSolution, DenseError> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * m);
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(DenseError::NonFinite);
    }
    // row equilibration
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    let mut log_scale = 0.0;
    let mut scale_sign = 1.0;
    for i in 0..n {
        let r = sa[i * n..(i + 1) * n].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if r == 0.0 {
            return Err(DenseError::Singular);
        }
        // power-of-two scaling keeps the equilibration exact
        let s = 2f64.powi(-(r.log2().round() as i32));
        sa[i * n..(i + 1) * n].iter_mut().for_each(|v| *v *= s);
        sb[i * m..(i + 1) * m].iter_mut().for_each(|v| *v *= s);
        log_scale += s.ln();
        scale_sign *= s.signum();
    }
    let norm = (0..n)
        .map(|i| sa[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);

    let (lu, perm, sign, min_pivot) = factor_partial(&sa, n);
    let ratio = min_pivot / norm;
    let (x, det_scaled, min_pivot_ratio, refined) = if ratio >= PIVOT_TOLERANCE {
        let x = lu_solve(&lu, &perm, None, n, &sb, m);
        let det: f64 = sign * (0..n).map(|i| lu[i * n + i]).product::<f64>();
        (x, det, ratio, false)
    } else {
        let (lu, rp, cp, sign, min_pivot) = factor_complete(&sa, n);
        if min_pivot == 0.0 || !min_pivot.is_finite() {
            return Err(DenseError::Singular);
        }
        let mut x = lu_solve(&lu, &rp, Some(&cp), n, &sb, m);
        for _ in 0..3 {
            let r = compensated_residual(&sa, n, &x, &sb, m);
            let dx = lu_solve(&lu, &rp, Some(&cp), n, &r, m);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        }
        let det: f64 = sign * (0..n).map(|i| lu[i * n + i]).product::<f64>();
        (x, det, min_pivot / norm, true)
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DenseError::NonFinite);
    }
    let r = compensated_residual(&sa, n, &x, &sb, m);
    let xnorm = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let bnorm = sb.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let rnorm = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let denom = norm * xnorm + bnorm;
    let residual = if denom > 0.0 { rnorm / denom } else { 0.0 };
    let det_sign = scale_sign * det_scaled.signum();
    let log_abs_det = det_scaled.abs().ln() - log_scale;
    Ok(DenseSolution { x, det_sign, log_abs_det, min_pivot_ratio, refined, residual })
}

fn factor_partial(a: &[f64], n: usize) -> (Vec<f64>, Vec<usize>, f64, f64) {
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
            .unwrap();
        if p != k {
            for c in 0..n {
                lu.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let piv = lu[k * n + k];
        min_pivot = min_pivot.min(piv.abs());
        if piv == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let f = lu[i * n + k] / piv;
            lu[i * n + k] = f;
            for c in k + 1..n {
                lu[i * n + c] -= f * lu[k * n + c];
            }
        }
    }
    (lu, perm, sign, min_pivot)
}

#[allow(clippy::type_complexity)]
fn factor_complete(a: &[f64], n: usize) -> (Vec<f64>, Vec<usize>, Vec<usize>, f64, f64) {
    let mut lu = a.to_vec();
    let mut rp: Vec<usize> = (0..n).collect();
    let mut cp: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = lu[i * n + j].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if pi != k {
            for c in 0..n {
                lu.swap(k * n + c, pi * n + c);
            }
            rp.swap(k, pi);
            sign = -sign;
        }
        if pj != k {
            for r in 0..n {
                lu.swap(r * n + k, r * n + pj);
            }
            cp.swap(k, pj);
            sign = -sign;
        }
        let piv = lu[k * n + k];
        min_pivot = min_pivot.min(piv.abs());
        if piv == 0.0 {
            return (lu, rp, cp, sign, 0.0);
        }
        for i in k + 1..n {
            let f = lu[i * n + k] / piv;
            lu[i * n + k] = f;
            for c in k + 1..n {
                lu[i * n + c] -= f * lu[k * n + c];
            }
        }
    }
    (lu, rp, cp, sign, min_pivot)
}

fn lu_solve(lu: &[f64], rp: &[usize], cp: Option<&[usize]>, n: usize, b: &[f64], m: usize) -> Vec<f64> {
    let mut y = vec![0.0; n * m];
    for i in 0..n {
        for c in 0..m {
            y[i * m + c] = b[rp[i] * m + c];
        }
    }
    for i in 0..n {
        for k in 0..i {
            let f = lu[i * n + k];
            for c in 0..m {
                y[i * m + c] -= f * y[k * m + c];
            }
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let f = lu[i * n + k];
            for c in 0..m {
                y[i * m + c] -= f * y[k * m + c];
            }
        }
        let d = lu[i * n + i];
        for c in 0..m {
            y[i * m + c] /= d;
        }
    }
    match cp {
        None => y,
        Some(cp) => {
            let mut x = vec![0.0; n * m];
            for i in 0..n {
                for c in 0..m {
                    x[cp[i] * m + c] = y[i * m + c];
                }
            }
            x
        }
    }
}

/// `B - A X` accumulated with error-free transformations.
fn compensated_residual(a: &[f64], n: usize, x: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut r = vec![0.0; n * m];
    for i in 0..n {
        for c in 0..m {
            let mut s = b[i * m + c];
            let mut comp = 0.0;
            for k in 0..n {
                let p = -a[i * n + k] * x[k * m + c];
                let pe = (-a[i * n + k]).mul_add(x[k * m + c], -p);
                let t = s + p;
                let bp = t - s;
                let se = (s - (t - bp)) + (p - bp);
                s = t;
                comp += se + pe;
            }
            r[i * m + c] = s + comp;
        }
    }
    r
}
