//! Compressed sparse row matrices and the two linear solvers: a banded LU
//! after reverse Cuthill-McKee reordering, and restarted GMRES with an ILU(0)
//! preconditioner.

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets; duplicates are summed in input order so the
    /// result does not depend on anything but the triplet sequence.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> CsrMatrix {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (r, c, v) = triplets[t];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { n_rows, n_cols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            *yr = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    /// Rows and columns restricted to `keep` (given as a map from old to
    /// new index, `None` for dropped entries).
    pub fn submatrix(&self, row_map: &[Option<usize>], col_map: &[Option<usize>], n_rows: usize, n_cols: usize) -> CsrMatrix {
        let mut triplets = Vec::new();
        for r in 0..self.n_rows {
            let Some(nr) = row_map[r] else { continue };
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(nc) = col_map[c] {
                    triplets.push((nr, nc, v));
                }
            }
        }
        CsrMatrix::from_triplets(n_rows, n_cols, &triplets)
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern:
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for &c in a.row(r).0 {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, &degree, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut root = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(adj, root);
        let max_level = *levels.iter().filter_map(|l| l.as_ref()).max().unwrap_or(&0);
        if max_level <= depth && depth > 0 {
            break;
        }
        depth = max_level;
        root = (0..adj.len())
            .filter(|&v| levels[v] == Some(max_level))
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(root);
    }
    root
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

/// Lower and upper bandwidth of `a` under the ordering `perm[new] = old`.
pub fn bandwidths(a: &CsrMatrix, perm: &[usize]) -> (usize, usize) {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let (mut kl, mut ku) = (0, 0);
    for r in 0..a.n_rows {
        for &c in a.row(r).0 {
            let (nr, nc) = (inv[r], inv[c]);
            if nr > nc {
                kl = kl.max(nr - nc);
            } else {
                ku = ku.max(nc - nr);
            }
        }
    }
    (kl, ku)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparseError {
    ZeroPivot(usize),
    NotConverged { iterations: usize, residual: f64 },
    NonFinite,
}

/// LU factorization with partial pivoting of a permuted banded matrix.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    /// Row `i` holds columns `i - kl ..= i + kl + ku`.
    data: Vec<f64>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
}

impl BandedLu {
    /// Number of stored entries needed for `a` under `perm`.
    pub fn storage_estimate(n: usize, kl: usize, ku: usize) -> usize {
        n * (2 * kl + ku + 1)
    }

    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<BandedLu, SparseError> {
        let n = a.n_rows;
        let (kl, ku) = bandwidths(a, &perm);
        let width = 2 * kl + ku + 1;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut data = vec![0.0; n * width];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let nc = inv[c];
                data[new * width + nc + kl - new] += v;
            }
        }
        let idx = |i: usize, c: usize| i * width + c + kl - i;
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = data[idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = data[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            if best == 0.0 {
                return Err(SparseError::ZeroPivot(k));
            }
            if !best.is_finite() {
                return Err(SparseError::NonFinite);
            }
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    data.swap(idx(k, c), idx(p, c));
                }
            }
            let piv = data[idx(k, k)];
            for i in k + 1..=last_row {
                let f = data[idx(i, k)] / piv;
                if f == 0.0 {
                    continue;
                }
                data[idx(i, k)] = f;
                let (ri, rk) = (i * width + kl - i, k * width + kl - k);
                for c in k + 1..=last_col {
                    data[ri + c] -= f * data[rk + c];
                }
            }
        }
        Ok(BandedLu { n, kl, ku, width, data, pivots, perm })
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, ku, width) = (self.n, self.kl, self.ku, self.width);
        let idx = |i: usize, c: usize| i * width + c + kl - i;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    y[i] -= self.data[idx(i, k)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.data[idx(k, c)] * y[c];
            }
            y[k] = s / self.data[idx(k, k)];
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Incomplete LU with the sparsity pattern of the matrix.
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Ilu0 {
        // make sure every diagonal entry is stored
        let mut triplets = Vec::with_capacity(a.nnz() + a.n_rows);
        for r in 0..a.n_rows {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((r, c, v));
            }
            triplets.push((r, r, 0.0));
        }
        let mut lu = CsrMatrix::from_triplets(a.n_rows, a.n_cols, &triplets);
        let n = lu.n_rows;
        let diag: Vec<usize> = (0..n)
            .map(|r| lu.row_ptr[r] + lu.row(r).0.binary_search(&r).unwrap())
            .collect();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos[lu.col_idx[k]] = k;
            }
            for kk in start..end {
                let k = lu.col_idx[kk];
                if k >= i {
                    break;
                }
                let dk = lu.values[diag[k]];
                let f = if dk != 0.0 { lu.values[kk] / dk } else { 0.0 };
                lu.values[kk] = f;
                for jj in diag[k] + 1..lu.row_ptr[k + 1] {
                    let j = lu.col_idx[jj];
                    if pos[j] != usize::MAX {
                        lu.values[pos[j]] -= f * lu.values[jj];
                    }
                }
            }
            for k in start..end {
                pos[lu.col_idx[k]] = usize::MAX;
            }
            if lu.values[diag[i]] == 0.0 {
                lu.values[diag[i]] = 1e-14;
            }
        }
        Ilu0 { lu, diag }
    }

    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.n_rows;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in self.lu.row_ptr[i]..self.diag[i] {
                s -= self.lu.values[k] * y[self.lu.col_idx[k]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in self.diag[i] + 1..self.lu.row_ptr[i + 1] {
                s -= self.lu.values[k] * y[self.lu.col_idx[k]];
            }
            y[i] = s / self.lu.values[self.diag[i]];
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresSettings {
    pub restart: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for GmresSettings {
    fn default() -> Self {
        GmresSettings { restart: 200, max_iterations: 20_000, tolerance: 1e-12 }
    }
}

/// Right-preconditioned restarted GMRES.  Returns the solution and the
/// number of iterations.
pub fn gmres(a: &CsrMatrix, b: &[f64], pre: &Ilu0, settings: &GmresSettings) -> Result<(Vec<f64>, usize), SparseError> {
    let n = a.n_rows;
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let m = settings.restart.max(1);
    let mut total = 0;
    let mut residual: f64;
    while total < settings.max_iterations {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        residual = beta / bnorm;
        if residual <= settings.tolerance {
            return Ok((x, total));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut steps = 0;
        for j in 0..m {
            let zj = pre.apply(&v[j]);
            let mut w = a.mul_vec(&zj);
            z.push(zj);
            for i in 0..=j {
                let hij = dot(&w, &v[i]);
                h[i][j] = hij;
                w.iter_mut().zip(&v[i]).for_each(|(w, v)| *w -= hij * v);
            }
            let wn = norm(&w);
            h[j + 1][j] = wn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                return Err(SparseError::NonFinite);
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            steps = j + 1;
            total += 1;
            residual = g[j + 1].abs() / bnorm;
            if residual <= settings.tolerance || wn == 0.0 || total >= settings.max_iterations {
                break;
            }
            v.push(w.iter().map(|w| w / wn).collect());
        }
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let s: f64 = (i + 1..steps).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            x.iter_mut().zip(&z[k]).for_each(|(x, z)| *x += yk * z);
        }
        if !residual.is_finite() {
            return Err(SparseError::NonFinite);
        }
    }
    // final check with the true residual
    let ax = a.mul_vec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let true_res = norm(&r) / bnorm;
    if true_res <= settings.tolerance * 10.0 {
        Ok((x, total))
    } else {
        Err(SparseError::NotConverged { iterations: total, residual: true_res })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Nonsymmetric convection-diffusion stencil on an `m x m` grid.
    fn grid_matrix(m: usize) -> CsrMatrix {
        let n = m * m;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                let r = j * m + i;
                t.push((r, r, 4.5));
                if i > 0 {
                    t.push((r, r - 1, -1.6));
                }
                if i + 1 < m {
                    t.push((r, r + 1, -0.4));
                }
                if j > 0 {
                    t.push((r, r - m, -1.2));
                }
                if j + 1 < m {
                    t.push((r, r + m, -0.8));
                }
            }
        }
        // shuffle the numbering so the ordering matters
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        let t: Vec<_> = t.into_iter().map(|(r, c, v)| (p[r], p[c], v)).collect();
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, 2, &[(1, 0, 1.0), (0, 1, 2.0), (1, 0, 0.5)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(1, 0), 1.5);
        assert_eq!(a.get(0, 0), 0.0);
    }

    #[test]
    fn rcm_reduces_bandwidth() {
        let a = grid_matrix(20);
        let identity: Vec<usize> = (0..a.n_rows).collect();
        let (kl0, _) = bandwidths(&a, &identity);
        let (kl, ku) = bandwidths(&a, &reverse_cuthill_mckee(&a));
        assert!(kl <= 25 && ku <= 25, "{kl} {ku}");
        assert!(kl < kl0);
    }

    #[test]
    fn direct_and_iterative_agree() {
        let a = grid_matrix(15);
        let x_true: Vec<f64> = (0..a.n_rows).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x_true);
        let lu = BandedLu::factor(&a, reverse_cuthill_mckee(&a)).unwrap();
        let x = lu.solve(&b);
        let err = x.iter().zip(&x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let (x, iters) = gmres(&a, &b, &Ilu0::new(&a), &GmresSettings::default()).unwrap();
        let err = x.iter().zip(&x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        assert!(iters < 100);
    }

    #[test]
    fn banded_lu_pivots() {
        // zero leading diagonal forces a row interchange
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 1, 1.0), (1, 0, 2.0), (1, 1, 1.0), (2, 2, 3.0), (2, 1, 1.0)]);
        let lu = BandedLu::factor(&a, vec![0, 1, 2]).unwrap();
        let x = lu.solve(&[1.0, 4.0, 7.0]);
        assert!((x[1] - 1.0).abs() < 1e-15 && (x[0] - 1.5).abs() < 1e-15 && (x[2] - 2.0).abs() < 1e-15);
    }
}
