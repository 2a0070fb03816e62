//! Sparse matrix storage and direct solves for the per-step linear systems.
//!
//! Matrices are stored in compressed sparse row form. Solves go through a
//! banded LU factorization with partial pivoting; a reverse Cuthill-McKee
//! reordering keeps the bandwidth small for the mesh-based patterns produced
//! by the assembly routines. Factorizations are reusable across repeated
//! solves with the same operator.

use crate::error::{Error, Result};

/// Square or rectangular sparse matrix in compressed row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicate entries are summed
    /// in insertion order, so the result is deterministic for a fixed
    /// triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1, k));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;

        for &k in &order {
            let (i, j, v) = triplets[k];
            assert!(i < nrows && j < ncols, "triplet index out of range");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] = col_idx.len();
                last = Some((i, j));
            }
        }
        // rows without entries inherit the previous pointer
        for i in 1..=nrows {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry accessor; zero for positions outside the stored pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Iterate stored entries of row `i` as (col, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for (&v, &c) in self.values[lo..hi].iter().zip(self.col_idx[lo..hi].iter()) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
        y
    }

    /// vᵀ A w
    pub fn quadratic_form(&self, v: &[f64], w: &[f64]) -> f64 {
        assert_eq!(v.len(), self.nrows);
        assert_eq!(w.len(), self.ncols);
        let mut acc = 0.0;
        for i in 0..self.nrows {
            if v[i] == 0.0 {
                continue;
            }
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut row_acc = 0.0;
            for (&m, &c) in self.values[lo..hi].iter().zip(self.col_idx[lo..hi].iter()) {
                row_acc += m * w[c];
            }
            acc += v[i] * row_acc;
        }
        acc
    }

    /// Linear combination Σ cᵢ Aᵢ over matrices of identical shape.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        assert!(!terms.is_empty());
        let (nrows, ncols) = (terms[0].1.nrows, terms[0].1.ncols);
        let mut triplets = Vec::new();
        for &(c, m) in terms {
            assert_eq!((m.nrows, m.ncols), (nrows, ncols), "shape mismatch");
            if c == 0.0 {
                continue;
            }
            for i in 0..m.nrows {
                for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                    triplets.push((i, m.col_idx[k], c * m.values[k]));
                }
            }
        }
        CsrMatrix::from_triplets(nrows, ncols, &triplets)
    }

    /// Submatrix with rows and columns restricted to `keep` (in order).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut new_index = vec![usize::MAX; self.ncols.max(self.nrows)];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for k in self.row_ptr[old_i]..self.row_ptr[old_i + 1] {
                let new_j = new_index[self.col_idx[k]];
                if new_j != usize::MAX {
                    triplets.push((new_i, new_j, self.values[k]));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), keep.len(), &triplets)
    }

    /// True iff the sparsity pattern equals the pattern of the transpose.
    pub fn has_symmetric_pattern(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let lo = self.row_ptr[j];
                let hi = self.row_ptr[j + 1];
                if self.col_idx[lo..hi].binary_search(&i).is_err() {
                    return false;
                }
            }
        }
        true
    }

    /// Dense copy; intended for small matrices in tests and oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[i][self.col_idx[k]] = self.values[k];
            }
        }
        d
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern.
/// Returns `perm` with `perm[new] = old`.
fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|l| l.len()).collect();

    // BFS producing the level structure rooted at `start`.
    let bfs = |start: usize, visited: &mut Vec<bool>, order: &mut Vec<usize>| {
        let before = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = before;
        while head < order.len() {
            let u = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            next.sort_by_key(|&v| (degree[v], v));
            for v in next {
                if !visited[v] {
                    visited[v] = true;
                    order.push(v);
                }
            }
        }
    };

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    loop {
        let start = match (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
        {
            Some(s) => s,
            None => break,
        };
        // one pseudo-peripheral refinement: restart from a min-degree node of
        // the last BFS level
        let mut probe_visited = visited.clone();
        let mut probe_order = Vec::new();
        bfs(start, &mut probe_visited, &mut probe_order);
        let far = *probe_order.last().unwrap();
        bfs(far, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// LU factorization of a sparse matrix, held in banded storage after a
/// bandwidth-reducing symmetric permutation. Partial pivoting is used, so
/// nonsymmetric operators are handled.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
    /// perm[new] = old
    perm: Vec<usize>,
    /// Copy of the original operator, kept for residual verification.
    matrix: CsrMatrix,
}

/// Relative residual bound every successful solve must satisfy.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

impl LuFactorization {
    /// Factorize `a`; fails with a solver error when a zero pivot is hit.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::invalid("factorization requires a square matrix"));
        }
        let n = a.nrows();
        if n == 0 {
            return Err(Error::invalid("factorization of an empty matrix"));
        }
        let perm = rcm_ordering(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut kl = 0usize;
        let mut ku = 0usize;
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi > pj {
                    kl = kl.max(pi - pj);
                } else {
                    ku = ku.max(pj - pi);
                }
            }
        }
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        let at = |r: usize, c: usize| c * ldab + r;
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                ab[at(kl + ku + pi - pj, pj)] += v;
            }
        }

        let mut pivots = vec![0usize; n];
        for j in 0..n {
            let imax = (j + kl).min(n - 1);
            // pivot search down the column
            let mut jp = j;
            let mut best = ab[at(kl + ku, j)].abs();
            for i in (j + 1)..=imax {
                let v = ab[at(kl + ku + i - j, j)].abs();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            pivots[j] = jp;
            if best == 0.0 {
                return Err(Error::SolverFailure {
                    reason: format!("zero pivot in column {j}"),
                    residual: f64::INFINITY,
                });
            }
            let cmax = (j + ku + kl).min(n - 1);
            if jp != j {
                for c in j..=cmax {
                    ab.swap(at(kl + ku + j - c, c), at(kl + ku + jp - c, c));
                }
            }
            let piv = ab[at(kl + ku, j)];
            for i in (j + 1)..=imax {
                let m = ab[at(kl + ku + i - j, j)] / piv;
                ab[at(kl + ku + i - j, j)] = m;
                if m != 0.0 {
                    for c in (j + 1)..=cmax {
                        ab[at(kl + ku + i - c, c)] -= m * ab[at(kl + ku + j - c, c)];
                    }
                }
            }
        }

        Ok(LuFactorization {
            n,
            kl,
            ku,
            ldab,
            ab,
            pivots,
            perm,
            matrix: a.clone(),
        })
    }

    /// Solve A x = b with the cached factors. The computed solution is
    /// verified against the stored operator; a residual above
    /// `SOLVE_RESIDUAL_TOL * (1 + |b|)` is reported as a solver failure.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::invalid(format!(
                "rhs length {} does not match system size {}",
                b.len(),
                self.n
            )));
        }
        let (kl, ku, ldab) = (self.kl, self.ku, self.ldab);
        let mut y: Vec<f64> = (0..self.n).map(|new| b[self.perm[new]]).collect();

        for j in 0..self.n {
            let jp = self.pivots[j];
            if jp != j {
                y.swap(j, jp);
            }
            let imax = (j + kl).min(self.n - 1);
            let yj = y[j];
            if yj != 0.0 && imax > j {
                let col = &self.ab[j * ldab + kl + ku + 1..j * ldab + kl + ku + 1 + imax - j];
                for (yi, &m) in y[j + 1..=imax].iter_mut().zip(col.iter()) {
                    *yi -= m * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let diag = self.ab[j * ldab + kl + ku];
            y[j] /= diag;
            let yj = y[j];
            if yj != 0.0 && j > 0 {
                let imin = j.saturating_sub(ku + kl);
                let col = &self.ab[j * ldab + kl + ku - (j - imin)..j * ldab + kl + ku];
                for (yi, &m) in y[imin..j].iter_mut().zip(col.iter()) {
                    if m != 0.0 {
                        *yi -= m * yj;
                    }
                }
            }
        }

        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }

        let ax = self.matrix.matvec(&x);
        let res: Vec<f64> = ax.iter().zip(b.iter()).map(|(a, b)| a - b).collect();
        let rnorm = norm2(&res);
        if rnorm > SOLVE_RESIDUAL_TOL * (1.0 + norm2(b)) || !rnorm.is_finite() {
            return Err(Error::SolverFailure {
                reason: "residual check failed after banded solve".into(),
                residual: rnorm,
            });
        }
        Ok(x)
    }
}

/// One-shot factorize + solve.
pub fn solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LuFactorization::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.nrows();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let rhs = nalgebra::DVector::from_column_slice(b);
        let x = m.lu().solve(&rhs).expect("dense oracle solve failed");
        x.iter().copied().collect()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = CsrMatrix::identity(5);
        let b = vec![3.0, -1.0, 0.5, 2.0, 7.0];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_two_by_two() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 4.0)]);
        let x = solve(&a, &[2.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.5), (1, 0, 1.0)]);
        assert_eq!(a.get(0, 0), 3.5);
        assert_eq!(a.get(1, 0), 1.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn random_sparse_systems_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..20 {
            let n = 5 + (trial % 30);
            let mut triplets = Vec::new();
            for i in 0..n {
                triplets.push((i, i, 4.0 + rng.gen::<f64>()));
                for _ in 0..3 {
                    let j = rng.gen_range(0..n);
                    triplets.push((i, j, rng.gen::<f64>() - 0.5));
                    // keep the pattern symmetric, values need not be
                    triplets.push((j, i, rng.gen::<f64>() - 0.5));
                }
            }
            let a = CsrMatrix::from_triplets(n, n, &triplets);
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let x = solve(&a, &b).unwrap();
            let xd = dense_solve(&a, &b);
            for (u, v) in x.iter().zip(xd.iter()) {
                assert!((u - v).abs() < 1e-8, "trial {trial}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn cached_factorization_is_bitwise_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 5.0 + rng.gen::<f64>()));
            if i + 1 < n {
                triplets.push((i, i + 1, rng.gen::<f64>()));
                triplets.push((i + 1, i, rng.gen::<f64>()));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &triplets);
        let fact = LuFactorization::new(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x1 = fact.solve(&b).unwrap();
        let x2 = fact.solve(&b).unwrap();
        assert_eq!(x1, x2, "repeated solves must be bitwise identical");
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        match LuFactorization::new(&a) {
            Err(Error::SolverFailure { .. }) => {}
            other => panic!("expected solver failure, got {other:?}"),
        }
    }

    #[test]
    fn restriction_extracts_submatrix() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (2, 0, 4.0), (2, 2, 5.0)],
        );
        let r = a.restrict(&[0, 2]);
        assert_eq!(r.nrows(), 2);
        assert_eq!(r.get(0, 0), 1.0);
        assert_eq!(r.get(0, 1), 2.0);
        assert_eq!(r.get(1, 0), 4.0);
        assert_eq!(r.get(1, 1), 5.0);
    }

    #[test]
    fn symmetric_pattern_check() {
        let sym = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, -9.0)]);
        assert!(sym.has_symmetric_pattern());
        let nonsym = CsrMatrix::from_triplets(2, 2, &[(0, 1, 2.0)]);
        assert!(!nonsym.has_symmetric_pattern());
    }
}
