//! Compressed sparse rows, a nested-dissection ordering for grid graphs, and
//! a sparse `L D Lᵀ` factorization for symmetric (possibly complex) matrices.
//!
//! The factorization is the up-looking row algorithm: row `k` of `L` is
//! obtained from a sparse triangular solve whose pattern is the reach of
//! row `k` of `A` in the elimination tree. Transposes are plain, so complex
//! symmetric systems `a M + b K` factor without conjugation.

use std::sync::Arc;

use num_traits::Float;

use crate::scalar::{Real, Scalar};

/// Sparsity pattern with sorted column indices in every row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CsrPattern {
    /// Pattern containing every `(row, col)` pair given, duplicates merged.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in entries {
            assert!(i < n && j < n, "entry ({i},{j}) outside {n}x{n}");
            rows[i].push(j);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Storage offset of entry `(i, j)`.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        self.row(i)
            .binary_search(&j)
            .ok()
            .map(|p| self.row_ptr[i] + p)
    }
}

/// Real sparse matrix on a shared pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    pattern: Arc<CsrPattern>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Sums the triplets into a matrix on `pattern`. Panics if a triplet is
    /// not in the pattern.
    pub fn from_triplets(pattern: Arc<CsrPattern>, triplets: &[(usize, usize, T)]) -> Self {
        let mut values = vec![T::zero(); pattern.nnz()];
        for &(i, j, v) in triplets {
            let p = pattern
                .find(i, j)
                .unwrap_or_else(|| panic!("({i},{j}) not in pattern"));
            values[p] += v;
        }
        Self { pattern, values }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern
            .find(i, j)
            .map(|p| self.values[p])
            .unwrap_or_else(T::zero)
    }

    /// `A x` for real or complex `x`.
    pub fn mul_vec<S: Scalar<Real = T>>(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n());
        (0..self.n())
            .map(|i| {
                let mut acc = S::zero();
                for p in self.pattern.row_range(i) {
                    acc += x[self.pattern.col_idx[p]].scale(self.values[p]);
                }
                acc
            })
            .collect()
    }

    /// Dense copy, for tests and tiny systems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.n();
        let mut d = vec![vec![T::zero(); n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            for p in self.pattern.row_range(i) {
                row[self.pattern.col_idx[p]] = self.values[p];
            }
        }
        d
    }
}

/// Nested-dissection permutation of an `nx × ny` grid graph with
/// lexicographic numbering `j·nx + i`. Returns `perm[new] = old`.
///
/// Blocks are bisected across their longer side; separators are numbered
/// after both halves. Blocks of at most 16 vertices are numbered
/// lexicographically.
pub fn nested_dissection_grid(nx: usize, ny: usize) -> Vec<usize> {
    const LEAF: usize = 16;
    let mut perm = Vec::with_capacity(nx * ny);
    let mut stack = vec![(0usize, nx, 0usize, ny, false)];
    // Iterative post-order: a block is pushed back with `true` once its
    // children are scheduled, and numbering of its separator happens then.
    while let Some((x0, x1, y0, y1, expanded)) = stack.pop() {
        let (w, h) = (x1 - x0, y1 - y0);
        if w == 0 || h == 0 {
            continue;
        }
        if w * h <= LEAF {
            for j in y0..y1 {
                for i in x0..x1 {
                    perm.push(j * nx + i);
                }
            }
            continue;
        }
        if w >= h {
            let mid = x0 + w / 2;
            if expanded {
                for j in y0..y1 {
                    perm.push(j * nx + mid);
                }
            } else {
                stack.push((x0, x1, y0, y1, true));
                stack.push((mid + 1, x1, y0, y1, false));
                stack.push((x0, mid, y0, y1, false));
            }
        } else {
            let mid = y0 + h / 2;
            if expanded {
                for i in x0..x1 {
                    perm.push(mid * nx + i);
                }
            } else {
                stack.push((x0, x1, y0, y1, true));
                stack.push((x0, x1, mid + 1, y1, false));
                stack.push((x0, x1, y0, mid, false));
            }
        }
    }
    debug_assert_eq!(perm.len(), nx * ny);
    perm
}

/// Elimination tree and column counts of `P A Pᵀ`; independent of values.
#[derive(Clone, Debug)]
pub struct LdlSymbolic {
    n: usize,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<Option<usize>>,
    col_ptr: Vec<usize>,
}

impl LdlSymbolic {
    /// `perm[new] = old`; the identity when `None`.
    pub fn analyze(pattern: &CsrPattern, perm: Option<Vec<usize>>) -> Self {
        let n = pattern.n;
        let perm = perm.unwrap_or_else(|| (0..n).collect());
        assert_eq!(perm.len(), n, "permutation length");
        let mut pinv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        assert!(pinv.iter().all(|&p| p != usize::MAX), "not a permutation");

        let mut parent = vec![None; n];
        let mut flag = vec![usize::MAX; n];
        let mut counts = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &j in pattern.row(perm[k]) {
                let mut i = pinv[j];
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i].is_none() {
                        parent[i] = Some(k);
                    }
                    counts[i] += 1;
                    flag[i] = k;
                    i = parent[i].expect("set above");
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for c in counts {
            col_ptr.push(col_ptr.last().copied().unwrap_or(0) + c);
        }
        Self {
            n,
            perm,
            pinv,
            parent,
            col_ptr,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Strictly-lower nonzeros of `L`.
    pub fn nnz_l(&self) -> usize {
        self.col_ptr[self.n]
    }
}

/// Reason a numeric factorization stopped.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroPivot {
    pub index: usize,
}

/// Numeric `P A Pᵀ = L D Lᵀ`, with `L` unit lower triangular by columns.
#[derive(Clone, Debug)]
pub struct LdlFactor<S> {
    symbolic: Arc<LdlSymbolic>,
    row_idx: Vec<usize>,
    l: Vec<S>,
    d: Vec<S>,
}

impl<S: Scalar> LdlFactor<S> {
    /// Factors the matrix with `pattern` and entry values `values`
    /// (aligned with the pattern storage).
    pub fn factor(
        symbolic: Arc<LdlSymbolic>,
        pattern: &CsrPattern,
        values: &[S],
    ) -> Result<Self, ZeroPivot> {
        let n = symbolic.n;
        assert_eq!(pattern.n, n);
        assert_eq!(values.len(), pattern.nnz());
        let nnz = symbolic.nnz_l();
        let mut row_idx = vec![0usize; nnz];
        let mut l = vec![S::zero(); nnz];
        let mut d = vec![S::zero(); n];
        let mut fill = vec![0usize; n];
        let mut y = vec![S::zero(); n];
        let mut flag = vec![usize::MAX; n];
        let mut stack = vec![0usize; n];
        let mut path = vec![0usize; n];

        let mut scale = <S::Real as num_traits::Zero>::zero();
        for v in values {
            scale = scale.max(v.modulus());
        }
        let tiny = scale * S::Real::epsilon() * S::Real::lit(1e-6);

        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let row = perm_row(&symbolic, pattern, k);
            for p in row {
                let i = symbolic.pinv[pattern.col_idx[p]];
                if i > k {
                    continue;
                }
                y[i] += values[p];
                let mut len = 0;
                let mut j = i;
                while flag[j] != k {
                    path[len] = j;
                    len += 1;
                    flag[j] = k;
                    j = symbolic.parent[j].expect("reach stays below k");
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    stack[top] = path[len];
                }
            }
            let mut dk = y[k];
            y[k] = S::zero();
            while top < n {
                let i = stack[top];
                top += 1;
                let yi = y[i];
                y[i] = S::zero();
                let start = symbolic.col_ptr[i];
                let end = start + fill[i];
                for p in start..end {
                    let r = row_idx[p];
                    y[r] -= l[p] * yi;
                }
                let lki = yi / d[i];
                dk -= lki * yi;
                row_idx[end] = k;
                l[end] = lki;
                fill[i] += 1;
            }
            if !(dk.modulus() > tiny) {
                return Err(ZeroPivot { index: k });
            }
            d[k] = dk;
        }
        Ok(Self {
            symbolic,
            row_idx,
            l,
            d,
        })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let s = &self.symbolic;
        let n = s.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<S> = s.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                x[self.row_idx[p]] -= self.l[p] * xj;
            }
        }
        for (xi, &di) in x.iter_mut().zip(&self.d) {
            *xi = *xi / di;
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for p in s.col_ptr[j]..s.col_ptr[j + 1] {
                acc -= self.l[p] * x[self.row_idx[p]];
            }
            x[j] = acc;
        }
        let mut out = vec![S::zero(); n];
        for (new, &old) in s.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    pub fn diagonal(&self) -> &[S] {
        &self.d
    }
}

#[inline]
fn perm_row(symbolic: &LdlSymbolic, pattern: &CsrPattern, k: usize) -> std::ops::Range<usize> {
    pattern.row_range(symbolic.perm[k])
}

/// `L D Lᵀ` of a symmetric tridiagonal matrix (the Thomas algorithm).
#[derive(Clone, Debug)]
pub struct TridiagonalFactor<S> {
    /// Multipliers `l_i = e_{i−1}/w_{i−1}` for `i ≥ 1`.
    l: Vec<S>,
    w: Vec<S>,
}

impl<S: Scalar> TridiagonalFactor<S> {
    /// `diag` has length `n`, `off` length `n − 1`.
    pub fn factor(diag: &[S], off: &[S]) -> Result<Self, ZeroPivot> {
        let n = diag.len();
        assert!(n > 0 && off.len() + 1 == n);
        let mut scale = <S::Real as num_traits::Zero>::zero();
        for v in diag.iter().chain(off) {
            scale = scale.max(v.modulus());
        }
        let tiny = scale * S::Real::epsilon() * S::Real::lit(1e-6);
        let mut w = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n);
        w.push(diag[0]);
        l.push(S::zero());
        for i in 1..n {
            let prev = w[i - 1];
            if !(prev.modulus() > tiny) {
                return Err(ZeroPivot { index: i - 1 });
            }
            let li = off[i - 1] / prev;
            l.push(li);
            w.push(diag[i] - li * off[i - 1]);
        }
        if !(w[n - 1].modulus() > tiny) {
            return Err(ZeroPivot { index: n - 1 });
        }
        Ok(Self { l, w })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.w.len();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 1..n {
            let prev = x[i - 1];
            x[i] -= self.l[i] * prev;
        }
        x[n - 1] = x[n - 1] / self.w[n - 1];
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] = x[i] / self.w[i] - self.l[i + 1] * next;
        }
        x
    }
}
