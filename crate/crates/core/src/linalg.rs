//! Small dense and sparse linear algebra used by the constructions and solvers.
//!
//! Dense systems here are at most a few hundred unknowns (Hermite fits,
//! interior collocation, extraction operators). The global Galerkin systems are
//! sparse and symmetric positive definite; they are factored with an envelope
//! Cholesky after a reverse Cuthill-McKee reordering.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`
    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * xi;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    /// `Eᵀ K E` for a square `K` (`self`).
    pub fn congruence(&self, e: &Self) -> Self {
        e.transpose().mul(&self.mul(e))
    }

    pub fn norm1(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
    norm1: T,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!("LU of {}x{} matrix", a.rows(), a.cols())));
        }
        let n = a.rows();
        let norm1 = a.norm1();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = norm1 * T::epsilon() * T::epsilon();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tiny) {
                return Err(Error::SingularSystem(format!("zero pivot in column {k} of {n}x{n} system")));
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - f * v;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix<T> {
        let mut inv = DenseMatrix::zeros(self.n, self.n);
        let mut e = vec![T::zero(); self.n];
        for j in 0..self.n {
            e[j] = T::one();
            inv.set_column(j, &self.solve(&e));
            e[j] = T::zero();
        }
        inv
    }

    /// 1-norm condition number, computed from the explicit inverse.
    pub fn condition_number(&self) -> T {
        self.norm1 * self.inverse().norm1()
    }
}

pub fn solve_dense<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    Ok(Lu::factor(a)?.solve(b))
}

/// Least-squares solution of an overdetermined system via Householder QR.
/// Returns the solution and the residual vector `b - A x`.
pub fn least_squares<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n || b.len() != m {
        return Err(Error::DimensionMismatch(format!("least squares {m}x{n} with rhs {}", b.len())));
    }
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::SingularSystem(format!("rank deficient column {k}")));
        }
        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().map(|&x| x * x).sum::<T>();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::one() + T::one();
        for j in k..n {
            let s = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<T>() * two / vnorm2;
            for i in k..m {
                r[(i, j)] = r[(i, j)] - s * v[i - k];
            }
        }
        let s = (k..m).map(|i| v[i - k] * qtb[i]).sum::<T>() * two / vnorm2;
        for i in k..m {
            qtb[i] = qtb[i] - s * v[i - k];
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = qtb[i];
        for j in i + 1..n {
            s = s - r[(i, j)] * x[j];
        }
        if r[(i, i)] == T::zero() {
            return Err(Error::SingularSystem(format!("rank deficient column {i}")));
        }
        x[i] = s / r[(i, i)];
    }
    let ax = a.mul_vec(&x);
    let residual = b.iter().zip(&ax).map(|(&bi, &yi)| bi - yi).collect();
    Ok((x, residual))
}

/// Dense Cholesky factor `A = L Lᵀ` (lower triangle stored).
#[derive(Clone, Debug)]
pub struct DenseCholesky<T> {
    l: DenseMatrix<T>,
}

impl<T: Real> DenseCholesky<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite { index: j, value: to_f64(d) });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }
}

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds the matrix from triplets; duplicates are summed in input order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1, t));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (i, j, v) = triplets[t];
            assert!(i < n_rows && j < n_cols, "triplet ({i}, {j}) out of range");
            if last == Some((i, j)) {
                let l = values.len() - 1;
                values[l] = values[l] + v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n_rows, n_cols, row_ptr, col_idx, values }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows).map(|i| self.row(i).fold(T::zero(), |s, (j, v)| s + v * x[j])).collect()
    }

    pub fn quadratic_form(&self, x: &[T]) -> T {
        crate::linalg::dot(x, &self.mul_vec(x))
    }

    /// Maximum of `|A_ij - A_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> T {
        let scale = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Principal submatrix restricted to `keep` (in the given order) and the
    /// coupling block `A[keep, other]`.
    pub fn split(&self, keep: &[usize], other: &[usize]) -> (CsrMatrix<T>, CsrMatrix<T>) {
        let mut pos_keep = vec![usize::MAX; self.n_cols];
        let mut pos_other = vec![usize::MAX; self.n_cols];
        for (k, &i) in keep.iter().enumerate() {
            pos_keep[i] = k;
        }
        for (k, &i) in other.iter().enumerate() {
            pos_other[i] = k;
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (r, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos_keep[j] != usize::MAX {
                    a.push((r, pos_keep[j], v));
                } else if pos_other[j] != usize::MAX {
                    b.push((r, pos_other[j], v));
                }
            }
        }
        (
            CsrMatrix::from_triplets(keep.len(), keep.len(), &a),
            CsrMatrix::from_triplets(keep.len(), other.len(), &b),
        )
    }

    /// `T^T A T` for a sparse `T` given column by column as `(row, weight)`
    /// lists.
    pub fn congruence(&self, columns: &[Vec<(usize, T)>]) -> CsrMatrix<T> {
        let mut uses: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.n_rows];
        for (a, col) in columns.iter().enumerate() {
            for &(k, w) in col {
                uses[k].push((a, w));
            }
        }
        let mut triplets = Vec::new();
        for i in 0..self.n_rows {
            for &(a, wa) in &uses[i] {
                for (j, v) in self.row(i) {
                    for &(b, wb) in &uses[j] {
                        triplets.push((a, b, wa * v * wb));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(columns.len(), columns.len(), &triplets)
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee<T: Real>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n_rows();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect()).collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| {
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            out.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    };
    loop {
        let Some(seed) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)) else {
            break;
        };
        // one pseudo-peripheral sweep: restart from the last vertex reached
        let mut probe_visited = visited.clone();
        let mut probe = Vec::new();
        bfs(seed, &mut probe_visited, &mut probe);
        let far = *probe.last().unwrap_or(&seed);
        bfs(far, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factorization of a symmetric positive
/// definite sparse matrix under a fill-reducing permutation.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky<T> {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> EnvelopeCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_permutation(a, perm)
    }

    pub fn factor_with_permutation(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n || perm.len() != n {
            return Err(Error::DimensionMismatch("envelope Cholesky needs a square matrix".into()));
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new_i, &old_i) in perm.iter().enumerate() {
            for (old_j, _) in a.row(old_i) {
                let new_j = inv[old_j];
                if new_j < first[new_i] {
                    first[new_i] = new_j;
                }
            }
        }
        // symmetric pattern: make sure row i's envelope covers entries stored in row j > i only
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut values = vec![T::zero(); start[n]];
        for (new_i, &old_i) in perm.iter().enumerate() {
            for (old_j, v) in a.row(old_i) {
                let new_j = inv[old_j];
                if new_j <= new_i {
                    values[start[new_i] + new_j - first[new_i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let row_j = start[j];
                let k0 = fi.max(fj);
                let mut s = values[row_i + j - fi];
                for k in k0..j {
                    s = s - values[row_i + k - fi] * values[row_j + k - fj];
                }
                values[row_i + j - fi] = s / values[row_j + j - fj];
            }
            let mut d = values[row_i + i - fi];
            for k in fi..i {
                let l = values[row_i + k - fi];
                d = d - l * l;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite { index: perm[i], value: to_f64(d) });
            }
            values[row_i + i - fi] = d.sqrt();
        }
        Ok(Self { n, perm, first, start, values })
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = self.start[i];
            let mut s = y[i];
            for k in fi..i {
                s = s - self.values[row + k - fi] * y[k];
            }
            y[i] = s / self.values[row + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = self.start[i];
            y[i] = y[i] / self.values[row + i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] = y[k] - self.values[row + k - fi] * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn lu_solves_pivoting_system() {
        let a = DenseMatrix::from_rows(3, 3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let x = solve_dense(&a, &[3.0, 2.0, 4.0]).unwrap();
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip([3.0f64, 2.0, 4.0]) {
            assert!((ri - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn lu_detects_singular() {
        let a = DenseMatrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Lu::factor(&a), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn least_squares_fits_line_exactly() {
        let a = DenseMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let b: Vec<f64> = (0..5).map(|i| 3.0 - 0.5 * i as f64).collect();
        let (x, r) = least_squares(&a, &b).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-13 && (x[1] + 0.5).abs() < 1e-13);
        assert!(r.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn envelope_cholesky_matches_dense() {
        let a = laplacian_1d(30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let x = EnvelopeCholesky::factor(&a).unwrap().solve(&b);
        let y = DenseCholesky::factor(&a.to_dense()).unwrap().solve(&b);
        for (xi, yi) in x.iter().zip(&y) {
            assert!((xi - yi).abs() < 1e-11);
        }
    }

    #[test]
    fn envelope_cholesky_rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(EnvelopeCholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0), (0, 0, 0.5)]);
        assert_eq!(a.get(0, 0), 1.5);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(17);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }
}
