//! Small dense solvers: Cholesky for normal equations and Householder QR for
//! tall least-squares problems.

use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![T::zero(); n_rows * n_cols],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.n_cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.n_cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// `AᵀA`.
    pub fn gram(&self) -> Matrix<T> {
        let n = self.n_cols;
        let mut g = Matrix::zeros(n, n);
        for r in 0..self.n_rows {
            let row = self.row(r);
            for i in 0..n {
                for j in i..n {
                    g.data[i * n + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }

    /// `Aᵀv`.
    pub fn transpose_mul(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_cols];
        for (r, &vr) in v.iter().enumerate().take(self.n_rows) {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * vr;
            }
        }
        out
    }
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major, `n×n`).
/// Returns `None` if `A` is not numerically positive definite.
pub fn cholesky_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.n_rows;
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !s.is_finite() || s <= T::zero() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[i * n + k] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = l[k * n + i] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

/// Least-squares solution of a tall system via Householder QR.
#[derive(Debug, Clone, PartialEq)]
pub struct QrSolution<T> {
    pub coefficients: Vec<T>,
    /// `true` when some `|R_ii|` is negligible relative to the largest.
    pub rank_deficient: bool,
}

/// Minimizes `‖y − X c‖` where `columns[j]` is column `j` of `X`.
pub fn householder_lstsq<T: Real>(columns: &[Vec<T>], y: &[T]) -> QrSolution<T> {
    let n = columns.len();
    let m = y.len();
    assert!(
        columns.iter().all(|c| c.len() == m),
        "column length mismatch"
    );
    let mut a: Vec<Vec<T>> = columns.to_vec();
    let mut rhs = y.to_vec();
    let mut diag = vec![T::zero(); n];

    for j in 0..n.min(m) {
        let norm = a[j][j..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            diag[j] = T::zero();
            continue;
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        // v = x − αe₁, stored in place of column j
        a[j][j] -= alpha;
        let vnorm2: T = a[j][j..].iter().map(|&v| v * v).sum();
        diag[j] = alpha;
        if vnorm2 == T::zero() {
            continue;
        }
        let (head, tail) = a.split_at_mut(j + 1);
        let v = &head[j][j..];
        for col in tail.iter_mut() {
            let dot: T = v.iter().zip(&col[j..]).map(|(&p, &q)| p * q).sum();
            let f = T::lit(2.0) * dot / vnorm2;
            col[j..].iter_mut().zip(v).for_each(|(c, &p)| *c -= f * p);
        }
        let dot: T = v.iter().zip(&rhs[j..]).map(|(&p, &q)| p * q).sum();
        let f = T::lit(2.0) * dot / vnorm2;
        rhs[j..].iter_mut().zip(v).for_each(|(c, &p)| *c -= f * p);
    }

    let max_diag = diag.iter().map(|d| d.abs()).fold(T::zero(), T::max);
    let cutoff = max_diag * T::epsilon() * T::from_usize_lossy(m.max(n));
    let rank_deficient = n > m || diag.iter().any(|d| d.abs() <= cutoff);

    let mut coef = vec![T::zero(); n];
    for i in (0..n.min(m)).rev() {
        if diag[i].abs() <= cutoff {
            continue;
        }
        let mut s = rhs[i];
        for (k, col) in a.iter().enumerate().skip(i + 1) {
            s -= col[i] * coef[k];
        }
        coef[i] = s / diag[i];
    }
    QrSolution {
        coefficients: coef,
        rank_deficient,
    }
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}
