//! Small dense linear algebra: row-major matrices and a one-sided Jacobi
//! SVD used for minimal-norm least-squares (pseudoinverse) solves.
//!
//! The systems handled here are at most a few dozen unknowns, so the
//! quadratic-per-sweep Jacobi iteration is more than fast enough and keeps
//! everything generic over the scalar type.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// Left singular vectors as columns (`m × n`); columns for zero singular
    /// values are zero.
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    /// Right singular vectors as columns (`n × n`).
    pub v: Matrix<T>,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
#[allow(clippy::needless_range_loop)]
pub fn svd<T: Real>(a: &Matrix<T>) -> Svd<T> {
    let (m, n) = (a.rows(), a.cols());
    // column-major working copies
    let mut w: Vec<Vec<T>> = (0..n)
        .map(|j| (0..m).map(|i| a.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let tol = T::epsilon();
    let dot = |x: &[T], y: &[T]| x.iter().zip(y).fold(T::zero(), |acc, (&p, &q)| acc + p * q);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let two = T::lit(2.0);
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = (T::one() + t * t).sqrt().recip();
                let s = c * t;
                for col in [&mut w, &mut v] {
                    let (left, right) = col.split_at_mut(q);
                    let (cp, cq) = (&mut left[p], &mut right[0]);
                    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                        let (xp, yq) = (*x, *y);
                        *x = c * xp - s * yq;
                        *y = s * xp + c * yq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let singular_values: Vec<T> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    for j in 0..n {
        let s = singular_values[j];
        for i in 0..m {
            if s > T::zero() {
                u.set(i, j, w[j][i] / s);
            }
        }
        for i in 0..n {
            vm.set(i, j, v[j][i]);
        }
    }
    Svd {
        u,
        singular_values,
        v: vm,
    }
}

/// Minimal-norm least-squares solution of `A x = b`.
#[derive(Debug, Clone)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    /// Number of singular values kept.
    pub rank: usize,
}

/// Relative singular-value cutoff below which directions are discarded.
pub fn default_rcond<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0))
}

/// Pseudoinverse solve `x = A⁺ b`, discarding singular values below
/// `rcond · s_max`.
pub fn pseudo_solve<T: Real>(a: &Matrix<T>, b: &[T], rcond: T) -> LeastSquares<T> {
    assert_eq!(a.rows(), b.len());
    let n = a.cols();
    let dec = svd(a);
    let s_max = dec
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s));
    let cutoff = rcond * s_max;
    let mut x = vec![T::zero(); n];
    let mut rank = 0;
    for (j, &s) in dec.singular_values.iter().enumerate() {
        if !(s > cutoff) || s == T::zero() {
            continue;
        }
        rank += 1;
        let coeff = (0..a.rows()).fold(T::zero(), |acc, i| acc + dec.u.get(i, j) * b[i]) / s;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = *xi + dec.v.get(i, j) * coeff;
        }
    }
    LeastSquares { solution: x, rank }
}
