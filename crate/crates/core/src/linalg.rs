//! Small dense solvers, generic over the scalar type.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..n {
        s += a[i] * b[i];
    }
    s
}

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
    min_pivot: T,
    max_pivot: T,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a symmetric positive definite matrix; only the lower triangle is read.
    pub fn factor(mut a: Matrix<T>) -> Result<Self> {
        let n = a.n;
        let mut min_pivot = T::infinity();
        let mut max_pivot = T::zero();
        // Relative floor below which a pivot is treated as a loss of definiteness.
        let eps = T::epsilon() * T::of(n.max(1) as f64);
        let scale = (0..n).map(|i| a.get(i, i).abs()).fold(T::zero(), T::max);
        for j in 0..n {
            let (head, tail) = a.data.split_at_mut(j * n);
            let rj = &mut tail[..n];
            for k in 0..j {
                let rk = &head[k * n..k * n + n];
                let s = rj[k] - dot(&rj[..k], &rk[..k]);
                rj[k] = s / rk[k];
            }
            let diag = rj[j] - dot(&rj[..j], &rj[..j]);
            if !(diag > eps * scale) {
                return Err(Error::IllConditioned { row: j, n, pivot: diag.to_f64_lossy() });
            }
            let p = diag.sqrt();
            rj[j] = p;
            min_pivot = min_pivot.min(p);
            max_pivot = max_pivot.max(p);
        }
        for i in 0..n {
            for j in i + 1..n {
                a.set(i, j, T::zero());
            }
        }
        Ok(Self { l: a, min_pivot, max_pivot })
    }

    pub fn n(&self) -> usize {
        self.l.n
    }

    /// Square of the pivot spread, a cheap lower bound on the 2-norm condition number.
    pub fn condition_estimate(&self) -> T {
        let r = self.max_pivot / self.min_pivot;
        r * r
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.l.n;
        for i in 0..n {
            let r = self.l.row(i);
            b[i] = (b[i] - dot(&r[..i], &b[..i])) / r[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l.get(k, i) * b[k];
            }
            b[i] = s / self.l.get(i, i);
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// LU factorisation with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(mut a: Matrix<T>) -> Result<Self> {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        for k in 0..n {
            let (p, pv) = (k..n).map(|i| (i, a.get(i, k).abs())).fold((k, -T::one()), |b, c| if c.1 > b.1 { c } else { b });
            if !(pv > T::epsilon() * scale) {
                return Err(Error::IllConditioned { row: k, n, pivot: pv.to_f64_lossy() });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = a.get(k, k);
            let (top, bottom) = a.data.split_at_mut((k + 1) * n);
            let rk = &top[k * n..];
            for row in bottom.chunks_exact_mut(n) {
                let f = row[k] / piv;
                row[k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        row[j] -= f * rk[j];
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let r = self.lu.row(i);
            x[i] = x[i] - dot(&r[..i], &x[..i]);
        }
        for i in (0..n).rev() {
            let r = self.lu.row(i);
            x[i] = (x[i] - dot(&r[i + 1..], &x[i + 1..])) / r[i];
        }
        x
    }
}

/// Conjugate gradients for an SPD operator; stops when `‖r‖∞ <= tol`.
pub fn conjugate_gradient<T: Scalar>(
    apply: impl Fn(&[T], &mut [T]),
    precondition: impl Fn(&[T], &mut [T]),
    b: &[T],
    x0: Option<Vec<T>>,
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, usize)> {
    let n = b.len();
    let mut x = x0.unwrap_or_else(|| vec![T::zero(); n]);
    let mut ax = vec![T::zero(); n];
    apply(&x, &mut ax);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(b, a)| *b - *a).collect();
    let mut z = vec![T::zero(); n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let norm_inf = |v: &[T]| v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    for it in 0..max_iter {
        if norm_inf(&r) <= tol {
            return Ok((x, it));
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        // Recompute the true residual periodically to avoid drift.
        if it % 50 == 49 {
            apply(&x, &mut ax);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    apply(&x, &mut ax);
    let res = b.iter().zip(&ax).map(|(b, a)| (*b - *a).abs()).fold(T::zero(), T::max);
    if res <= tol {
        return Ok((x, max_iter));
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: res.to_f64_lossy() })
}
