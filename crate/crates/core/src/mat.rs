//! Small dense matrices over exact or floating scalars.
//!
//! Everything here is sized for pencils with `d ≤ 12`: plain `Vec` storage,
//! O(n³) eliminations, a one-sided Jacobi SVD for float rank decisions. Exact
//! eliminations pivot on exact non-zero tests and are valid over any field
//! with decidable equality (rationals, Gaussian rationals); float routines
//! take explicit tolerances.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Rat;

/// Operation bounds shared by every scalar a matrix can hold.
pub trait MatScalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
}

impl MatScalar for Rat {}
impl MatScalar for f64 {}
impl MatScalar for Complex<Rat> {}
impl MatScalar for Complex<f64> {}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Debug> Debug for Mat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: MatScalar> Mat<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn map<U: MatScalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&(-T::one())))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.cols {
                    acc = acc + self[(i, j)].clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    /// `[self; other]` stacked vertically.
    pub fn vcat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// `[self other]` side by side.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    /// Reduced row echelon form together with the pivot columns.
    /// Pivoting on exact non-zero tests; only meaningful for exact scalars.
    pub fn rref_exact(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = T::one() / m[(r, c)].clone();
            for j in c..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let sub = f.clone() * m[(r, j)].clone();
                        m[(i, j)] = m[(i, j)].clone() - sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank_exact(&self) -> usize {
        self.rref_exact().1.len()
    }

    /// Basis of `ker(self)` as columns, exact pivoting.
    pub fn nullspace_exact(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref_exact();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![T::zero(); self.cols];
                v[fc] = T::one();
                for (pi, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(pi, fc)].clone();
                }
                v
            })
            .collect()
    }

    /// Solves `self * x = b` for square invertible `self`, exact pivoting.
    pub fn solve_exact(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, self.cols);
        let aug = self.hcat(&Mat::from_fn(self.rows, 1, |r, _| b[r].clone()));
        let (r, pivots) = aug.rref_exact();
        if pivots.len() != self.cols || pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        Some((0..self.cols).map(|i| r[(i, self.cols)].clone()).collect())
    }

    pub fn inverse_exact(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = self.hcat(&Self::identity(n));
        let (r, pivots) = aug.rref_exact();
        if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r[(i, n + j)].clone()))
    }

    /// Determinant by exact Gaussian elimination (division-ful, still exact
    /// over a field). For rationals prefer [`det_bareiss`], which keeps the
    /// arithmetic fraction-free.
    pub fn det_gauss_exact(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = m.rows;
        let mut det = T::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return T::zero();
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det * piv.clone();
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone() / piv.clone();
                for j in c..n {
                    let sub = f.clone() * m[(c, j)].clone();
                    m[(i, j)] = m[(i, j)].clone() - sub;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Exact rational determinant via fraction-free Bareiss elimination: clear
/// denominators to a `BigInt` matrix, eliminate with exact divisions of
/// 2x2 minors, divide the cleared factor back out.
pub fn det_bareiss(m: &Mat<Rat>) -> Rat {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    if n == 0 {
        return Rat::one();
    }
    // Common denominator per row keeps the integer growth modest.
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let mut scale = Rat::one();
    for r in 0..n {
        let mut lcm = BigInt::one();
        for c in 0..n {
            let d = m[(r, c)].denom().clone();
            lcm = num_integer::lcm(lcm, d);
        }
        scale /= Rat::from_integer(lcm.clone());
        a.push(
            (0..n)
                .map(|c| {
                    let v = &m[(r, c)];
                    v.numer() * (&lcm / v.denom())
                })
                .collect(),
        );
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Rat::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev; // exact by Bareiss' identity
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det_int = Rat::from_integer(a[n - 1][n - 1].clone());
    let det = det_int * scale;
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// LU determinant with partial pivoting.
pub fn det_lu(m: &Mat<f64>) -> f64 {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap())
            .unwrap();
        if a[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap_rows(k, p);
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    det
}

/// One-sided Jacobi SVD: returns singular values (descending) and the right
/// singular vectors as columns. Adequate for the `2d x d` stacks used in rank
/// decisions; not tuned for large matrices.
pub fn jacobi_svd(m: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let mut a = m.clone();
    let n = a.cols;
    let mut v = Mat::<f64>::identity(n);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let (mut aii, mut ajj, mut aij) = (0.0, 0.0, 0.0);
                for r in 0..a.rows {
                    aii += a[(r, i)] * a[(r, i)];
                    ajj += a[(r, j)] * a[(r, j)];
                    aij += a[(r, i)] * a[(r, j)];
                }
                off = off.max(aij.abs() / (aii * ajj).sqrt().max(f64::MIN_POSITIVE));
                if aij == 0.0 {
                    continue;
                }
                let tau = (ajj - aii) / (2.0 * aij);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..a.rows {
                    let (x, y) = (a[(r, i)], a[(r, j)]);
                    a[(r, i)] = c * x - s * y;
                    a[(r, j)] = s * x + c * y;
                }
                for r in 0..n {
                    let (x, y) = (v[(r, i)], v[(r, j)]);
                    v[(r, i)] = c * x - s * y;
                    v[(r, j)] = s * x + c * y;
                }
            }
        }
        if off < 1e-14 {
            break;
        }
    }
    let mut sv: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let s: f64 = (0..a.rows).map(|r| a[(r, j)] * a[(r, j)]).sum();
            (s.sqrt(), j)
        })
        .collect();
    sv.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let vv = Mat::from_fn(n, n, |r, c| v[(r, sv[c].1)]);
    (sv.into_iter().map(|(s, _)| s).collect(), vv)
}

/// Numerical rank with the `tol_rel * sigma_max` convention.
pub fn rank_float(m: &Mat<f64>, tol_rel: f64) -> usize {
    let (sv, _) = jacobi_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol_rel * smax).count()
}

/// Float nullspace basis (columns of V with sigma below threshold).
pub fn nullspace_float(m: &Mat<f64>, tol_rel: f64) -> Vec<Vec<f64>> {
    let (sv, v) = jacobi_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    (0..m.cols)
        .filter(|&j| sv[j] <= tol_rel * smax)
        .map(|j| v.col(j))
        .collect()
}

pub fn frobenius_f64(m: &Mat<f64>) -> f64 {
    (0..m.rows)
        .flat_map(|r| m.row(r).iter().map(|x| x * x))
        .sum::<f64>()
        .sqrt()
}

/// Squared Frobenius norm of a complex-rational matrix, exact.
pub fn frobenius_sq_exact(m: &Mat<Complex<Rat>>) -> Rat {
    let mut acc = Rat::zero();
    for r in 0..m.rows {
        for x in m.row(r) {
            acc = acc + x.re.clone() * x.re.clone() + x.im.clone() * x.im.clone();
        }
    }
    acc
}

/// Squared Frobenius norm of a rational matrix, exact.
pub fn frobenius_sq_exact_real(m: &Mat<Rat>) -> Rat {
    let mut acc = Rat::zero();
    for r in 0..m.rows {
        for x in m.row(r) {
            acc += x.clone() * x.clone();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn rmat(rows: Vec<Vec<i64>>) -> Mat<Rat> {
        Mat::from_rows(
            rows.into_iter().map(|r| r.into_iter().map(rat_int).collect()).collect(),
        )
    }

    #[test]
    fn bareiss_matches_gauss() {
        let m = rmat(vec![vec![2, 1, 0], vec![1, -3, 4], vec![0, 5, 1]]);
        assert_eq!(det_bareiss(&m), m.det_gauss_exact());
        assert_eq!(det_bareiss(&m), rat_int(-47));
    }

    #[test]
    fn bareiss_with_fractions() {
        let m = Mat::from_rows(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 5), rat(2, 7)]]);
        assert_eq!(det_bareiss(&m), rat(1, 2) * rat(2, 7) - rat(1, 3) * rat(1, 5));
    }

    #[test]
    fn singular_det_is_zero() {
        let m = rmat(vec![vec![1, 2], vec![2, 4]]);
        assert_eq!(det_bareiss(&m), rat_int(0));
        assert_eq!(m.rank_exact(), 1);
        let ns = m.nullspace_exact();
        assert_eq!(ns.len(), 1);
        let img = m.matvec(&ns[0]);
        assert!(img.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = rmat(vec![vec![2, 1], vec![7, 4]]);
        let inv = m.inverse_exact().unwrap();
        assert_eq!(m.matmul(&inv), Mat::identity(2));
    }

    #[test]
    fn svd_rank_on_rank_deficient() {
        let m = Mat::<f64>::from_rows(vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![1.0, 0.0, 1.0],
        ]);
        assert_eq!(rank_float(&m, 1e-8), 2);
        let ns = nullspace_float(&m, 1e-8);
        assert_eq!(ns.len(), 1);
        let img = m.matvec(&ns[0]);
        assert!(img.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn lu_det() {
        let m = Mat::<f64>::from_rows(vec![vec![2.0, 1.0], vec![7.0, 4.0]]);
        assert!((det_lu(&m) - 1.0).abs() < 1e-12);
    }
}
