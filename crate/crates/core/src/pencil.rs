//! Symmetric matrix pencils `sA + tB` and their determinant binary forms.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use thiserror::Error;

use crate::mat::{det_bareiss, det_lu, Mat};
use crate::scalar::{Field, Rat};

/// Largest supported pencil dimension. Fraction-free determinants and the
/// exhaustive test sweeps stay sub-second up to here.
pub const MAX_DIM: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum PencilError {
    #[error("matrix dimensions {0}x{1} and {2}x{3} do not form a d x d pair")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("dimension {0} outside supported range 2..={MAX_DIM}")]
    DimensionOutOfRange(usize),
    #[error("matrix {which} is not symmetric at ({row},{col})")]
    NotSymmetric { which: char, row: usize, col: usize },
}

/// How a scalar mode computes determinants and solves the small interpolation
/// systems: exact rationals eliminate fraction-free, floats use pivoted LU.
pub trait PencilScalar: Field {
    fn mat_det(m: &Mat<Self>) -> Self;
    fn mat_solve(m: &Mat<Self>, b: &[Self]) -> Option<Vec<Self>>;
}

impl PencilScalar for Rat {
    fn mat_det(m: &Mat<Self>) -> Self {
        det_bareiss(m)
    }
    fn mat_solve(m: &Mat<Self>, b: &[Self]) -> Option<Vec<Self>> {
        m.solve_exact(b)
    }
}

impl PencilScalar for f64 {
    fn mat_det(m: &Mat<Self>) -> Self {
        det_lu(m)
    }
    fn mat_solve(m: &Mat<Self>, b: &[Self]) -> Option<Vec<Self>> {
        solve_lu(m, b)
    }
}

fn solve_lu(m: &Mat<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = m.rows;
    let mut a = m.hcat(&Mat::from_fn(n, 1, |r, _| b[r]));
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap())?;
        if a[(p, k)] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..=n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
        }
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..=n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = a[(i, n)];
        for j in i + 1..n {
            acc -= a[(i, j)] * x[j];
        }
        x[i] = acc / a[(i, i)];
    }
    Some(x)
}

/// A pair of real symmetric `d x d` matrices, the Hessians of the two
/// quadratic forms defining the surface. Symmetry is checked entrywise at
/// construction in both scalar modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPencil<T> {
    pub d: usize,
    pub a: Mat<T>,
    pub b: Mat<T>,
}

impl<T: Field> SymmetricPencil<T> {
    pub fn new(a: Mat<T>, b: Mat<T>) -> Result<Self, PencilError> {
        if a.rows != a.cols || b.rows != b.cols || a.rows != b.rows {
            return Err(PencilError::DimensionMismatch(a.rows, a.cols, b.rows, b.cols));
        }
        let d = a.rows;
        if !(2..=MAX_DIM).contains(&d) {
            return Err(PencilError::DimensionOutOfRange(d));
        }
        for (m, which) in [(&a, 'A'), (&b, 'B')] {
            for i in 0..d {
                for j in 0..i {
                    if m[(i, j)] != m[(j, i)] {
                        return Err(PencilError::NotSymmetric { which, row: i, col: j });
                    }
                }
            }
        }
        Ok(SymmetricPencil { d, a, b })
    }

    /// `sA + tB`.
    pub fn member(&self, s: &T, t: &T) -> Mat<T> {
        self.a.scale(s).add(&self.b.scale(t))
    }

    /// Congruence transform `(MAM^T, MBM^T)`; preserves symmetry.
    pub fn transform_congruence(&self, m: &Mat<T>) -> Self {
        let mt = m.transpose();
        SymmetricPencil {
            d: self.d,
            a: m.matmul(&self.a).matmul(&mt),
            b: m.matmul(&self.b).matmul(&mt),
        }
    }

    /// Basis change on the `(s,t)` side: for `N = [[l, m], [l', m']]` the new
    /// pair is `(lA + mB, l'A + m'B)`.
    pub fn transform_sigma(&self, n: &Mat<T>) -> Self {
        assert_eq!((n.rows, n.cols), (2, 2));
        SymmetricPencil {
            d: self.d,
            a: self.a.scale(&n[(0, 0)]).add(&self.b.scale(&n[(0, 1)])),
            b: self.a.scale(&n[(1, 0)]).add(&self.b.scale(&n[(1, 1)])),
        }
    }
}

impl SymmetricPencil<f64> {
    /// Entry-wise exact rational lift (every f64 is a dyadic rational).
    pub fn to_exact(&self) -> SymmetricPencil<Rat> {
        let lift = |m: &Mat<f64>| m.map(|x| Rat::from_float(*x).expect("finite entry"));
        SymmetricPencil { d: self.d, a: lift(&self.a), b: lift(&self.b) }
    }
}

impl SymmetricPencil<Rat> {
    pub fn to_float(&self) -> SymmetricPencil<f64> {
        SymmetricPencil {
            d: self.d,
            a: self.a.map(|x| x.to_f64_approx()),
            b: self.b.map(|x| x.to_f64_approx()),
        }
    }
}

/// Homogeneous binary form `sum_k c_k s^k t^(d-k)`, stored dense; the zero
/// form keeps its nominal degree.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryForm<T> {
    /// `coeffs[k]` multiplies `s^k t^(d-k)`.
    pub coeffs: Vec<T>,
}

impl<T: Field> BinaryForm<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        BinaryForm { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero_form(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Substitution `P(l s + l' t, m s + m' t)` for `N = [[l, m], [l', m']]`;
    /// this is the polynomial-side companion of [`SymmetricPencil::transform_sigma`].
    pub fn substitute(&self, n: &Mat<T>) -> Self {
        assert_eq!((n.rows, n.cols), (2, 2));
        let d = self.degree();
        // Power tables of the two substituted linear forms, as homogeneous
        // coefficient vectors in s.
        let lin1 = vec![n[(1, 0)].clone(), n[(0, 0)].clone()]; // l s + l' t -> [t-coeff, s-coeff]
        let lin2 = vec![n[(1, 1)].clone(), n[(0, 1)].clone()];
        let mut pow1 = vec![vec![T::one()]];
        let mut pow2 = vec![vec![T::one()]];
        for k in 1..=d {
            pow1.push(conv(&pow1[k - 1], &lin1));
            pow2.push(conv(&pow2[k - 1], &lin2));
        }
        let mut out = vec![T::zero(); d + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = conv(&pow1[k], &pow2[d - k]);
            for (i, v) in term.into_iter().enumerate() {
                out[i] = out[i].clone() + c.clone() * v;
            }
        }
        BinaryForm::new(out)
    }
}

fn conv<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Coefficients of `det(sA + tB)` by interpolation at the projective sample
/// points `[1:0]`, `[0:1]` and `(k, 1)` for `k = 1..d-1`: the endpoints give
/// `det A` and `det B` directly and the remaining values feed a small
/// Vandermonde solve. Exact mode eliminates fraction-free.
pub fn det_pencil<T: PencilScalar>(p: &SymmetricPencil<T>) -> BinaryForm<T> {
    let d = p.d;
    let c_d = T::mat_det(&p.a);
    let c_0 = T::mat_det(&p.b);
    if d == 1 {
        return BinaryForm::new(vec![c_0, c_d]);
    }
    let nodes: Vec<T> = (1..d as i64).map(T::from_int).collect();
    let mut rhs = Vec::with_capacity(d - 1);
    for k in &nodes {
        let det_k = T::mat_det(&p.member(k, &T::one()));
        // subtract the known endpoint contributions c_0 + c_d k^d
        let mut kd = T::one();
        for _ in 0..d {
            kd = kd * k.clone();
        }
        rhs.push(det_k - c_0.clone() - c_d.clone() * kd);
    }
    let vand = Mat::from_fn(d - 1, d - 1, |r, c| {
        let mut v = T::one();
        for _ in 0..=c {
            v = v * nodes[r].clone();
        }
        v
    });
    let mid = T::mat_solve(&vand, &rhs).expect("Vandermonde system with distinct nodes");
    let mut coeffs = Vec::with_capacity(d + 1);
    coeffs.push(c_0);
    coeffs.extend(mid);
    coeffs.push(c_d);
    BinaryForm::new(coeffs)
}

/// `sum_k c_k s^k t^(d-k)`, Horner in the ratio against the dominant variable
/// so large arguments stay stable in float mode.
pub fn eval_form<T: Field>(f: &BinaryForm<T>, s: &T, t: &T) -> T {
    let d = f.degree();
    if s.is_zero() && t.is_zero() {
        return if d == 0 { f.coeffs[0].clone() } else { T::zero() };
    }
    if s.magnitude() >= t.magnitude() {
        // P = s^d sum_k c_k r^(d-k) with r = t/s: Horner from c_0 down
        let r = t.clone() / s.clone();
        let mut acc = T::zero();
        for k in 0..=d {
            acc = acc * r.clone() + f.coeffs[k].clone();
        }
        let mut sd = T::one();
        for _ in 0..d {
            sd = sd * s.clone();
        }
        acc * sd
    } else {
        // P = t^d sum_k c_k r^k with r = s/t: Horner from c_d down
        let r = s.clone() / t.clone();
        let mut acc = T::zero();
        for k in 0..=d {
            acc = acc * r.clone() + f.coeffs[d - k].clone();
        }
        let mut td = T::one();
        for _ in 0..d {
            td = td * t.clone();
        }
        acc * td
    }
}

/// `(-1)^d det((s - s0) A + (t - t0) B)`, the Jacobian factor of the
/// refinement change of variables, evaluated at shifted arguments.
pub fn shifted_jacobian<T: PencilScalar>(
    p: &SymmetricPencil<T>,
    s0: &T,
    t0: &T,
    s: &T,
    t: &T,
) -> T {
    let m = p.member(&(s.clone() - s0.clone()), &(t.clone() - t0.clone()));
    let det = T::mat_det(&m);
    if p.d % 2 == 1 {
        -det
    } else {
        det
    }
}
