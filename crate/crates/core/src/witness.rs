//! Explicit destabilizing one-parameter subgroups for unstable pencils, with
//! numerically verified orbit decay.
//!
//! A pencil that is not well-curved admits a curve `(M_l, N_l)` in
//! `SL(d) x SL(2)` driving `(MAM^T, MBM^T)`-conjugated, `sigma`-mixed pairs
//! to zero as `l -> 0`. The three branches:
//!
//! * common kernel: reorder so the kernel vector comes first, then
//!   `M_l = diag(l^-(d-1), l, .., l)` scales every surviving entry by `l^2`;
//! * vanishing determinant with split kernels: adapt the basis to
//!   `(V, H-perp completion, H)` and use the exponents
//!   `(-( (d-1) lH + d - k), k, d k)`;
//! * flat with `Delta` nonzero: congruence to the canonical anti-diagonal
//!   pair `(eps_b J~_r(lambda_b), eps_b I~_r)` on the dominant eigenvalue's
//!   generalized eigenspace, a `sigma`-shift sending `lambda* -> 0`, a
//!   block-zeroing stage fixing `I~` exactly, and the final unbalanced
//!   scaling against `N_l = diag(l^-c, l^c)`, `c = 2(d - m*) + 1`.
//!
//! The construction is exact over the rationals whenever the pencil is: the
//! dominant eigenvalue of a flat pencil is always rational (a multiplicity
//! `> d/2` eigenvalue cannot carry Galois conjugates), the canonical chains
//! come from a triangular rational solve, and the non-dominant part never
//! needs its own Jordan structure: the final stage scales it as one block.
//! Exactness matters: the curve amplifies some zero positions by large
//! negative powers of `l`, so float noise there would swamp the decay.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::CurvatureVerdict;
use crate::mat::{frobenius_sq_exact_real, Mat};
use crate::pencil::SymmetricPencil;
use crate::scalar::{rat_int, rat_log2_abs, rat_to_f64, Rat};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("well-curved pencils are semistable: no destabilizing curve exists")]
    WellCurvedInput,
    #[error("classification failed: {0}")]
    Classify(#[from] crate::classify::ClassifyError),
    #[error("fitted decay slope {slope:.3} below 0.5: construction or classification bug")]
    NonDecaying { slope: f64 },
    #[error("curve construction invariant failed: {0}")]
    Internal(&'static str),
}

/// An element of `SL(d, C) x SL(2, C)`, determinants 1 within 1e-12
/// (float view of exactly constructed curves, or sampled elements).
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub m: Mat<Complex64>,
    pub n: Mat<Complex64>,
}

/// `rho_M(sigma_N(A,B))` over complex floats; the result stays symmetric.
pub fn act(g: &GroupElement, a: &Mat<Complex64>, b: &Mat<Complex64>) -> (Mat<Complex64>, Mat<Complex64>) {
    let a1 = a.scale(&g.n[(0, 0)]).add(&b.scale(&g.n[(0, 1)]));
    let b1 = a.scale(&g.n[(1, 0)]).add(&b.scale(&g.n[(1, 1)]));
    let mt = g.m.transpose();
    (g.m.matmul(&a1).matmul(&mt), g.m.matmul(&b1).matmul(&mt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    FlatNonvanishing,
    CommonKernel,
    KernelSplit,
}

/// A canonical anti-diagonal block of the congruence-reduced pair.
#[derive(Debug, Clone)]
pub struct CanonicalBlock {
    pub size: usize,
    /// Block scalar: the pair restricted here is `(eps J~_r(lambda*), eps I~_r)`.
    pub epsilon: Rat,
    pub at_lambda_star: bool,
}

/// The assembled curve: a fixed exact pre-conjugation `(m0, n0)` followed by
/// the one-parameter part `M_l = diag(l^m_exponents) m0`,
/// `N_l = diag(l^-n_exponent, l^n_exponent) n0`.
#[derive(Debug, Clone)]
pub struct DestabilizingCurve {
    pub kind: CurveKind,
    pub m0: Mat<Rat>,
    pub n0: Mat<Rat>,
    /// Composed diagonal exponents of the `SL(d)` part; they sum to zero.
    pub m_exponents: Vec<i64>,
    /// `N_l = diag(l^-c, l^c)`.
    pub n_exponent: i64,
    /// Block-zeroing stage alone (sums to zero, fixes the `I~` side exactly).
    pub bz_exponents: Vec<i64>,
    /// Final-stage exponents alone.
    pub fin_exponents: Vec<i64>,
    /// The block-zeroing stage runs at `l^speedup` so it outpaces the final
    /// stage's negative powers on the dominant blocks.
    pub speedup: i64,
    /// The pencil after `(m0, n0)`: scaling this by the exponents gives the
    /// whole orbit, so zero entries stay exactly zero along the curve.
    pub base: (Mat<Rat>, Mat<Rat>),
    /// Canonical block data (flat branch only).
    pub blocks: Vec<CanonicalBlock>,
    /// Dominant eigenvalue (flat branch only).
    pub lambda_star: Option<Rat>,
}

impl DestabilizingCurve {
    /// The transformed pair at parameter `l`, exact.
    pub fn transformed_pair(&self, lambda: &Rat) -> (Mat<Rat>, Mat<Rat>) {
        let d = self.base.0.rows;
        let scale_entry = |x: &Rat, e: i64| {
            if x.is_zero() {
                Rat::zero()
            } else {
                x.clone() * rat_pow(lambda, e)
            }
        };
        let a = Mat::from_fn(d, d, |i, j| {
            scale_entry(&self.base.0[(i, j)], self.m_exponents[i] + self.m_exponents[j] - self.n_exponent)
        });
        let b = Mat::from_fn(d, d, |i, j| {
            scale_entry(&self.base.1[(i, j)], self.m_exponents[i] + self.m_exponents[j] + self.n_exponent)
        });
        (a, b)
    }

    /// Float view of the group element at `l`, determinant-normalized with
    /// principal roots.
    pub fn group_element(&self, lambda: f64) -> GroupElement {
        let d = self.m0.rows;
        let mut m = Mat::<Complex64>::zero(d, d);
        for i in 0..d {
            let li = lambda.powi(self.m_exponents[i] as i32);
            for j in 0..d {
                m[(i, j)] = Complex64::new(rat_to_f64(&self.m0[(i, j)]) * li, 0.0);
            }
        }
        // normalize det to 1 with a principal d-th root (the diagonal part
        // already has determinant one since the exponents sum to zero)
        let det = complex_det(&m);
        let scale = det.powf(-1.0 / d as f64);
        let m = m.scale(&scale);
        let mut n = Mat::<Complex64>::zero(2, 2);
        let (lm, lp) = (lambda.powi(-self.n_exponent as i32), lambda.powi(self.n_exponent as i32));
        for j in 0..2 {
            n[(0, j)] = Complex64::new(rat_to_f64(&self.n0[(0, j)]) * lm, 0.0);
            n[(1, j)] = Complex64::new(rat_to_f64(&self.n0[(1, j)]) * lp, 0.0);
        }
        GroupElement { m, n }
    }
}

fn rat_pow(x: &Rat, e: i64) -> Rat {
    let mut acc = Rat::one();
    let mut base = if e >= 0 { x.clone() } else { Rat::one() / x.clone() };
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc *= base.clone();
        }
        base = base.clone() * base;
        k >>= 1;
    }
    acc
}

fn complex_det(m: &Mat<Complex64>) -> Complex64 {
    let n = m.rows;
    let mut a = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, k)].norm().partial_cmp(&a[(j, k)].norm()).unwrap()).unwrap();
        if a[(p, k)].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                let sub = f * a[(k, j)];
                a[(i, j)] -= sub;
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// Curve construction
// ---------------------------------------------------------------------------

/// Builds the destabilizing curve for a non-well-curved exact pencil.
pub fn destabilizing_curve(
    p: &SymmetricPencil<Rat>,
    verdict: &CurvatureVerdict<Rat>,
) -> Result<DestabilizingCurve, WitnessError> {
    match verdict {
        CurvatureVerdict::WellCurved { .. } => Err(WitnessError::WellCurvedInput),
        CurvatureVerdict::DegenerateCommonKernel { common_kernel, .. } => {
            common_kernel_curve(p, common_kernel)
        }
        CurvatureVerdict::DegenerateKernelSplit(ks) => kernel_split_curve(p, ks),
        CurvatureVerdict::FlatNonvanishing { .. } => flat_curve(p),
    }
}

fn common_kernel_curve(
    p: &SymmetricPencil<Rat>,
    kernel: &[Vec<Rat>],
) -> Result<DestabilizingCurve, WitnessError> {
    let d = p.d;
    let m0 = complete_to_basis(kernel.to_vec(), d)
        .ok_or(WitnessError::Internal("kernel completion failed"))?;
    let n0 = Mat::<Rat>::identity(2);
    let base_p = p.transform_congruence(&m0);
    let mut m_exponents = vec![1i64; d];
    m_exponents[0] = -(d as i64 - 1);
    // rows touching the kernel vector are exactly zero, so every nonzero
    // entry carries exponent 2
    for j in 0..d {
        if !base_p.a[(0, j)].is_zero() || !base_p.b[(0, j)].is_zero() {
            return Err(WitnessError::Internal("kernel row not annihilated"));
        }
    }
    Ok(DestabilizingCurve {
        kind: CurveKind::CommonKernel,
        m0,
        n0,
        m_exponents,
        n_exponent: 0,
        bz_exponents: vec![0; d],
        fin_exponents: vec![0; d],
        speedup: 1,
        base: (base_p.a, base_p.b),
        blocks: Vec::new(),
        lambda_star: None,
    })
}

fn kernel_split_curve(
    p: &SymmetricPencil<Rat>,
    ks: &crate::classify::KernelSplit<Rat>,
) -> Result<DestabilizingCurve, WitnessError> {
    let d = p.d;
    let k = ks.dim_v();
    let l = ks.dim_h();
    // sigma-relabel so both pencil members are generic: rows of n0 are two
    // independent generic directions, normalized to determinant one
    let (s1, t1) = ks.generic_samples[0].clone();
    let (s2, t2) = ks
        .generic_samples
        .iter()
        .find(|(s, t)| (s1.clone() * t.clone() - t1.clone() * s.clone()) != Rat::zero())
        .cloned()
        .ok_or(WitnessError::Internal("no independent generic pair"))?;
    let det = s1.clone() * t2.clone() - t1.clone() * s2.clone();
    let n0 = Mat::from_rows(vec![
        vec![s1.clone() / det.clone(), t1.clone() / det],
        vec![s2, t2],
    ]);
    // basis rows: V, completion of V inside H-perp, H
    let h_mat = Mat::from_rows(ks.h_basis.clone());
    let h_perp = h_mat.nullspace_exact();
    let mut rows = ks.v_basis.clone();
    let mut rank_mat = Mat::from_rows(rows.clone());
    for cand in h_perp {
        if rows.len() == d - l {
            break;
        }
        let aug = rank_mat.vcat(&Mat::from_rows(vec![cand.clone()]));
        if aug.rank_exact() > rank_mat.rows {
            rows.push(cand);
            rank_mat = aug;
        }
    }
    if rows.len() != d - l {
        return Err(WitnessError::Internal("H-perp completion failed"));
    }
    rows.extend(ks.h_basis.clone());
    let m0 = Mat::from_rows(rows);
    if m0.rank_exact() != d {
        return Err(WitnessError::Internal("adapted basis is singular"));
    }
    let relabelled = p.transform_sigma(&n0);
    let base_p = relabelled.transform_congruence(&m0);
    // Figure-2 zero pattern: (first d-l rows) x (first k cols) vanish
    for i in 0..d - l {
        for j in 0..k {
            if !base_p.a[(i, j)].is_zero() || !base_p.b[(i, j)].is_zero() {
                return Err(WitnessError::Internal("kernel-split zero pattern violated"));
            }
        }
    }
    let a1 = -(((d as i64) - 1) * l as i64 + d as i64 - k as i64);
    let a2 = k as i64;
    let a3 = (d * k) as i64;
    let mut m_exponents = Vec::with_capacity(d);
    m_exponents.extend(std::iter::repeat_n(a1, k));
    m_exponents.extend(std::iter::repeat_n(a2, d - k - l));
    m_exponents.extend(std::iter::repeat_n(a3, l));
    debug_assert_eq!(m_exponents.iter().sum::<i64>(), 0);
    Ok(DestabilizingCurve {
        kind: CurveKind::KernelSplit,
        m0,
        n0,
        m_exponents,
        n_exponent: 0,
        bz_exponents: vec![0; d],
        fin_exponents: vec![0; d],
        speedup: 1,
        base: (base_p.a, base_p.b),
        blocks: Vec::new(),
        lambda_star: None,
    })
}

/// Flat branch: canonical pair on the dominant eigenspace, shift, block
/// zeroing, final unbalanced stage.
fn flat_curve(p: &SymmetricPencil<Rat>) -> Result<DestabilizingCurve, WitnessError> {
    let d = p.d;
    let reduction = canonical_reduction(p)?;
    let CanonicalReduction { m0, n_relabel, lambda_star, blocks, m_star } = reduction;
    // shift the dominant eigenvalue to zero on the sigma side
    let n_shift = Mat::from_rows(vec![
        vec![Rat::one(), -lambda_star.clone()],
        vec![Rat::zero(), Rat::one()],
    ]);
    let n0 = n_shift.matmul(&n_relabel);
    let base_p = p.transform_sigma(&n0).transform_congruence(&m0);

    // exponent assembly, block by block in basis order
    let mut bz = Vec::with_capacity(d);
    let mut fin = Vec::with_capacity(d);
    for blk in &blocks {
        let fin_e = if blk.at_lambda_star { -((d - m_star) as i64) } else { m_star as i64 };
        fin.extend(std::iter::repeat_n(fin_e, blk.size));
        if blk.at_lambda_star && blk.size > 1 {
            bz.extend(block_zero_exponents(blk.size));
        } else {
            bz.extend(std::iter::repeat_n(0i64, blk.size));
        }
    }
    debug_assert_eq!(bz.iter().sum::<i64>(), 0);
    debug_assert_eq!(fin.iter().sum::<i64>(), 0);
    let speedup = 4 * (d - m_star) as i64 + 2;
    let m_exponents: Vec<i64> = bz.iter().zip(&fin).map(|(b, f)| f + speedup * b).collect();
    let n_exponent = 2 * (d - m_star) as i64 + 1;

    // every nonzero entry of the base pair must decay: check the invariant
    // rather than trusting the bookkeeping
    for (mat, sgn) in [(&base_p.a, -1i64), (&base_p.b, 1i64)] {
        for i in 0..d {
            for j in 0..d {
                if !mat[(i, j)].is_zero() {
                    let e = m_exponents[i] + m_exponents[j] + sgn * n_exponent;
                    if e < 1 {
                        return Err(WitnessError::Internal("non-decaying entry in flat curve"));
                    }
                }
            }
        }
    }
    Ok(DestabilizingCurve {
        kind: CurveKind::FlatNonvanishing,
        m0,
        n0,
        m_exponents,
        n_exponent,
        bz_exponents: bz,
        fin_exponents: fin,
        speedup,
        base: (base_p.a, base_p.b),
        blocks,
        lambda_star: Some(lambda_star),
    })
}

/// Block-zeroing exponents for one `J~_r(0)` block: decreasing integers
/// skipping zero for even `r`, consecutive through zero for odd `r`. They
/// satisfy `a_j + a_{r+1-j} = 0` (the `I~` side is fixed exactly) and
/// `a_j + a_{r-j} > 0` (the `J~` side decays).
fn block_zero_exponents(r: usize) -> Vec<i64> {
    let h = (r / 2) as i64;
    if r.is_multiple_of(2) {
        (1..=h).rev().chain((1..=h).map(|v| -v)).collect()
    } else {
        (-h..=h).rev().collect()
    }
}

struct CanonicalReduction {
    m0: Mat<Rat>,
    n_relabel: Mat<Rat>,
    lambda_star: Rat,
    blocks: Vec<CanonicalBlock>,
    m_star: usize,
}

/// Congruence-reduces the pencil to canonical form on the dominant
/// eigenspace: after the relabel `(A', B')` with `B'` invertible, the rows
/// of `m0` realize `m0 A' m0^T = (+) eps_b J~_r(lambda*) (+) G_A` and
/// `m0 B' m0^T = (+) eps_b I~_r (+) G_B`, with the non-dominant part `G`
/// left as an opaque invertible block (its internal Jordan data is never
/// needed). Everything is exact; the final pattern is asserted, not assumed.
fn canonical_reduction(p: &SymmetricPencil<Rat>) -> Result<CanonicalReduction, WitnessError> {
    let d = p.d;
    let eig = crate::classify::flat_eigenstructure(p)?;
    let lambda_star = eig.lambda_star.clone();
    let m_star = eig.m_star;
    // rebuild the relabelled pair from the recorded SL(2) element
    let relabelled = p.transform_sigma(&eig.relabel);
    let (a1, b1) = (relabelled.a, relabelled.b);
    let b1_inv = b1.inverse_exact().ok_or(WitnessError::Internal("relabelled B not invertible"))?;
    let c = a1.matmul(&b1_inv);
    // dominant generalized eigenspace
    let shifted = c.sub(&Mat::identity(d).scale(&lambda_star));
    let mut pow = Mat::<Rat>::identity(d);
    for _ in 0..d {
        pow = pow.matmul(&shifted);
    }
    let k_basis = pow.nullspace_exact();
    if k_basis.len() != m_star {
        return Err(WitnessError::Internal("dominant eigenspace dimension mismatch"));
    }
    // chains of the nilpotent n = C - lambda* w.r.t. the bilinear form
    // B*(x, y) = x^T B'^{-1} y, for which C is self-adjoint
    let bilinear = |x: &[Rat], y: &[Rat]| -> Rat {
        let by = b1_inv.matvec(y);
        x.iter().zip(&by).map(|(a, b)| a.clone() * b.clone()).fold(Rat::zero(), |s, v| s + v)
    };
    let apply_n = |v: &[Rat]| shifted.matvec(v);
    let mut working: Vec<Vec<Rat>> = k_basis;
    let mut chains: Vec<(usize, Rat, Vec<Vec<Rat>>)> = Vec::new(); // (size, eps, vectors)
    while !working.is_empty() {
        let (chain, eps) = extract_chain(&working, &apply_n, &bilinear)
            .ok_or(WitnessError::Internal("no anisotropic chain vector found"))?;
        let r = chain.len();
        // deflate: vectors of the working span orthogonal to the new chain
        let wmat = Mat::from_rows(working.clone());
        let constraints = Mat::from_fn(r, working.len(), |ci, wj| bilinear(&working[wj], &chain[ci]));
        let null = constraints.nullspace_exact();
        let mut next: Vec<Vec<Rat>> = Vec::new();
        let mut next_rank = Mat::<Rat>::zero(0, d);
        for coeffs in null {
            let vec: Vec<Rat> = (0..d)
                .map(|col| {
                    coeffs
                        .iter()
                        .zip(0..working.len())
                        .map(|(c, wi)| c.clone() * wmat[(wi, col)].clone())
                        .fold(Rat::zero(), |s, v| s + v)
                })
                .collect();
            let aug = if next_rank.rows == 0 {
                Mat::from_rows(vec![vec.clone()])
            } else {
                next_rank.vcat(&Mat::from_rows(vec![vec.clone()]))
            };
            if aug.rank_exact() > next_rank.rows {
                next.push(vec);
                next_rank = aug;
            }
        }
        chains.push((r, eps, chain));
        working = next;
    }
    // deterministic order: larger blocks first
    chains.sort_by_key(|c| std::cmp::Reverse(c.0));
    let total: usize = chains.iter().map(|(r, _, _)| *r).sum();
    if total != m_star {
        return Err(WitnessError::Internal("chain sizes do not sum to m*"));
    }
    // non-dominant companion subspace: B*-orthocomplement of the dominant
    // eigenspace (C-invariant, cross-blocks vanish exactly)
    let chain_vectors: Vec<Vec<Rat>> = chains.iter().flat_map(|(_, _, ch)| ch.clone()).collect();
    let ortho_constraints =
        Mat::from_fn(chain_vectors.len(), d, |ci, col| {
            let bv = b1_inv.matvec(&chain_vectors[ci]);
            bv[col].clone()
        });
    let w_basis = ortho_constraints.nullspace_exact();
    if w_basis.len() != d - m_star {
        return Err(WitnessError::Internal("companion subspace dimension mismatch"));
    }
    // assemble U (columns) and m0 = U^T B'^{-1}
    let mut cols: Vec<Vec<Rat>> = chain_vectors;
    cols.extend(w_basis);
    let u = Mat::from_fn(d, d, |r_, c_| cols[c_][r_].clone());
    let m0 = u.transpose().matmul(&b1_inv);
    // blocks metadata
    let mut blocks: Vec<CanonicalBlock> = chains
        .iter()
        .map(|(r, eps, _)| CanonicalBlock { size: *r, epsilon: eps.clone(), at_lambda_star: true })
        .collect();
    if d > m_star {
        blocks.push(CanonicalBlock { size: d - m_star, epsilon: Rat::one(), at_lambda_star: false });
    }
    // verify the canonical pattern exactly
    let pa = m0.matmul(&a1).matmul(&m0.transpose());
    let pb = m0.matmul(&b1).matmul(&m0.transpose());
    verify_canonical_pattern(&pa, &pb, &blocks, &lambda_star)?;
    Ok(CanonicalReduction { m0, n_relabel: eig.relabel, lambda_star, blocks, m_star })
}

/// Finds a chain top `u` with the canonical Hankel profile
/// `B*(u, n^m u) = eps delta_{m, r-1}` inside the working span, where `r`
/// is the nilpotency index. The quadratic form `q(v) = B*(v, n^(r-1) v)`
/// cannot vanish on the whole span, so some basis vector or pair sum is
/// anisotropic; the Hankel normalization is then a triangular solve.
fn extract_chain(
    working: &[Vec<Rat>],
    apply_n: &impl Fn(&[Rat]) -> Vec<Rat>,
    bilinear: &impl Fn(&[Rat], &[Rat]) -> Rat,
) -> Option<(Vec<Vec<Rat>>, Rat)> {
    // nilpotency index on the span
    let mut r = 1usize;
    {
        let mut powers: Vec<Vec<Vec<Rat>>> = vec![working.to_vec()];
        loop {
            let last = powers.last().unwrap();
            let next: Vec<Vec<Rat>> = last.iter().map(|v| apply_n(v)).collect();
            if next.iter().all(|v| v.iter().all(|x| x.is_zero())) {
                break;
            }
            powers.push(next);
            r += 1;
        }
    }
    let q = |v: &[Rat]| -> Rat {
        let mut nv = v.to_vec();
        for _ in 0..r - 1 {
            nv = apply_n(&nv);
        }
        bilinear(v, &nv)
    };
    let mut candidate: Option<Vec<Rat>> = None;
    'search: for (i, w) in working.iter().enumerate() {
        if !q(w).is_zero() {
            candidate = Some(w.clone());
            break 'search;
        }
        for w2 in working.iter().skip(i + 1) {
            let sum: Vec<Rat> = w.iter().zip(w2).map(|(a, b)| a.clone() + b.clone()).collect();
            if !q(&sum).is_zero() {
                candidate = Some(sum);
                break 'search;
            }
        }
    }
    let v = candidate?;
    // Hankel moments q_m = B*(v, n^m v)
    let mut n_pows: Vec<Vec<Rat>> = vec![v.clone()];
    for _ in 0..r - 1 {
        n_pows.push(apply_n(n_pows.last().unwrap()));
    }
    let qm: Vec<Rat> = (0..r).map(|m| bilinear(&v, &n_pows[m])).collect();
    let eps = qm[r - 1].clone();
    debug_assert!(!eps.is_zero());
    // coefficients c_0 = 1, c_1 .. c_{r-1} making all moments below r-1 vanish:
    // with s_m = sum_{a+b=m} c_a c_b the equations are
    // sum_{m=0}^{r-1-j} s_m q_{j+m} = 0 for j = r-2 .. 0, solved triangularly.
    let mut c = vec![Rat::zero(); r];
    c[0] = Rat::one();
    let mut s = vec![Rat::zero(); r];
    s[0] = Rat::one();
    for step in 1..r {
        let j = r - 1 - step;
        // sum_{m=0}^{step} s_m q_{j+m} = 0 with s_step unknown
        let mut acc = Rat::zero();
        for m in 0..step {
            acc += s[m].clone() * qm[j + m].clone();
        }
        let s_step = -acc / eps.clone();
        // c_step from s_step = 2 c_step + sum_{a=1}^{step-1} c_a c_{step-a}
        let mut inner = Rat::zero();
        for a in 1..step {
            inner += c[a].clone() * c[step - a].clone();
        }
        c[step] = (s_step.clone() - inner) / rat_int(2);
        s[step] = s_step;
    }
    // u = sum c_a n^a v, chain e_j = n^(j-1) u
    let dim = v.len();
    let mut u = vec![Rat::zero(); dim];
    for (a, ca) in c.iter().enumerate() {
        for (idx, val) in n_pows[a].iter().enumerate() {
            u[idx] = u[idx].clone() + ca.clone() * val.clone();
        }
    }
    let mut chain = vec![u.clone()];
    for _ in 1..r {
        chain.push(apply_n(chain.last().unwrap()));
    }
    Some((chain, eps))
}

fn verify_canonical_pattern(
    pa: &Mat<Rat>,
    pb: &Mat<Rat>,
    blocks: &[CanonicalBlock],
    lambda_star: &Rat,
) -> Result<(), WitnessError> {
    let d = pa.rows;
    // expected pattern matrices
    let mut ea = Mat::<Rat>::zero(d, d);
    let mut eb = Mat::<Rat>::zero(d, d);
    let mut off = 0usize;
    for blk in blocks {
        let r = blk.size;
        if blk.at_lambda_star {
            for j in 0..r {
                // I~ antidiagonal
                eb[(off + j, off + r - 1 - j)] = blk.epsilon.clone();
                // J~(lambda*): lambda on the I~ antidiagonal, 1 on the shifted one
                ea[(off + j, off + r - 1 - j)] =
                    ea[(off + j, off + r - 1 - j)].clone() + blk.epsilon.clone() * lambda_star.clone();
                if j + 1 < r {
                    ea[(off + j, off + r - 2 - j)] =
                        ea[(off + j, off + r - 2 - j)].clone() + blk.epsilon.clone();
                }
            }
        } else {
            // opaque companion block: copy through
            for i in 0..r {
                for j in 0..r {
                    ea[(off + i, off + j)] = pa[(off + i, off + j)].clone();
                    eb[(off + i, off + j)] = pb[(off + i, off + j)].clone();
                }
            }
        }
        off += r;
    }
    if &ea != pa || &eb != pb {
        return Err(WitnessError::Internal("canonical pattern verification failed"));
    }
    Ok(())
}

/// Greedy completion of the given rows to a basis of R^d using standard
/// basis vectors.
fn complete_to_basis(mut rows: Vec<Vec<Rat>>, d: usize) -> Option<Mat<Rat>> {
    let mut rank_mat = if rows.is_empty() { Mat::<Rat>::zero(0, d) } else { Mat::from_rows(rows.clone()) };
    if rank_mat.rows > 0 && rank_mat.rank_exact() != rank_mat.rows {
        return None;
    }
    for j in 0..d {
        if rows.len() == d {
            break;
        }
        let mut e = vec![Rat::zero(); d];
        e[j] = Rat::one();
        let aug = rank_mat.vcat(&Mat::from_rows(vec![e.clone()]));
        if aug.rank_exact() > rank_mat.rows {
            rows.push(e);
            rank_mat = aug;
        }
    }
    if rows.len() == d {
        Some(Mat::from_rows(rows))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Decay verification and orbit sampling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DecayReport {
    /// Fitted slope of `log2 |pair|_F` against `log2 lambda`.
    pub slope: f64,
    pub max_residual: f64,
    /// `(log2 lambda, log2 norm)` samples.
    pub samples: Vec<(f64, f64)>,
}

/// Evaluates the orbit norm along the ladder (exactly) and fits the decay
/// slope. A slope below 0.5 signals a construction or classification bug -
/// all constructed curves decay with integer rate at least one.
pub fn verify_decay(
    curve: &DestabilizingCurve,
    ladder: &[Rat],
) -> Result<DecayReport, WitnessError> {
    let mut samples = Vec::with_capacity(ladder.len());
    for lambda in ladder {
        let (a, b) = curve.transformed_pair(lambda);
        let nsq = frobenius_sq_exact_real(&a) + frobenius_sq_exact_real(&b);
        let log2n = rat_log2_abs(&nsq).map(|l| l / 2.0).unwrap_or(f64::NEG_INFINITY);
        let log2l = rat_log2_abs(lambda).expect("ladder values are positive");
        if log2n.is_finite() {
            samples.push((log2l, log2n));
        }
    }
    if samples.len() < 2 {
        return Err(WitnessError::Internal("not enough finite norm samples"));
    }
    let (slope, max_residual) = fit_line(&samples);
    if slope < 0.5 {
        return Err(WitnessError::NonDecaying { slope });
    }
    Ok(DecayReport { slope, max_residual, samples })
}

/// Least-squares line fit returning `(slope, max_residual)`; shared by the
/// decay, sublevel and scaling diagnostics.
pub fn fit_line(samples: &[(f64, f64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let sx: f64 = samples.iter().map(|(x, _)| x).sum();
    let sy: f64 = samples.iter().map(|(_, y)| y).sum();
    let sxx: f64 = samples.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = samples.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let max_residual = samples
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0f64, f64::max);
    (slope, max_residual)
}

/// Minimum Frobenius norm of `rho_M sigma_N (A,B)` over random group
/// elements with entries bounded by `radius`, plus any caller-provided
/// elements. A diagnostic lower-bound probe, not a certificate.
pub fn sampled_orbit_infimum(
    p: &SymmetricPencil<f64>,
    trials: usize,
    radius: f64,
    seed: u64,
    extras: &[GroupElement],
) -> f64 {
    let d = p.d;
    let a_c = p.a.map(|x| Complex64::new(*x, 0.0));
    let b_c = p.b.map(|x| Complex64::new(*x, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let mut eval = |g: &GroupElement| {
        let (ta, tb) = act(g, &a_c, &b_c);
        let norm: f64 = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| ta[(i, j)].norm_sqr() + tb[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm < best {
            best = norm;
        }
    };
    for g in extras {
        eval(g);
    }
    let mut made = 0usize;
    while made < trials {
        let m = random_sl(&mut rng, d, radius);
        let n = random_sl(&mut rng, 2, radius);
        if let (Some(m), Some(n)) = (m, n) {
            eval(&GroupElement { m, n });
            made += 1;
        }
    }
    best
}

fn random_sl(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Option<Mat<Complex64>> {
    let mut m = Mat::<f64>::zero(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = rng.gen_range(-radius..radius);
        }
    }
    let det = crate::mat::det_lu(&m);
    if det.abs() < 1e-9 {
        return None;
    }
    if det < 0.0 {
        for j in 0..d {
            m[(0, j)] = -m[(0, j)];
        }
    }
    let scale = det.abs().powf(-1.0 / d as f64);
    Some(m.map(|x| Complex64::new(x * scale, 0.0)))
}
