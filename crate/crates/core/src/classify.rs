//! Curvature classification of a symmetric pencil.
//!
//! The verdict follows the root structure of `Delta(s,t) = det(sA + tB)`:
//!
//! * `Delta` not identically zero, every root multiplicity at most `d/2`:
//!   the surface is well-curved (critical when some multiplicity equals
//!   `d/2` exactly, which costs the endpoint estimate a log factor);
//! * `Delta` not identically zero with a multiplicity `m* > d/2`: flat, with
//!   the Jordan structure of `A B^{-1}` at the offending eigenvalue spelling
//!   out the counterexample geometry;
//! * `Delta` identically zero with trivial common kernel: degenerate,
//!   described by the span `V` of the generic kernels and the common image
//!   `H = (sA+tB)V`;
//! * `Delta` identically zero with a common kernel vector: the fully
//!   degenerate case.
//!
//! Exact mode decides everything with rational arithmetic; float mode uses
//! explicit tolerances and refuses to guess when a decision falls inside the
//! ambiguity band (the verdict is discontinuous, so guessing is worse than
//! failing).

use num_traits::{One, Zero};
use thiserror::Error;

use crate::mat::{nullspace_float, rank_float, Mat};
use crate::pencil::{det_pencil, SymmetricPencil};
use crate::roots::{
    max_multiplicity, roots_with_multiplicities_exact, roots_with_multiplicities_float,
    RootsError, DEFAULT_CLUSTER_TOL,
};
use crate::scalar::{rat_int, Rat};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("determinant coefficients are below the zero band but not exactly zero; use exact mode")]
    NumericallyAmbiguous,
    #[error("root clustering ambiguous: {0}")]
    Roots(#[from] RootsError),
    #[error("sampled generic images disagree; numerical failure in kernel-split analysis")]
    InconsistentImages,
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("float Jordan structure requires the unsafe-numerics flag (rank decisions are discontinuous)")]
    JordanNeedsUnsafeNumerics,
    #[error("rank decision within the float tolerance band; use exact mode")]
    RankAmbiguous,
}

/// Jordan data of `A B^{-1}` at the eigenvalue of maximal total multiplicity
/// (after a recorded `SL(2)` relabel making the second matrix invertible).
#[derive(Debug, Clone, PartialEq)]
pub struct FlatEigenstructure<T> {
    pub lambda_star: T,
    /// The relabel applied before inverting: `(A', B') = (l A + m B, l' A + m' B)`.
    pub relabel: Mat<T>,
    /// Number of Jordan blocks of size 1 at `lambda_star`.
    pub n0: usize,
    /// Sizes of the Jordan blocks of size > 1, descending.
    pub big_blocks: Vec<usize>,
    pub m_star: usize,
}

impl<T> FlatEigenstructure<T> {
    /// All block sizes at the distinguished eigenvalue, descending.
    pub fn blocks(&self) -> Vec<usize> {
        let mut b = self.big_blocks.clone();
        b.extend(std::iter::repeat_n(1, self.n0));
        b
    }
}

/// Kernel geometry for an identically vanishing determinant without a
/// common kernel: `V` spans the
/// kernels over generic `(s,t)`, `H` is the shared image `(sA + tB)V`, and
/// `epsilon = (dim V - dim H) / (d - dim H)` is the exponent-defect the
/// counterexample family realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSplit<T> {
    pub generic_samples: Vec<(T, T)>,
    pub v_basis: Vec<Vec<T>>,
    pub h_basis: Vec<Vec<T>>,
    pub epsilon: T,
}

impl<T> KernelSplit<T> {
    pub fn dim_v(&self) -> usize {
        self.v_basis.len()
    }
    pub fn dim_h(&self) -> usize {
        self.h_basis.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureVerdict<T> {
    WellCurved {
        /// True exactly when some root multiplicity equals `d/2`.
        critical: bool,
        max_multiplicity: usize,
    },
    FlatNonvanishing {
        m_star: usize,
        /// Present in exact mode; float mode fills it only under the
        /// unsafe-numerics flag since Jordan structure is discontinuous.
        eigenstructure: Option<FlatEigenstructure<T>>,
    },
    DegenerateKernelSplit(KernelSplit<T>),
    DegenerateCommonKernel {
        common_kernel: Vec<Vec<T>>,
        /// Basis of `im A + im B`, the proper subspace every pencil member
        /// maps into (the orthogonal complement of the common kernel).
        image_span: Vec<Vec<T>>,
    },
}

impl<T> CurvatureVerdict<T> {
    pub fn tag(&self) -> &'static str {
        match self {
            CurvatureVerdict::WellCurved { .. } => "well-curved",
            CurvatureVerdict::FlatNonvanishing { .. } => "flat-nonvanishing",
            CurvatureVerdict::DegenerateKernelSplit(_) => "degenerate-kernel-split",
            CurvatureVerdict::DegenerateCommonKernel { .. } => "degenerate-common-kernel",
        }
    }

    pub fn is_well_curved(&self) -> bool {
        matches!(self, CurvatureVerdict::WellCurved { .. })
    }
}

// ---------------------------------------------------------------------------
// Exact mode
// ---------------------------------------------------------------------------

/// Exact-mode classification; see the module docs for the branch map.
pub fn classify(p: &SymmetricPencil<Rat>) -> Result<CurvatureVerdict<Rat>, ClassifyError> {
    let delta = det_pencil(p);
    if delta.is_zero_form() {
        let stacked = p.a.vcat(&p.b);
        let common = stacked.nullspace_exact();
        if !common.is_empty() {
            return Ok(CurvatureVerdict::DegenerateCommonKernel {
                image_span: image_span_exact(p),
                common_kernel: common,
            });
        }
        return kernel_split(p).map(CurvatureVerdict::DegenerateKernelSplit);
    }
    let roots = roots_with_multiplicities_exact(&delta)?;
    let (m_star, _) = max_multiplicity(&roots);
    if 2 * m_star <= p.d {
        Ok(CurvatureVerdict::WellCurved { critical: 2 * m_star == p.d, max_multiplicity: m_star })
    } else {
        let eig = flat_eigenstructure(p)?;
        Ok(CurvatureVerdict::FlatNonvanishing { m_star, eigenstructure: Some(eig) })
    }
}

/// Basis of `im A + im B` (for symmetric matrices this is the orthogonal
/// complement of `ker A meet ker B`).
fn image_span_exact(p: &SymmetricPencil<Rat>) -> Vec<Vec<Rat>> {
    // rows of A and B span the column space (symmetry)
    let stacked = p.a.vcat(&p.b);
    let (r, pivots) = stacked.rref_exact();
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

/// Jordan block data of `A' (B')^{-1}` at the dominant eigenvalue, where
/// `(A', B')` is the pencil after an `SL(2)` relabel making `B'` invertible
/// (smallest `|s0|` over the sample grid, preferring `(0,1)` so the relabel
/// is the identity whenever `det B != 0`).
pub fn flat_eigenstructure(
    p: &SymmetricPencil<Rat>,
) -> Result<FlatEigenstructure<Rat>, ClassifyError> {
    let d = p.d;
    let delta = det_pencil(p);
    if delta.is_zero_form() {
        return Err(ClassifyError::Precondition("pencil determinant vanishes identically"));
    }
    let roots = roots_with_multiplicities_exact(&delta)?;
    let (m_star, _) = max_multiplicity(&roots);
    if 2 * m_star <= d {
        return Err(ClassifyError::Precondition("pencil is not flat (m* <= d/2)"));
    }
    let (relabel, a1, b1) = relabel_to_invertible(p);
    let c = a1.matmul(&b1.inverse_exact().expect("relabelled second matrix is invertible"));
    // q(t) = det(A' + t B') = det B' * prod (lambda_j + t)^(m_j): the
    // dominant eigenvalue is rational because a multiplicity > d/2 factor
    // cannot carry conjugates, so its square-free factor is linear.
    let delta1 = det_pencil(&SymmetricPencil { d, a: a1.clone(), b: b1.clone() });
    let q: Vec<Rat> = (0..=d).map(|j| delta1.coeffs[d - j].clone()).collect();
    let mut lambda_star: Option<Rat> = None;
    for (factor, mult) in crate::roots::yun_squarefree(&q) {
        if mult * (factor.len() - 1) >= m_star && mult == m_star
            && factor.len() == 2 {
                // monic t + c: root t0 = -c, eigenvalue lambda* = -t0 = c
                lambda_star = Some(factor[0].clone());
            }
    }
    let lambda_star = lambda_star.expect("multiplicity > d/2 forces a rational eigenvalue");
    // rank sequence of (C - lambda* I)^k
    let shifted = c.sub(&Mat::identity(d).scale(&lambda_star));
    let mut ranks = vec![d];
    let mut pow = Mat::<Rat>::identity(d);
    for _ in 1..=d {
        pow = pow.matmul(&shifted);
        ranks.push(pow.rank_exact());
    }
    let (n0, big_blocks, total) = blocks_from_ranks(&ranks, d);
    debug_assert_eq!(total, m_star, "Jordan mass must match the root multiplicity");
    Ok(FlatEigenstructure { lambda_star, relabel, n0, big_blocks, m_star })
}

/// Counts Jordan blocks from the rank sequence `r_k = rank(M^k)`:
/// blocks of size exactly k number `r_{k-1} - 2 r_k + r_{k+1}`.
fn blocks_from_ranks(ranks: &[usize], d: usize) -> (usize, Vec<usize>, usize) {
    let r = |k: usize| if k < ranks.len() { ranks[k] } else { ranks[ranks.len() - 1] };
    let mut n0 = 0;
    let mut big = Vec::new();
    let mut total = 0;
    for k in 1..=d {
        let count = (r(k - 1) + r(k + 1)).saturating_sub(2 * r(k));
        if count > 0 {
            total += count * k;
            if k == 1 {
                n0 = count;
            } else {
                for _ in 0..count {
                    big.push(k);
                }
            }
        }
    }
    big.sort_unstable_by(|a, b| b.cmp(a));
    (n0, big, total)
}

/// The `SL(2)` relabel `(A', B') = (-1/s0 B, s0 A + t0 B)` for the first
/// grid point with `det(s0 A + t0 B) != 0`; identity when `det B != 0`.
fn relabel_to_invertible(p: &SymmetricPencil<Rat>) -> (Mat<Rat>, Mat<Rat>, Mat<Rat>) {
    if !crate::mat::det_bareiss(&p.b).is_zero() {
        return (Mat::identity(2), p.a.clone(), p.b.clone());
    }
    for k in 1..=(p.d as i64 + 1) {
        for s0 in [rat_int(k), rat_int(-k)] {
            let t0 = rat_int(1);
            let member = p.member(&s0, &t0);
            if !crate::mat::det_bareiss(&member).is_zero() {
                let n0 = Mat::from_rows(vec![
                    vec![Rat::zero(), -Rat::one() / s0.clone()],
                    vec![s0.clone(), t0.clone()],
                ]);
                let relabelled = p.transform_sigma(&n0);
                return (n0, relabelled.a, relabelled.b);
            }
        }
    }
    unreachable!("a pencil with nonzero determinant has an invertible member on the grid")
}

/// Generic-kernel analysis for `Delta = 0 identically` with trivial common kernel.
///
/// Genericity is detected by the maximal rank over a deterministic sample
/// set of `2d + 1` directions (the dimension of the kernel stabilizes on a
/// Zariski-open set, and stabilization is verified, not assumed).
pub fn kernel_split(p: &SymmetricPencil<Rat>) -> Result<KernelSplit<Rat>, ClassifyError> {
    let d = p.d;
    let delta = det_pencil(p);
    if !delta.is_zero_form() {
        return Err(ClassifyError::Precondition("pencil determinant does not vanish identically"));
    }
    if !p.a.vcat(&p.b).nullspace_exact().is_empty() {
        return Err(ClassifyError::Precondition("pencil has a common kernel vector"));
    }
    // 2d+1 pairwise non-proportional rational directions
    let samples: Vec<(Rat, Rat)> = (0..(2 * d + 1) as i64)
        .map(|k| (rat_int(1), rat_int(k - d as i64)))
        .map(|(s, t)| if t.is_zero() { (rat_int(1), rat_int(d as i64 + 1)) } else { (s, t) })
        .collect();
    let ranks: Vec<usize> = samples.iter().map(|(s, t)| p.member(s, t).rank_exact()).collect();
    let generic_rank = *ranks.iter().max().unwrap();
    let generic: Vec<(Rat, Rat)> = samples
        .iter()
        .zip(&ranks)
        .filter(|(_, &r)| r == generic_rank)
        .map(|(st, _)| st.clone())
        .collect();
    // V = span of the kernels at generic samples
    let mut kernel_rows: Vec<Vec<Rat>> = Vec::new();
    for (s, t) in &generic {
        kernel_rows.extend(p.member(s, t).nullspace_exact());
    }
    let (vr, vp) = Mat::from_rows(kernel_rows).rref_exact();
    let v_basis: Vec<Vec<Rat>> = (0..vp.len()).map(|i| vr.row(i).to_vec()).collect();
    let k = v_basis.len();
    // H = image of V under one generic member
    let (s0, t0) = generic[0].clone();
    let m0 = p.member(&s0, &t0);
    let image_rows: Vec<Vec<Rat>> = v_basis.iter().map(|v| m0.matvec(v)).collect();
    let (hr, hp) = Mat::from_rows(image_rows).rref_exact();
    let h_basis: Vec<Vec<Rat>> = (0..hp.len()).map(|i| hr.row(i).to_vec()).collect();
    let l = h_basis.len();
    // image coincidence and kernel containment across all generic samples
    let h_mat = Mat::from_rows(h_basis.clone());
    let v_mat = Mat::from_rows(v_basis.clone());
    for (s, t) in &generic {
        let m = p.member(s, t);
        for v in &v_basis {
            let img = m.matvec(v);
            if !in_row_span(&h_mat, &img) {
                return Err(ClassifyError::InconsistentImages);
            }
        }
        for kvec in m.nullspace_exact() {
            if !in_row_span(&v_mat, &kvec) {
                return Err(ClassifyError::InconsistentImages);
            }
        }
    }
    // V and H are orthogonal: exact Gram check
    for v in &v_basis {
        for h in &h_basis {
            let ip: Rat = v.iter().zip(h).map(|(x, y)| x.clone() * y.clone()).fold(Rat::zero(), |a, b| a + b);
            if !ip.is_zero() {
                return Err(ClassifyError::InconsistentImages);
            }
        }
    }
    let epsilon = (rat_int(k as i64) - rat_int(l as i64)) / (rat_int(d as i64) - rat_int(l as i64));
    Ok(KernelSplit { generic_samples: generic, v_basis, h_basis, epsilon })
}

fn in_row_span(basis: &Mat<Rat>, v: &[Rat]) -> bool {
    if basis.rows == 0 {
        return v.iter().all(|x| x.is_zero());
    }
    let aug = basis.vcat(&Mat::from_rows(vec![v.to_vec()]));
    aug.rank_exact() == basis.rows
}

// ---------------------------------------------------------------------------
// Float mode
// ---------------------------------------------------------------------------

/// Tolerances for float-mode decisions; every threshold is explicit.
#[derive(Debug, Clone)]
pub struct FloatConfig {
    /// Zero-form band: coefficients below `zero_band_rel * (|A|_F + |B|_F)^d`
    /// but not exactly zero raise `NumericallyAmbiguous`.
    pub zero_band_rel: f64,
    /// Numerical-rank threshold relative to the largest singular value.
    pub rank_rel_tol: f64,
    /// Chordal clustering threshold for root multiplicities.
    pub cluster_tol: f64,
    /// Allow float-mode Jordan structure (discontinuous; off by default).
    pub unsafe_numerics: bool,
}

impl Default for FloatConfig {
    fn default() -> Self {
        FloatConfig {
            zero_band_rel: 1e-10,
            rank_rel_tol: 1e-8,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            unsafe_numerics: false,
        }
    }
}

/// Float-mode classification with the tolerances of `cfg`.
pub fn classify_float(
    p: &SymmetricPencil<f64>,
    cfg: &FloatConfig,
) -> Result<CurvatureVerdict<f64>, ClassifyError> {
    let delta = det_pencil(p);
    let scale = (crate::mat::frobenius_f64(&p.a) + crate::mat::frobenius_f64(&p.b)).powi(p.d as i32);
    let max_coeff = delta.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max_coeff == 0.0 {
        return classify_float_degenerate(p, cfg);
    }
    if max_coeff < cfg.zero_band_rel * scale.max(f64::MIN_POSITIVE) {
        return Err(ClassifyError::NumericallyAmbiguous);
    }
    let roots = roots_with_multiplicities_float(&delta, cfg.cluster_tol)?;
    let (m_star, _) = max_multiplicity(&roots);
    if 2 * m_star <= p.d {
        Ok(CurvatureVerdict::WellCurved { critical: 2 * m_star == p.d, max_multiplicity: m_star })
    } else if !cfg.unsafe_numerics {
        Ok(CurvatureVerdict::FlatNonvanishing { m_star, eigenstructure: None })
    } else {
        let eig = flat_eigenstructure_float(p, cfg, m_star)?;
        Ok(CurvatureVerdict::FlatNonvanishing { m_star, eigenstructure: Some(eig) })
    }
}

fn classify_float_degenerate(
    p: &SymmetricPencil<f64>,
    cfg: &FloatConfig,
) -> Result<CurvatureVerdict<f64>, ClassifyError> {
    let stacked = p.a.vcat(&p.b);
    let common = nullspace_float(&stacked, cfg.rank_rel_tol);
    if !common.is_empty() {
        let (r, _) = jacobi_row_space(&stacked, cfg.rank_rel_tol);
        return Ok(CurvatureVerdict::DegenerateCommonKernel {
            common_kernel: common,
            image_span: r,
        });
    }
    kernel_split_float(p, cfg).map(CurvatureVerdict::DegenerateKernelSplit)
}

/// Row-space basis via the SVD of the transpose.
fn jacobi_row_space(m: &Mat<f64>, tol: f64) -> (Vec<Vec<f64>>, usize) {
    let (sv, v) = crate::mat::jacobi_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let rank = sv.iter().filter(|&&s| s > tol * smax).count();
    let rows = (0..rank).map(|j| v.col(j)).collect();
    (rows, rank)
}

/// Float kernel-split with SVD rank decisions.
pub fn kernel_split_float(
    p: &SymmetricPencil<f64>,
    cfg: &FloatConfig,
) -> Result<KernelSplit<f64>, ClassifyError> {
    let d = p.d;
    let samples: Vec<(f64, f64)> =
        (0..(2 * d + 1) as i64).map(|k| (1.0, (k - d as i64) as f64 + 0.25)).collect();
    let ranks: Vec<usize> =
        samples.iter().map(|&(s, t)| rank_float(&p.member(&s, &t), cfg.rank_rel_tol)).collect();
    let generic_rank = *ranks.iter().max().unwrap();
    let generic: Vec<(f64, f64)> = samples
        .iter()
        .zip(&ranks)
        .filter(|(_, &r)| r == generic_rank)
        .map(|(st, _)| *st)
        .collect();
    let mut kernel_rows: Vec<Vec<f64>> = Vec::new();
    for &(s, t) in &generic {
        kernel_rows.extend(nullspace_float(&p.member(&s, &t), cfg.rank_rel_tol));
    }
    let (v_basis, _) = jacobi_row_space(&Mat::from_rows(kernel_rows), cfg.rank_rel_tol);
    let k = v_basis.len();
    let (s0, t0) = generic[0];
    let m0 = p.member(&s0, &t0);
    let image_rows: Vec<Vec<f64>> = v_basis.iter().map(|v| m0.matvec(v)).collect();
    let (h_basis, _) = jacobi_row_space(&Mat::from_rows(image_rows), cfg.rank_rel_tol);
    let l = h_basis.len();
    // orthogonality within tolerance
    for v in &v_basis {
        for h in &h_basis {
            let ip: f64 = v.iter().zip(h).map(|(x, y)| x * y).sum();
            if ip.abs() > 1e-6 {
                return Err(ClassifyError::InconsistentImages);
            }
        }
    }
    if k <= l {
        return Err(ClassifyError::InconsistentImages);
    }
    let epsilon = (k - l) as f64 / (d - l) as f64;
    Ok(KernelSplit { generic_samples: generic, v_basis, h_basis, epsilon })
}

/// Float-mode Jordan data (only behind the unsafe-numerics flag). Rank
/// decisions whose singular values fall inside `[0.1, 10] x threshold` raise
/// `RankAmbiguous` instead of guessing.
fn flat_eigenstructure_float(
    p: &SymmetricPencil<f64>,
    cfg: &FloatConfig,
    m_star: usize,
) -> Result<FlatEigenstructure<f64>, ClassifyError> {
    let d = p.d;
    let (relabel, a1, b1) = relabel_to_invertible_float(p, cfg);
    let b1inv = float_inverse(&b1).ok_or(ClassifyError::RankAmbiguous)?;
    let c = a1.matmul(&b1inv);
    // the dominant root of Δ' is [1 : -lambda*]
    let delta1 = det_pencil(&SymmetricPencil { d, a: a1.clone(), b: b1.clone() });
    let roots = roots_with_multiplicities_float(&delta1, cfg.cluster_tol)?;
    let (_, dom) = max_multiplicity(&roots);
    let lambda_star = if dom.a.norm() > 1e-9 { -(dom.b / dom.a).re } else { f64::INFINITY };
    if !lambda_star.is_finite() {
        return Err(ClassifyError::RankAmbiguous);
    }
    let shifted = c.sub(&Mat::identity(d).scale(&lambda_star));
    let mut ranks = vec![d];
    let mut pow = Mat::<f64>::identity(d);
    for _ in 1..=d {
        pow = pow.matmul(&shifted);
        ranks.push(checked_rank_float(&pow, cfg.rank_rel_tol)?);
    }
    let (n0, big_blocks, total) = blocks_from_ranks(&ranks, d);
    if total != m_star {
        return Err(ClassifyError::RankAmbiguous);
    }
    Ok(FlatEigenstructure { lambda_star, relabel, n0, big_blocks, m_star })
}

fn checked_rank_float(m: &Mat<f64>, tol: f64) -> Result<usize, ClassifyError> {
    let (sv, _) = crate::mat::jacobi_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    for &s in &sv {
        let rel = s / smax;
        if rel > 0.1 * tol && rel < 10.0 * tol {
            return Err(ClassifyError::RankAmbiguous);
        }
    }
    Ok(sv.iter().filter(|&&s| s > tol * smax).count())
}

fn relabel_to_invertible_float(
    p: &SymmetricPencil<f64>,
    cfg: &FloatConfig,
) -> (Mat<f64>, Mat<f64>, Mat<f64>) {
    if rank_float(&p.b, cfg.rank_rel_tol) == p.d {
        return (Mat::identity(2), p.a.clone(), p.b.clone());
    }
    for k in 1..=(p.d as i64 + 1) {
        for s0 in [k as f64, -(k as f64)] {
            let member = p.member(&s0, &1.0);
            if rank_float(&member, cfg.rank_rel_tol) == p.d {
                let n0 = Mat::from_rows(vec![vec![0.0, -1.0 / s0], vec![s0, 1.0]]);
                let relabelled = p.transform_sigma(&n0);
                return (n0, relabelled.a, relabelled.b);
            }
        }
    }
    (Mat::identity(2), p.a.clone(), p.b.clone())
}

fn float_inverse(m: &Mat<f64>) -> Option<Mat<f64>> {
    let n = m.rows;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(crate::pencil::PencilScalar::mat_solve(m, &e)?);
    }
    Some(Mat::from_fn(n, n, |r, c| cols[c][r]))
}

// ---------------------------------------------------------------------------
// Pointwise classification of general C^2 surfaces
// ---------------------------------------------------------------------------

/// Per-point verdicts for a Hessian field, plus whether the verdict is
/// constant over the sample set (the perturbation-stability check: the
/// well-curved condition is open, so it should hold on a neighbourhood).
#[derive(Debug)]
pub struct PointwiseReport {
    #[allow(clippy::type_complexity)]
    pub verdicts: Vec<(Vec<f64>, Result<CurvatureVerdict<f64>, ClassifyError>)>,
    pub constant_tag: bool,
}

pub fn classify_surface_pointwise<F>(
    hessian_field: F,
    sample_points: &[Vec<f64>],
    cfg: &FloatConfig,
) -> PointwiseReport
where
    F: Fn(&[f64]) -> (Mat<f64>, Mat<f64>),
{
    let mut verdicts = Vec::with_capacity(sample_points.len());
    for xi in sample_points {
        let (h1, h2) = hessian_field(xi);
        let res = SymmetricPencil::new(h1, h2)
            .map_err(|_| ClassifyError::Precondition("hessian callback returned asymmetric matrices"))
            .and_then(|p| classify_float(&p, cfg));
        verdicts.push((xi.clone(), res));
    }
    let tags: Vec<&'static str> =
        verdicts.iter().filter_map(|(_, r)| r.as_ref().ok().map(|v| v.tag())).collect();
    let constant_tag = !tags.is_empty()
        && tags.iter().all(|t| *t == tags[0])
        && verdicts.iter().all(|(_, r)| r.is_ok());
    PointwiseReport { verdicts, constant_tag }
}

// ---------------------------------------------------------------------------
// Rank condition for restricted Kakeya directions
// ---------------------------------------------------------------------------

/// Verifies the stacked-rank condition `rk [AU; BU] >= rank U` that makes
/// the normal-direction submanifold satisfy the needed transversality, and
/// cross-checks `rk((sA + tB) U) = rank U` at sampled generic `(s,t)`.
/// Requires `Delta` not identically zero.
pub fn rogers_rank_check(
    p: &SymmetricPencil<Rat>,
    u: &Mat<Rat>,
    trials: usize,
) -> Result<bool, ClassifyError> {
    let delta = det_pencil(p);
    if delta.is_zero_form() {
        return Err(ClassifyError::Precondition("pencil determinant vanishes identically"));
    }
    let lu = u.rank_exact();
    if lu != u.cols {
        return Err(ClassifyError::Precondition("U must have full column rank"));
    }
    let stacked = p.a.matmul(u).vcat(&p.b.matmul(u));
    let stacked_ok = stacked.rank_exact() >= lu;
    let mut sampled_ok = true;
    let mut found = 0usize;
    let mut k: i64 = 1;
    while found < trials.max(1) && k <= 4 * (p.d as i64 + 1) {
        let (s, t) = (rat_int(k), rat_int(1));
        let member = p.member(&s, &t);
        if !crate::mat::det_bareiss(&member).is_zero() {
            found += 1;
            if member.matmul(u).rank_exact() != lu {
                sampled_ok = false;
            }
        }
        k += 1;
    }
    Ok(stacked_ok && sampled_ok)
}
