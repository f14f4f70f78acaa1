//! Projective roots of binary forms, with algebraic multiplicities.
//!
//! A root is a point `[a:b]` of the complex projective line with
//! `P(a,b) = 0`; its multiplicity is the largest power of the corresponding
//! linear divisor `(b s - a t)` dividing `P`. Exact mode gets multiplicities
//! from iterated-GCD square-free decomposition (positions of the square-free
//! factors are still found numerically: the downstream classification only
//! consumes multiplicities). Float mode clusters root estimates in the
//! chordal metric.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::pencil::BinaryForm;
use crate::scalar::Rat;

#[derive(Debug, Error, PartialEq)]
pub enum RootsError {
    #[error("the zero form has no root multiset")]
    ZeroForm,
    #[error("two root clusters sit in the ambiguity band (gap {gap:.3e}, resolution {resolution:.3e}); retry in exact mode")]
    ClusterAmbiguous { gap: f64, resolution: f64 },
}

/// Default single-linkage threshold in the chordal metric; separates
/// double-precision eigenvalue scatter from genuinely distinct roots for
/// `d <= 12` at moderate conditioning.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

/// A normalized projective root `[a:b]` with multiplicity.
#[derive(Debug, Clone)]
pub struct ProjectiveRoot {
    pub a: Complex64,
    pub b: Complex64,
    pub multiplicity: usize,
    pub is_real: bool,
}

#[derive(Debug, Clone)]
pub struct RootMultiset {
    pub degree: usize,
    pub roots: Vec<ProjectiveRoot>,
}

impl RootMultiset {
    pub fn distinct_count(&self) -> usize {
        self.roots.len()
    }

    /// Multiset of multiplicities, sorted descending.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.roots.iter().map(|r| r.multiplicity).collect();
        m.sort_unstable_by(|x, y| y.cmp(x));
        m
    }
}

/// The maximal multiplicity and one witnessing root; ties broken by the
/// normalization order (lexicographic on `(Re a, Im a, Re b, Im b)`).
pub fn max_multiplicity(set: &RootMultiset) -> (usize, ProjectiveRoot) {
    assert!(!set.roots.is_empty(), "empty root multiset");
    let m = set.roots.iter().map(|r| r.multiplicity).max().unwrap();
    let mut best: Option<&ProjectiveRoot> = None;
    for r in set.roots.iter().filter(|r| r.multiplicity == m) {
        best = match best {
            None => Some(r),
            Some(b) => {
                if lex_key(r) < lex_key(b) {
                    Some(r)
                } else {
                    Some(b)
                }
            }
        };
    }
    (m, best.unwrap().clone())
}

fn lex_key(r: &ProjectiveRoot) -> [f64; 4] {
    [r.a.re, r.a.im, r.b.re, r.b.im]
}

/// Chordal metric on the complex projective line, valued in `[0, 1]`.
pub fn chordal_distance(p: (Complex64, Complex64), q: (Complex64, Complex64)) -> f64 {
    let num = (p.0 * q.1 - p.1 * q.0).norm();
    let den = (p.0.norm_sqr() + p.1.norm_sqr()).sqrt() * (q.0.norm_sqr() + q.1.norm_sqr()).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Scales so `max(|a|,|b|) = 1` and rotates so the first non-zero component
/// has positive real part (it comes out exactly real).
pub fn normalize_rep(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    assert!(na > 0.0 || nb > 0.0);
    if na >= nb {
        let b = b / a;
        (Complex64::new(1.0, 0.0), b)
    } else if a.norm() <= 1e-14 * nb {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    } else {
        let w = a / b;
        let u = w.conj() / w.norm();
        (w * u, u)
    }
}

// ---------------------------------------------------------------------------
// Exact mode
// ---------------------------------------------------------------------------

/// Exact-multiplicity roots: dehomogenize at `t = 1`, give `[1:0]` the degree
/// drop, then read multiplicities off Yun's square-free decomposition. Root
/// positions of each square-free factor are numerical.
pub fn roots_with_multiplicities_exact(form: &BinaryForm<Rat>) -> Result<RootMultiset, RootsError> {
    if form.is_zero_form() {
        return Err(RootsError::ZeroForm);
    }
    let d = form.degree();
    let poly: Vec<Rat> = form.coeffs.clone(); // index = power of the dehomogenized variable
    let poly = trim_exact(poly);
    let deg = poly.len() - 1;
    let mut roots = Vec::new();
    if deg < d {
        roots.push(ProjectiveRoot {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            multiplicity: d - deg,
            is_real: true,
        });
    }
    for (factor, mult) in yun_squarefree(&poly) {
        if factor.len() <= 1 {
            continue;
        }
        let cf: Vec<Complex64> = factor
            .iter()
            .map(|c| Complex64::new(crate::scalar::rat_to_f64(c), 0.0))
            .collect();
        for z in durand_kerner(&cf) {
            let (a, b) = normalize_rep(z, Complex64::new(1.0, 0.0));
            roots.push(ProjectiveRoot { a, b, multiplicity: mult, is_real: false });
        }
    }
    pair_conjugates(&mut roots, 1e-8);
    sort_roots(&mut roots);
    debug_assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), d);
    Ok(RootMultiset { degree: d, roots })
}

fn trim_exact(mut p: Vec<Rat>) -> Vec<Rat> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn poly_deriv(p: &[Rat]) -> Vec<Rat> {
    if p.len() <= 1 {
        return vec![Rat::zero()];
    }
    (1..p.len()).map(|k| p[k].clone() * Rat::from_integer(k.into())).collect()
}

fn poly_monic(p: &[Rat]) -> Vec<Rat> {
    let lead = p.last().unwrap().clone();
    p.iter().map(|c| c.clone() / lead.clone()).collect()
}

fn poly_is_zero(p: &[Rat]) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let b = trim_exact(b.to_vec());
    assert!(!poly_is_zero(&b), "division by the zero polynomial");
    let mut rem = trim_exact(a.to_vec());
    let db = b.len() - 1;
    let lead = b.last().unwrap().clone();
    if db == 0 {
        let quo: Vec<Rat> = rem.iter().map(|c| c.clone() / lead.clone()).collect();
        return (quo, vec![Rat::zero()]);
    }
    if rem.len() < b.len() {
        return (vec![Rat::zero()], rem);
    }
    let mut quo = vec![Rat::zero(); rem.len() - db];
    while rem.len() > db {
        let da = rem.len() - 1;
        let coef = rem.last().unwrap().clone() / lead.clone();
        quo[da - db] = coef.clone();
        for i in 0..=db {
            let idx = da - db + i;
            let sub = coef.clone() * b[i].clone();
            rem[idx] = rem[idx].clone() - sub;
        }
        rem.pop();
        rem = trim_exact(rem);
        if poly_is_zero(&rem) {
            break;
        }
    }
    (quo, rem)
}

fn poly_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut x = trim_exact(a.to_vec());
    let mut y = trim_exact(b.to_vec());
    if poly_is_zero(&y) {
        return poly_monic_or_one(&x);
    }
    loop {
        let (_, r) = poly_divrem(&x, &y);
        if poly_is_zero(&r) {
            return poly_monic_or_one(&y);
        }
        x = y;
        y = poly_monic(&r);
    }
}

fn poly_monic_or_one(p: &[Rat]) -> Vec<Rat> {
    if p.len() == 1 {
        vec![Rat::one()]
    } else {
        poly_monic(p)
    }
}

/// Yun's square-free decomposition: returns `(factor, multiplicity)` pairs
/// with the factors monic, square-free and pairwise coprime.
pub(crate) fn yun_squarefree(p: &[Rat]) -> Vec<(Vec<Rat>, usize)> {
    let p = poly_monic_or_one(&trim_exact(p.to_vec()));
    if p.len() <= 1 {
        return Vec::new();
    }
    let dp = poly_deriv(&p);
    let g = poly_gcd(&p, &dp);
    let mut out = Vec::new();
    if g.len() == 1 {
        return vec![(p, 1)];
    }
    let (mut b, _) = poly_divrem(&p, &g);
    let (c0, _) = poly_divrem(&dp, &g);
    let mut d: Vec<Rat> = sub_poly(&c0, &poly_deriv(&b));
    let mut i = 1;
    while b.len() > 1 {
        let a = poly_gcd(&b, &d);
        if a.len() > 1 {
            out.push((a.clone(), i));
        }
        let (b_next, _) = poly_divrem(&b, &a);
        let (c_next, _) = poly_divrem(&d, &a);
        b = b_next;
        d = sub_poly(&c_next, &poly_deriv(&b));
        i += 1;
    }
    out
}

fn sub_poly(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let get = |p: &[Rat], i: usize| p.get(i).cloned().unwrap_or_else(Rat::zero);
    trim_exact((0..n).map(|i| get(a, i) - get(b, i)).collect())
}

// ---------------------------------------------------------------------------
// Float mode
// ---------------------------------------------------------------------------

/// Durand-Kerner root iteration for a complex polynomial (index = power).
/// Good to full precision on simple roots; multiple roots scatter like
/// `eps^(1/m)`, which the clustering below accounts for.
pub(crate) fn durand_kerner(poly: &[Complex64]) -> Vec<Complex64> {
    let n = poly.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = poly[n];
    let monic: Vec<Complex64> = poly.iter().map(|c| c / lead).collect();
    let radius = 1.0
        + monic[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
    let mut w: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius * 0.7, ang)
        })
        .collect();
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    for _ in 0..600 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= w[i] - w[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex64::new(1e-30, 0.0);
            }
            let step = eval(w[i]) / den;
            w[i] -= step;
            delta = delta.max(step.norm() / (1.0 + w[i].norm()));
        }
        if delta < 1e-14 {
            break;
        }
    }
    w
}

/// Float-mode roots: companion-style estimates plus exact `[1:0]` copies for
/// the trimmed degree drop, single-linkage clustering in the chordal metric,
/// then a multiplicity-aware merge (the scatter of an m-fold root is
/// `~eps^(1/m)`, far above `cluster_tol` for m >= 3).
pub fn roots_with_multiplicities_float(
    form: &BinaryForm<f64>,
    cluster_tol: f64,
) -> Result<RootMultiset, RootsError> {
    let d = form.degree();
    let scale = form.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Err(RootsError::ZeroForm);
    }
    let coeffs: Vec<f64> = form.coeffs.iter().map(|c| c / scale).collect();
    let mut deg = d;
    while deg > 0 && coeffs[deg].abs() < 1e-12 {
        deg -= 1;
    }
    let mut points: Vec<(Complex64, Complex64)> = Vec::with_capacity(d);
    for _ in deg..d {
        points.push((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    if deg > 0 {
        let poly: Vec<Complex64> =
            coeffs[..=deg].iter().map(|c| Complex64::new(*c, 0.0)).collect();
        for z in durand_kerner(&poly) {
            points.push((z, Complex64::new(1.0, 0.0)));
        }
    }

    let mut clusters = single_linkage(&points, cluster_tol);
    multiplicity_aware_merge(&points, &coeffs, &mut clusters, cluster_tol);

    // Ambiguity: another cluster inside [resolution, 10 * resolution], where
    // the resolution is the cluster's own scatter radius or the base
    // tolerance, whichever is larger. Multi-member clusters report the
    // Newton-refined m-fold position, which is far more accurate than any
    // individual estimate.
    let centers: Vec<(Complex64, Complex64)> = clusters
        .iter()
        .map(|c| {
            let mean = cluster_center(&points, c);
            if c.len() >= 2 {
                refine_m_fold_center(&coeffs, mean, c.len())
            } else {
                mean
            }
        })
        .collect();
    for (i, ci) in clusters.iter().enumerate() {
        let radius = ci
            .iter()
            .map(|&k| chordal_distance(points[k], centers[i]))
            .fold(0.0f64, f64::max);
        let resolution = (2.0 * radius).max(cluster_tol);
        for (j, _) in clusters.iter().enumerate() {
            if i == j {
                continue;
            }
            let gap = chordal_distance(centers[i], centers[j]);
            if gap >= resolution && gap <= 10.0 * resolution {
                return Err(RootsError::ClusterAmbiguous { gap, resolution });
            }
        }
    }

    let mut roots: Vec<ProjectiveRoot> = clusters
        .iter()
        .zip(&centers)
        .map(|(c, &(a, b))| {
            let (a, b) = normalize_rep(a, b);
            ProjectiveRoot { a, b, multiplicity: c.len(), is_real: false }
        })
        .collect();
    pair_conjugates(&mut roots, (10.0 * cluster_tol).max(1e-6));
    sort_roots(&mut roots);
    Ok(RootMultiset { degree: d, roots })
}

fn single_linkage(points: &[(Complex64, Complex64)], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if chordal_distance(points[i], points[j]) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn cluster_center(points: &[(Complex64, Complex64)], cluster: &[usize]) -> (Complex64, Complex64) {
    // Average normalized representatives; the mean cancels the leading-order
    // scatter of a multiple root.
    let mut sa = Complex64::new(0.0, 0.0);
    let mut sb = Complex64::new(0.0, 0.0);
    let reference = normalize_rep(points[cluster[0]].0, points[cluster[0]].1);
    for &k in cluster {
        let (a, b) = normalize_rep(points[k].0, points[k].1);
        // align the phase with the reference so antipodal reps do not cancel
        let ip = a * reference.0.conj() + b * reference.1.conj();
        let u = if ip.norm() > 0.0 { ip.conj() / ip.norm() } else { Complex64::new(1.0, 0.0) };
        sa += a * u;
        sb += b * u;
    }
    let inv = 1.0 / cluster.len() as f64;
    (sa * inv, sb * inv)
}

/// Degeneracy threshold for the merge test. At the Newton-refined center of
/// a noise-degenerate m-fold root every scaled Taylor coefficient below
/// order m is of the size of the coefficient noise itself (~1e-12 relative
/// for double-precision pipelines), while two genuinely distinct roots at
/// separation g leave |P| ~ (g/2)^2 at their critical point. 1e-8 therefore
/// passes machine noise with three orders of margin and rejects separations
/// beyond ~2e-4.
const PROFILE_DEGENERACY_TOL: f64 = 1e-8;

/// Merges clusters that a multiple root scattered apart. Two clusters fuse
/// exactly when the Taylor profile of the form at their joint mean is
/// degenerate through the combined order: that is, when the polynomial
/// itself carries a near-m-fold root at the joint center. DK estimates of
/// an m-fold root scatter like eps^(1/m), far beyond any fixed linkage
/// threshold, so this test is what actually recovers multiplicities.
fn multiplicity_aware_merge(
    points: &[(Complex64, Complex64)],
    coeffs: &[f64],
    clusters: &mut Vec<Vec<usize>>,
    cluster_tol: f64,
) {
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let joint: Vec<usize> =
                    clusters[i].iter().chain(clusters[j].iter()).copied().collect();
                let m = joint.len();
                let mean = cluster_center(points, &joint);
                let spread = joint
                    .iter()
                    .map(|&k| chordal_distance(points[k], mean))
                    .fold(0.0f64, f64::max);
                let refined = refine_m_fold_center(coeffs, mean, m);
                // reject runaway refinements: the candidate m-fold root must
                // sit inside the cluster's own footprint
                if chordal_distance(refined, mean) > 10.0 * (spread + cluster_tol) {
                    continue;
                }
                if !profile_degenerate_to_order(coeffs, refined, m) {
                    continue;
                }
                let gap = chordal_distance(
                    cluster_center(points, &clusters[i]),
                    cluster_center(points, &clusters[j]),
                );
                if best.is_none_or(|(_, _, g)| gap < g) {
                    best = Some((i, j, gap));
                }
            }
        }
        match best {
            Some((i, j, _)) => {
                let moved = clusters.remove(j);
                clusters[i].extend(moved);
            }
            None => break,
        }
    }
}

/// Newton refinement of a candidate m-fold root: such a point is a simple
/// root of the (m-1)-th derivative, computed in the chart where the point
/// is small.
fn refine_m_fold_center(
    coeffs: &[f64],
    center: (Complex64, Complex64),
    m: usize,
) -> (Complex64, Complex64) {
    let finite_chart = center.0.norm() <= center.1.norm();
    let (mut z, poly): (Complex64, Vec<Complex64>) = if finite_chart {
        (center.0 / center.1, coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect())
    } else {
        (center.1 / center.0, coeffs.iter().rev().map(|c| Complex64::new(*c, 0.0)).collect())
    };
    let mut q = poly;
    for _ in 0..m.saturating_sub(1) {
        if q.len() <= 1 {
            return center;
        }
        q = (1..q.len()).map(|k| q[k] * k as f64).collect();
    }
    if q.len() <= 1 {
        return center;
    }
    let dq: Vec<Complex64> = (1..q.len()).map(|k| q[k] * k as f64).collect();
    let eval = |p: &[Complex64], x: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in p.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    for _ in 0..8 {
        let den = eval(&dq, z);
        if den.norm() < 1e-300 {
            break;
        }
        let step = eval(&q, z) / den;
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if finite_chart {
        (z, Complex64::new(1.0, 0.0))
    } else {
        (Complex64::new(1.0, 0.0), z)
    }
}

/// True when all scaled Taylor coefficients below order `m` are negligible
/// at the point, i.e. the form has a numerically m-fold root there.
fn profile_degenerate_to_order(coeffs: &[f64], center: (Complex64, Complex64), m: usize) -> bool {
    let t = taylor_profile(coeffs, center);
    if m >= t.len() {
        return false;
    }
    let tmax = t.iter().fold(0.0f64, |acc, &x| acc.max(x));
    if tmax == 0.0 {
        return true;
    }
    t[..m].iter().all(|&v| v <= PROFILE_DEGENERACY_TOL * tmax)
}

/// Scaled derivative magnitudes `T_j = |p^(j)(z)| rho^j / j!` at the
/// projective point, computed in the chart where the point is small
/// (`|a| <= |b|` uses `P(x, 1)`, otherwise the reversed polynomial).
fn taylor_profile(coeffs: &[f64], center: (Complex64, Complex64)) -> Vec<f64> {
    let d = coeffs.len() - 1;
    let (z, poly): (Complex64, Vec<Complex64>) = if center.0.norm() <= center.1.norm() {
        (center.0 / center.1, coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect())
    } else {
        (center.1 / center.0, coeffs.iter().rev().map(|c| Complex64::new(*c, 0.0)).collect())
    };
    // iterated synthetic division: work(x) = (x - z) q(x) + p^(j)(z)/j!
    let mut work = poly;
    let mut t = Vec::with_capacity(d + 1);
    let rho = 1.0f64.max(z.norm());
    let mut rho_pow = 1.0;
    for _ in 0..=d {
        let mut q = vec![Complex64::new(0.0, 0.0); work.len().saturating_sub(1)];
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..work.len()).rev() {
            acc = acc * z + work[k];
            if k > 0 {
                q[k - 1] = acc;
            }
        }
        t.push(acc.norm() * rho_pow);
        rho_pow *= rho;
        if q.is_empty() {
            break;
        }
        work = q;
    }
    t
}

fn pair_conjugates(roots: &mut [ProjectiveRoot], tol: f64) {
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let conj_i = (roots[i].a.conj(), roots[i].b.conj());
        let self_dist = chordal_distance((roots[i].a, roots[i].b), conj_i);
        if self_dist <= tol {
            // real root: snap the imaginary parts away
            roots[i].a.im = 0.0;
            roots[i].b.im = 0.0;
            let (a, b) = normalize_rep(roots[i].a, roots[i].b);
            roots[i].a = a;
            roots[i].b = b;
            roots[i].is_real = true;
            used[i] = true;
            continue;
        }
        // find the conjugate partner and average the pair
        let mut partner = None;
        for j in i + 1..n {
            if used[j] || roots[j].multiplicity != roots[i].multiplicity {
                continue;
            }
            if chordal_distance((roots[j].a, roots[j].b), conj_i) <= tol {
                partner = Some(j);
                break;
            }
        }
        if let Some(j) = partner {
            let (a, b) =
                normalize_rep(roots[i].a + roots[j].a.conj(), roots[i].b + roots[j].b.conj());
            roots[i].a = a;
            roots[i].b = b;
            roots[i].is_real = false;
            roots[j].a = a.conj();
            roots[j].b = b.conj();
            let (ja, jb) = normalize_rep(roots[j].a, roots[j].b);
            roots[j].a = ja;
            roots[j].b = jb;
            roots[j].is_real = false;
            used[i] = true;
            used[j] = true;
        } else {
            used[i] = true;
        }
    }
}

fn sort_roots(roots: &mut [ProjectiveRoot]) {
    roots.sort_by(|p, q| {
        lex_key(p)
            .partial_cmp(&lex_key(q))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Expands `C * prod (b_j s - a_j t)^(m_j)` and compares against the input
/// coefficients; used by tests as the reconstruction oracle.
pub fn reconstruct_relative_error<T: crate::scalar::Field>(
    form: &BinaryForm<T>,
    set: &RootMultiset,
) -> f64 {
    let d = form.degree();
    let mut poly = vec![Complex64::new(0.0, 0.0); 1];
    poly[0] = Complex64::new(1.0, 0.0);
    for r in &set.roots {
        // divisor of the point [a:b] is (b s - a t): s-coefficient b, t-coefficient -a
        for _ in 0..r.multiplicity {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] += c * r.b; // times s
                next[k] += c * (-r.a); // times t
            }
            poly = next;
        }
    }
    let input: Vec<f64> = form.coeffs.iter().map(|c| c.to_f64_approx()).collect();
    debug_assert_eq!(poly.len(), d + 1);
    // scale the reconstruction to match the largest input coefficient
    let (kmax, &cmax) = input
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
        .unwrap();
    let scale = Complex64::new(cmax, 0.0) / poly[kmax];
    let mut err = 0.0f64;
    let norm = input.iter().map(|c| c.abs()).fold(0.0f64, f64::max).max(1e-300);
    for k in 0..=d {
        err = err.max((poly[k] * scale - Complex64::new(input[k], 0.0)).norm() / norm);
    }
    err
}

/// Test-support hook exposing the raw root iteration.
#[doc(hidden)]
pub fn debug_dk(poly: &[Complex64]) -> Vec<Complex64> {
    durand_kerner(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn form(coeffs: Vec<i64>) -> BinaryForm<Rat> {
        BinaryForm::new(coeffs.into_iter().map(rat_int).collect())
    }

    #[test]
    fn monomial_form_splits_at_zero_and_infinity() {
        // s^2 t^2: coeffs (0,0,1,0,0)
        let f = form(vec![0, 0, 1, 0, 0]);
        let set = roots_with_multiplicities_exact(&f).unwrap();
        assert_eq!(set.multiplicities(), vec![2, 2]);
        let reps: Vec<(f64, f64)> = set.roots.iter().map(|r| (r.a.re, r.b.re)).collect();
        assert!(reps.contains(&(1.0, 0.0))); // [1:0]
        assert!(reps.contains(&(0.0, 1.0))); // [0:1]
    }

    #[test]
    fn binomial_cube_has_triple_root() {
        // (s+t)^3 vanishes at [1:-1]
        let f = form(vec![1, 3, 3, 1]);
        let set = roots_with_multiplicities_exact(&f).unwrap();
        assert_eq!(set.multiplicities(), vec![3]);
        let r = &set.roots[0];
        assert!(r.is_real);
        assert!((r.a.re - 1.0).abs() < 1e-9 && (r.b.re + 1.0).abs() < 1e-9);
        assert_eq!(max_multiplicity(&set).0, 3);
    }

    #[test]
    fn conjugate_pair_for_indefinite_quadratic() {
        // -s^2 - t^2 vanishes at [i:1] and [-i:1]
        let f = form(vec![-1, 0, -1]);
        let set = roots_with_multiplicities_exact(&f).unwrap();
        assert_eq!(set.multiplicities(), vec![1, 1]);
        for r in &set.roots {
            assert!(!r.is_real);
            // normalized: both components have modulus 1, first is real
            assert!((r.a.norm() - 1.0).abs() < 1e-9);
            assert!((r.b.norm() - 1.0).abs() < 1e-9);
            assert!((chordal_distance((r.a, r.b), (Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)))
                * chordal_distance((r.a, r.b), (Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0))))
            .abs()
                < 1e-9);
        }
        assert_eq!(max_multiplicity(&set).0, 1);
        assert!(reconstruct_relative_error(&f, &set) < 1e-9);
    }

    #[test]
    fn float_mode_recovers_high_multiplicity() {
        // (s+t)^4: root scatter ~1e-4 must still cluster to multiplicity 4
        let f = BinaryForm::new(vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        let set = roots_with_multiplicities_float(&f, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(set.multiplicities(), vec![4]);
        assert!(reconstruct_relative_error(&f, &set) < 1e-3);
    }

    #[test]
    fn float_mode_keeps_distinct_roots_apart() {
        // s t (s+t) (s-t): four simple roots
        // = s^3 t - s t^3: coeffs of s^k t^(4-k): k=1: -1, k=3: 1
        let f = BinaryForm::new(vec![0.0, -1.0, 0.0, 1.0, 0.0]);
        let set = roots_with_multiplicities_float(&f, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(set.multiplicities(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn float_and_exact_agree_on_mixed_multiplicities() {
        // t^3 (2s + t): flat profile with an extra simple root
        let fe = form(vec![1, 2, 0, 0, 0]);
        let se = roots_with_multiplicities_exact(&fe).unwrap();
        let ff = BinaryForm::new(vec![1.0, 2.0, 0.0, 0.0, 0.0]);
        let sf = roots_with_multiplicities_float(&ff, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(se.multiplicities(), vec![3, 1]);
        assert_eq!(sf.multiplicities(), vec![3, 1]);
    }

    #[test]
    fn zero_form_rejected() {
        let f = form(vec![0, 0, 0]);
        assert_eq!(roots_with_multiplicities_exact(&f).unwrap_err(), RootsError::ZeroForm);
    }

    #[test]
    fn yun_decomposition_of_products() {
        // (x-1)^2 (x+2)^3 = expand
        let mut p = vec![Rat::one()];
        for (root, mult) in [(1i64, 2usize), (-2, 3)] {
            for _ in 0..mult {
                // multiply by (x - root)
                let mut next = vec![Rat::zero(); p.len() + 1];
                for (k, c) in p.iter().enumerate() {
                    next[k + 1] = next[k + 1].clone() + c.clone();
                    next[k] = next[k].clone() - c.clone() * rat_int(root);
                }
                p = next;
            }
        }
        let parts = yun_squarefree(&p);
        let mults: Vec<usize> = parts.iter().map(|(_, m)| *m).collect();
        assert_eq!(mults, vec![2, 3]);
    }
}
