//! Numerical laboratory for the restricted 2-plane transform
//! `T f(x, xi) = integral over |s|,|t| <= 1 of f(x - s A xi - t B xi, s, t)`.
//!
//! Sets are membership predicates with bounding boxes (voxelizing R^(d+2) at
//! delta resolution is infeasible beyond d = 2), pairings are Monte Carlo
//! with importance sampling inside the boxes, and every stochastic estimate
//! carries its seed and a standard error. The counterexample families of the
//! flat and degenerate cases are built here, along with the Kakeya slab
//! experiments.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

use crate::classify::KernelSplit;
use crate::mat::{frobenius_f64, Mat};
use crate::pencil::SymmetricPencil;
use crate::scalar::{Field, Rat};
use crate::witness::{CurveKind, DestabilizingCurve};

#[derive(Debug, Error)]
pub enum OplabError {
    #[error("pairing estimated zero; enlarge the Monte Carlo budget or the sets")]
    ZeroPairing,
    #[error("family requires a {expected} verdict")]
    FamilyMismatch { expected: &'static str },
    #[error("measured value vanished on the ladder")]
    DegenerateMeasure,
}

/// A measurable set given by a deterministic membership callback, its
/// bounding box, and an analytic measure when one is known.
#[derive(Clone)]
pub struct SetPredicate {
    pub dim: usize,
    pub bbox: Vec<(f64, f64)>,
    pub analytic_measure: Option<f64>,
    #[allow(clippy::type_complexity)]
    contains: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl std::fmt::Debug for SetPredicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SetPredicate")
            .field("dim", &self.dim)
            .field("bbox", &self.bbox)
            .field("analytic_measure", &self.analytic_measure)
            .finish()
    }
}

impl SetPredicate {
    pub fn new(
        bbox: Vec<(f64, f64)>,
        analytic_measure: Option<f64>,
        contains: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        SetPredicate { dim: bbox.len(), bbox, analytic_measure, contains: Arc::new(contains) }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        (self.contains)(x)
    }

    pub fn bbox_volume(&self) -> f64 {
        self.bbox.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Euclidean ball.
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let bbox = center.iter().map(|c| (c - radius, c + radius)).collect();
        let measure = unit_ball_volume(center.len()) * radius.powi(center.len() as i32);
        SetPredicate::new(bbox, Some(measure), move |x| {
            x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < radius * radius
        })
    }

    /// Axis-aligned box.
    pub fn cuboid(ranges: Vec<(f64, f64)>) -> Self {
        let measure = ranges.iter().map(|(lo, hi)| hi - lo).product();
        let r = ranges.clone();
        SetPredicate::new(ranges, Some(measure), move |x| {
            x.iter().zip(&r).all(|(v, (lo, hi))| *v >= *lo && *v < *hi)
        })
    }

    /// Cartesian product.
    pub fn product(a: &SetPredicate, b: &SetPredicate) -> Self {
        let mut bbox = a.bbox.clone();
        bbox.extend(b.bbox.iter().cloned());
        let measure = match (a.analytic_measure, b.analytic_measure) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        let (ac, bc) = (a.clone(), b.clone());
        let split = a.dim;
        SetPredicate::new(bbox, measure, move |x| {
            ac.contains(&x[..split]) && bc.contains(&x[split..])
        })
    }

    /// `delta`-neighbourhood of the span of `basis`, intersected with the
    /// cube `[-c, c]^d`. The analytic measure is not stored (the constant
    /// depends on the slice geometry): only the decay exponent matters.
    pub fn subspace_neighborhood(basis: &[Vec<f64>], dim: usize, delta: f64, c: f64) -> Self {
        let proj = orthogonal_projector(basis, dim);
        SetPredicate::new(vec![(-c, c); dim], None, move |x| {
            let px = proj.matvec(x);
            x.iter().zip(&px).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < delta * delta
        })
    }
}

/// Orthogonal projector onto the span of the given vectors (Gram-Schmidt).
fn orthogonal_projector(basis: &[Vec<f64>], dim: usize) -> Mat<f64> {
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for v in basis {
        let mut w = v.clone();
        for u in &ortho {
            let ip: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= ip * ui;
            }
        }
        let n: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            ortho.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    let mut p = Mat::<f64>::zero(dim, dim);
    for u in &ortho {
        for i in 0..dim {
            for j in 0..dim {
                p[(i, j)] += u[i] * u[j];
            }
        }
    }
    p
}

/// Volume of the unit ball in `R^n` (recursion `w_n = 2 pi w_(n-2) / n`).
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI * unit_ball_volume(n - 2) / n as f64,
    }
}

/// A slab `S_delta(x, xi)`: the `delta`-neighbourhood of the 2-plane normal
/// to the surface at `xi`, translated to `x`, with `(s,t)` in the unit
/// square. Its exact measure is `4 w_d delta^d` (every `(s,t)` section is a
/// full `d`-ball).
#[derive(Debug, Clone)]
pub struct Slab {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub delta: f64,
}

impl Slab {
    pub fn contains(&self, p: &SymmetricPencil<f64>, y: &[f64], s: f64, t: f64) -> bool {
        if s.abs() > 1.0 || t.abs() > 1.0 {
            return false;
        }
        let m = p.member(&s, &t);
        let shift = m.matvec(&self.xi);
        let dist_sq: f64 = y
            .iter()
            .zip(&self.x)
            .zip(&shift)
            .map(|((yi, xi), si)| {
                let v = yi - xi + si;
                v * v
            })
            .sum();
        dist_sq < self.delta * self.delta
    }

    pub fn analytic_measure(&self, d: usize) -> f64 {
        4.0 * unit_ball_volume(d) * self.delta.powi(d as i32)
    }
}

// ---------------------------------------------------------------------------
// The transform and its adjoint
// ---------------------------------------------------------------------------

/// Midpoint tensor quadrature of `T f (x, xi)` with `n x n` nodes over the
/// `(s,t)` square.
pub fn apply_t<F>(p: &SymmetricPencil<f64>, f: F, x: &[f64], xi: &[f64], n: usize) -> f64
where
    F: Fn(&[f64], f64, f64) -> f64,
{
    let d = p.d;
    let a_xi = p.a.matvec(xi);
    let b_xi = p.b.matvec(xi);
    let mut acc = 0.0;
    let h = 2.0 / n as f64;
    let mut point = vec![0.0; d];
    for i in 0..n {
        let s = -1.0 + (i as f64 + 0.5) * h;
        for j in 0..n {
            let t = -1.0 + (j as f64 + 0.5) * h;
            for k in 0..d {
                point[k] = x[k] - s * a_xi[k] - t * b_xi[k];
            }
            acc += f(&point, s, t);
        }
    }
    acc * h * h
}

/// Quadrature spec for the adjoint (full grids are only sensible for small d).
#[derive(Debug, Clone, Copy)]
pub enum QuadSpec {
    Grid(usize),
    MonteCarlo { samples: usize, seed: u64 },
}

/// `T* g (y, s, t) = integral over xi in [-1,1]^d of g(y + s A xi + t B xi, xi)`.
pub fn apply_t_star<G>(p: &SymmetricPencil<f64>, g: G, y: &[f64], s: f64, t: f64, quad: QuadSpec) -> f64
where
    G: Fn(&[f64], &[f64]) -> f64,
{
    let d = p.d;
    let m = p.member(&s, &t);
    let eval = |xi: &[f64]| {
        let shift = m.matvec(xi);
        let point: Vec<f64> = y.iter().zip(&shift).map(|(a, b)| a + b).collect();
        g(&point, xi)
    };
    match quad {
        QuadSpec::Grid(n) => {
            assert!(d <= 3, "full tensor grids are only supported for d <= 3");
            let h = 2.0 / n as f64;
            let mut acc = 0.0;
            let mut xi = vec![0.0; d];
            let total = n.pow(d as u32);
            for flat in 0..total {
                let mut rem = flat;
                for k in 0..d {
                    xi[k] = -1.0 + ((rem % n) as f64 + 0.5) * h;
                    rem /= n;
                }
                acc += eval(&xi);
            }
            acc * h.powi(d as i32)
        }
        QuadSpec::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = 0.0;
            let mut xi = vec![0.0; d];
            for _ in 0..samples {
                for k in 0..d {
                    xi[k] = rng.gen_range(-1.0..1.0);
                }
                acc += eval(&xi);
            }
            acc * (1 << d) as f64 / samples as f64
        }
    }
}

/// A function sampled on a tensor grid of `x` and `xi` cells.
#[derive(Debug, Clone)]
pub struct GridFn {
    /// `values[xi_index][x_index]`.
    pub values: Vec<Vec<f64>>,
    pub x_cell_volume: f64,
    pub xi_cell_volume: f64,
}

/// Mixed norm `L^q_xi(L^r_x)`: inner `L^r` in `x`, outer `L^q` in `xi`;
/// infinite exponents take suprema.
pub fn mixed_norm(f: &GridFn, q: f64, r: f64) -> f64 {
    let inner: Vec<f64> = f
        .values
        .iter()
        .map(|row| {
            if r.is_infinite() {
                row.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            } else {
                (row.iter().map(|v| v.abs().powf(r)).sum::<f64>() * f.x_cell_volume).powf(1.0 / r)
            }
        })
        .collect();
    if q.is_infinite() {
        inner.into_iter().fold(0.0f64, f64::max)
    } else {
        (inner.into_iter().map(|v| v.powf(q)).sum::<f64>() * f.xi_cell_volume).powf(1.0 / q)
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo pairings
// ---------------------------------------------------------------------------

const MC_BATCHES: usize = 64;

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

fn clip_unit(range: (f64, f64)) -> (f64, f64) {
    (range.0.max(-1.0), range.1.min(1.0))
}

/// `<T 1_E, 1_F>` by importance sampling: `x` and `xi` from the bounding box
/// of `F` (with `xi` clipped to the unit cube), `(s,t)` from the `E` box
/// clipped to the unit square.
pub fn pairing_t(
    e: &SetPredicate,
    f: &SetPredicate,
    p: &SymmetricPencil<f64>,
    budget: usize,
    seed: u64,
) -> Estimate {
    let d = p.d;
    assert_eq!(e.dim, d + 2, "E lives on R^d x [-1,1]^2");
    assert_eq!(f.dim, 2 * d, "F lives on R^d x [-1,1]^d");
    let mut ranges: Vec<(f64, f64)> = f.bbox[..d].to_vec();
    ranges.extend(f.bbox[d..].iter().map(|&r| clip_unit(r)));
    ranges.push(clip_unit(e.bbox[d]));
    ranges.push(clip_unit(e.bbox[d + 1]));
    let vol: f64 = ranges.iter().map(|(lo, hi)| (hi - lo).max(0.0)).product();
    if vol <= 0.0 {
        return Estimate { value: 0.0, std_err: 0.0 };
    }
    let per_batch = budget.div_ceil(MC_BATCHES);
    let hits: Vec<u64> = crate::par::parallel_map(MC_BATCHES, |batch| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(batch as u64));
        let mut h = 0u64;
        let mut fx = vec![0.0; 2 * d];
        let mut ey = vec![0.0; d + 2];
        for _ in 0..per_batch {
            for (k, (lo, hi)) in ranges.iter().enumerate().take(2 * d) {
                fx[k] = rng.gen_range(*lo..*hi);
            }
            let s = rng.gen_range(ranges[2 * d].0..ranges[2 * d].1);
            let t = rng.gen_range(ranges[2 * d + 1].0..ranges[2 * d + 1].1);
            if !f.contains(&fx) {
                continue;
            }
            let (x, xi) = fx.split_at(d);
            let a_xi = p.a.matvec(xi);
            let b_xi = p.b.matvec(xi);
            for k in 0..d {
                ey[k] = x[k] - s * a_xi[k] - t * b_xi[k];
            }
            ey[d] = s;
            ey[d + 1] = t;
            if e.contains(&ey) {
                h += 1;
            }
        }
        h
    });
    finish_mc(hits, per_batch * MC_BATCHES, vol)
}

/// `<1_E, T* 1_F>` by the dual route: `(y,s,t)` from the `E` box, `eta` from
/// the `xi` part of the `F` box.
pub fn pairing_t_star(
    e: &SetPredicate,
    f: &SetPredicate,
    p: &SymmetricPencil<f64>,
    budget: usize,
    seed: u64,
) -> Estimate {
    let d = p.d;
    let mut ranges: Vec<(f64, f64)> = e.bbox[..d].to_vec();
    ranges.push(clip_unit(e.bbox[d]));
    ranges.push(clip_unit(e.bbox[d + 1]));
    ranges.extend(f.bbox[d..].iter().map(|&r| clip_unit(r)));
    let vol: f64 = ranges.iter().map(|(lo, hi)| (hi - lo).max(0.0)).product();
    if vol <= 0.0 {
        return Estimate { value: 0.0, std_err: 0.0 };
    }
    let per_batch = budget.div_ceil(MC_BATCHES);
    let hits: Vec<u64> = crate::par::parallel_map(MC_BATCHES, |batch| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37 + batch as u64));
        let mut h = 0u64;
        let mut ey = vec![0.0; d + 2];
        let mut fx = vec![0.0; 2 * d];
        for _ in 0..per_batch {
            for (k, (lo, hi)) in ranges.iter().enumerate().take(d + 2) {
                ey[k] = rng.gen_range(*lo..*hi);
            }
            let mut eta = vec![0.0; d];
            for k in 0..d {
                let (lo, hi) = ranges[d + 2 + k];
                eta[k] = rng.gen_range(lo..hi);
            }
            if !e.contains(&ey) {
                continue;
            }
            let (s, t) = (ey[d], ey[d + 1]);
            let a_eta = p.a.matvec(&eta);
            let b_eta = p.b.matvec(&eta);
            for k in 0..d {
                fx[k] = ey[k] + s * a_eta[k] + t * b_eta[k];
                fx[d + k] = eta[k];
            }
            if f.contains(&fx) {
                h += 1;
            }
        }
        h
    });
    finish_mc(hits, per_batch * MC_BATCHES, vol)
}

/// Plain Monte Carlo measure of a set inside its bounding box.
pub fn measure_mc(set: &SetPredicate, budget: usize, seed: u64) -> Estimate {
    let vol = set.bbox_volume();
    if vol <= 0.0 {
        return Estimate { value: 0.0, std_err: 0.0 };
    }
    let per_batch = budget.div_ceil(MC_BATCHES);
    let hits: Vec<u64> = crate::par::parallel_map(MC_BATCHES, |batch| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x51ab + batch as u64));
        let mut h = 0u64;
        let mut x = vec![0.0; set.dim];
        for _ in 0..per_batch {
            for (k, (lo, hi)) in set.bbox.iter().enumerate() {
                x[k] = rng.gen_range(*lo..*hi);
            }
            if set.contains(&x) {
                h += 1;
            }
        }
        h
    });
    finish_mc(hits, per_batch * MC_BATCHES, vol)
}

fn finish_mc(hits: Vec<u64>, total: usize, vol: f64) -> Estimate {
    let h: u64 = hits.iter().sum();
    let p = h as f64 / total as f64;
    Estimate { value: vol * p, std_err: vol * (p * (1.0 - p) / total as f64).sqrt() }
}

/// The restricted weak-type functional `alpha^(q-1) beta / |E|` with both
/// pairing routes (the adjoint identity is a free consistency check).
#[derive(Debug, Clone)]
pub struct RwtReport {
    pub alpha: f64,
    pub beta: f64,
    pub pairing_forward: Estimate,
    pub pairing_adjoint: Estimate,
    pub measure_e: f64,
    pub measure_f: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn rwt_functional(
    e: &SetPredicate,
    f: &SetPredicate,
    p: &SymmetricPencil<f64>,
    q: f64,
    budget: usize,
    seed: u64,
) -> Result<RwtReport, OplabError> {
    let fwd = pairing_t(e, f, p, budget, seed);
    let adj = pairing_t_star(e, f, p, budget, seed);
    if fwd.value <= 0.0 || adj.value <= 0.0 {
        return Err(OplabError::ZeroPairing);
    }
    let me = e.analytic_measure.unwrap_or_else(|| measure_mc(e, budget, seed ^ 0xE).value);
    let mf = f.analytic_measure.unwrap_or_else(|| measure_mc(f, budget, seed ^ 0xF).value);
    if me <= 0.0 || mf <= 0.0 {
        return Err(OplabError::ZeroPairing);
    }
    let alpha = fwd.value / mf;
    let beta = adj.value / me;
    let lhs = alpha.powf(q - 1.0) * beta;
    Ok(RwtReport {
        alpha,
        beta,
        pairing_forward: fwd,
        pairing_adjoint: adj,
        measure_e: me,
        measure_f: mf,
        lhs,
        rhs: me,
        ratio: lhs / me,
    })
}

// ---------------------------------------------------------------------------
// Counterexample families
// ---------------------------------------------------------------------------

/// A named component of a family with its expected measure exponent.
#[derive(Debug, Clone)]
pub struct FamilyComponent {
    pub name: &'static str,
    pub set: SetPredicate,
    pub expected_exponent: f64,
}

/// A test/dual set pair for the scaling experiment, together with the pencil
/// the transform should use (families built in canonical coordinates carry
/// the canonical pencil).
#[derive(Debug, Clone)]
pub struct Family {
    pub label: String,
    pub pencil: SymmetricPencil<f64>,
    /// Input side, subset of `R^d x [-1,1]^2`.
    pub input: SetPredicate,
    /// Output side, subset of `R^d x [-1,1]^d`.
    pub output: SetPredicate,
    pub components: Vec<FamilyComponent>,
}

/// Ball family: `E = B_(d+2)(delta)`, `F = B_d(delta/4) x [-1,1]^d`. The
/// transform of `1_E` is at least `c delta^2` on `F`.
pub fn family_ball(p: &SymmetricPencil<f64>, delta: f64) -> Family {
    let d = p.d;
    let e = SetPredicate::ball(vec![0.0; d + 2], delta);
    let x_ball = SetPredicate::ball(vec![0.0; d], delta / 4.0);
    let xi_box = SetPredicate::cuboid(vec![(-1.0, 1.0); d]);
    let f = SetPredicate::product(&x_ball, &xi_box);
    Family {
        label: format!("ball(delta={delta})"),
        pencil: p.clone(),
        input: e.clone(),
        output: f.clone(),
        components: vec![
            FamilyComponent { name: "E", set: e, expected_exponent: (d + 2) as f64 },
            FamilyComponent { name: "F", set: f, expected_exponent: d as f64 },
        ],
    }
}

/// Slab family from the necessary-condition analysis: input concentrated on
/// `|y| < (1 + K) delta` with `(s,t)` in the annulus `1/2 <= |s|,|t| <= 1`,
/// output `B_d(delta) x B_d(delta)`.
pub fn family_intro_slab(p: &SymmetricPencil<f64>, delta: f64) -> Family {
    let d = p.d;
    let kappa = frobenius_f64(&p.a) + frobenius_f64(&p.b);
    let y_ball = SetPredicate::ball(vec![0.0; d], (1.0 + kappa) * delta);
    let annulus = SetPredicate::new(vec![(-1.0, 1.0); 2], Some(1.0), |st| {
        st[0].abs() >= 0.5 && st[0].abs() <= 1.0 && st[1].abs() >= 0.5 && st[1].abs() <= 1.0
    });
    let input = SetPredicate::product(&y_ball, &annulus);
    let out = SetPredicate::product(
        &SetPredicate::ball(vec![0.0; d], delta),
        &SetPredicate::ball(vec![0.0; d], delta),
    );
    Family {
        label: format!("intro-slab(delta={delta})"),
        pencil: p.clone(),
        input: input.clone(),
        output: out.clone(),
        components: vec![
            FamilyComponent { name: "input", set: input, expected_exponent: d as f64 },
            FamilyComponent { name: "output", set: out, expected_exponent: 2.0 * d as f64 },
        ],
    }
}

/// Flat-case parabolic boxes in the canonical coordinates carried by the
/// destabilizing curve. The input is `2F_delta x S_delta` and the output
/// `F_delta x E_delta`; measures scale like `delta`,
/// `delta^(n0 + sum n_j (n_j+1)/2)` and `delta^(sum n_j (n_j-1)/2)`.
pub fn family_flat_boxes(
    curve: &DestabilizingCurve,
    delta: f64,
    eps_prime: f64,
) -> Result<Family, OplabError> {
    if curve.kind != CurveKind::FlatNonvanishing {
        return Err(OplabError::FamilyMismatch { expected: "flat-nonvanishing" });
    }
    let a = curve.base.0.map(|x: &Rat| x.to_f64_approx());
    let b = curve.base.1.map(|x: &Rat| x.to_f64_approx());
    let d = a.rows;
    let pencil = SymmetricPencil { d, a, b };
    let c_w = 2.0 * (1.0 + frobenius_f64(&pencil.a) + frobenius_f64(&pencil.b));
    // per-coordinate half-widths of E_delta and F_delta
    let mut e_w = Vec::with_capacity(d);
    let mut f_w = Vec::with_capacity(d);
    let mut e_expo = 0.0;
    let mut f_expo = 0.0;
    for blk in &curve.blocks {
        let c_b = 1.0f64.max(blk.epsilon.to_f64_approx().abs());
        if blk.at_lambda_star && blk.size == 1 {
            e_w.push(eps_prime);
            f_w.push(c_b * eps_prime * delta);
            f_expo += 1.0;
        } else if blk.at_lambda_star {
            let r = blk.size;
            for k in 1..=r {
                e_w.push(eps_prime * delta.powi((r - k) as i32));
                f_w.push(2.0 * c_b * eps_prime * delta.powi(k as i32));
                e_expo += (r - k) as f64;
                f_expo += k as f64;
            }
        } else {
            for _ in 0..blk.size {
                e_w.push(eps_prime);
                f_w.push(c_w * eps_prime);
            }
        }
    }
    let e_set = SetPredicate::cuboid(e_w.iter().map(|&w| (-w, w)).collect());
    let f_set = SetPredicate::cuboid(f_w.iter().map(|&w| (-w, w)).collect());
    let f2_set = SetPredicate::cuboid(f_w.iter().map(|&w| (-2.0 * w, 2.0 * w)).collect());
    let strip = SetPredicate::new(
        vec![(-1.0, 1.0), (-delta, delta)],
        Some(4.0 * delta),
        move |st| st[0].abs() < 1.0 && st[1].abs() < delta,
    );
    let input = SetPredicate::product(&f2_set, &strip);
    let output = SetPredicate::product(&f_set, &e_set);
    Ok(Family {
        label: format!("flat-boxes(delta={delta}, eps'={eps_prime})"),
        pencil,
        input,
        output,
        components: vec![
            FamilyComponent { name: "S", set: strip, expected_exponent: 1.0 },
            FamilyComponent { name: "E", set: e_set, expected_exponent: e_expo },
            FamilyComponent { name: "F", set: f_set, expected_exponent: f_expo },
        ],
    })
}

/// Degenerate (kernel-split) family: neighbourhoods of `V` and `H`.
pub fn family_degenerate(
    p: &SymmetricPencil<f64>,
    ks: &KernelSplit<Rat>,
    delta: f64,
) -> Family {
    let d = p.d;
    let kappa = frobenius_f64(&p.a) + frobenius_f64(&p.b);
    let as_f64 = |rows: &Vec<Vec<Rat>>| -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.iter().map(|x| x.to_f64_approx()).collect()).collect()
    };
    let v = as_f64(&ks.v_basis);
    let h = as_f64(&ks.h_basis);
    let k = v.len();
    let l = h.len();
    let e_set = SetPredicate::subspace_neighborhood(&v, d, delta, 1.0);
    let c_out = kappa * (1.0 + (d as f64).sqrt());
    let f_set = SetPredicate::subspace_neighborhood(&h, d, kappa * delta, c_out);
    let f2_set = SetPredicate::subspace_neighborhood(&h, d, 2.0 * kappa * delta, 2.0 * c_out);
    let square = SetPredicate::cuboid(vec![(-1.0, 1.0), (-1.0, 1.0)]);
    let input = SetPredicate::product(&f2_set, &square);
    let output = SetPredicate::product(&f_set, &e_set);
    Family {
        label: format!("degenerate(delta={delta})"),
        pencil: p.clone(),
        input,
        output,
        components: vec![
            FamilyComponent { name: "E", set: e_set, expected_exponent: (d - k) as f64 },
            FamilyComponent { name: "F", set: f_set, expected_exponent: (d - l) as f64 },
        ],
    }
}

/// Common-kernel family: a neighbourhood of the image span `W`.
pub fn family_common_kernel(
    p: &SymmetricPencil<f64>,
    image_span: &[Vec<f64>],
    delta: f64,
) -> Family {
    let d = p.d;
    let kappa = frobenius_f64(&p.a) + frobenius_f64(&p.b);
    let dim_w = image_span.len();
    let c_out = (1.0 + kappa) * (1.0 + (d as f64).sqrt());
    let f_set = SetPredicate::subspace_neighborhood(image_span, d, delta, c_out);
    let f2_set = SetPredicate::subspace_neighborhood(image_span, d, 2.0 * delta, 2.0 * c_out);
    let square = SetPredicate::cuboid(vec![(-1.0, 1.0), (-1.0, 1.0)]);
    let xi_box = SetPredicate::cuboid(vec![(-1.0, 1.0); d]);
    let input = SetPredicate::product(&f2_set, &square);
    let output = SetPredicate::product(&f_set, &xi_box);
    Family {
        label: format!("common-kernel(delta={delta})"),
        pencil: p.clone(),
        input,
        output,
        components: vec![FamilyComponent {
            name: "F",
            set: f_set,
            expected_exponent: (d - dim_w) as f64,
        }],
    }
}

// ---------------------------------------------------------------------------
// Scaling experiments
// ---------------------------------------------------------------------------

/// Per-delta operator lower-bound ratios and the fitted log-slope: a slope
/// below `-tolerance` certifies failure of the `(p, q)` estimate along the
/// family.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub max_residual: f64,
}

pub fn scaling_experiment<FB>(
    build: FB,
    p_exp: f64,
    q_exp: f64,
    ladder: &[f64],
    budget: usize,
    seed: u64,
) -> Result<ScalingReport, OplabError>
where
    FB: Fn(f64) -> Family,
{
    let mut points = Vec::with_capacity(ladder.len());
    for (k, &delta) in ladder.iter().enumerate() {
        let fam = build(delta);
        let pairing = pairing_t(&fam.input, &fam.output, &fam.pencil, budget, seed.wrapping_add(k as u64));
        if pairing.value <= 0.0 {
            return Err(OplabError::ZeroPairing);
        }
        let m_in = fam
            .input
            .analytic_measure
            .unwrap_or_else(|| measure_mc(&fam.input, budget, seed ^ (k as u64) << 8).value);
        let m_out = fam
            .output
            .analytic_measure
            .unwrap_or_else(|| measure_mc(&fam.output, budget, seed ^ (k as u64) << 9 ^ 0xB).value);
        if m_in <= 0.0 || m_out <= 0.0 {
            return Err(OplabError::DegenerateMeasure);
        }
        let q_dual = 1.0 - 1.0 / q_exp;
        let ratio = pairing.value / (m_in.powf(1.0 / p_exp) * m_out.powf(q_dual));
        points.push((delta.ln(), ratio.ln()));
    }
    let (slope, max_residual) = crate::witness::fit_line(&points);
    Ok(ScalingReport { points, slope, max_residual })
}

/// Measures the family components along the ladder and fits their
/// log-slopes; returns `(name, fitted, expected)` triples.
pub fn family_measure_slopes<FB>(
    build: FB,
    ladder: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Vec<(&'static str, f64, f64)>, OplabError>
where
    FB: Fn(f64) -> Family,
{
    let first = build(ladder[0]);
    let names: Vec<&'static str> = first.components.iter().map(|c| c.name).collect();
    let expected: Vec<f64> = first.components.iter().map(|c| c.expected_exponent).collect();
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); names.len()];
    for (k, &delta) in ladder.iter().enumerate() {
        let fam = build(delta);
        for (ci, comp) in fam.components.iter().enumerate() {
            let m = comp
                .set
                .analytic_measure
                .unwrap_or_else(|| measure_mc(&comp.set, budget, seed.wrapping_add((k * 31 + ci) as u64)).value);
            if m <= 0.0 {
                return Err(OplabError::DegenerateMeasure);
            }
            series[ci].push((delta.ln(), m.ln()));
        }
    }
    Ok(names
        .into_iter()
        .zip(expected)
        .zip(series)
        .map(|((name, exp), pts)| {
            let (slope, _) = crate::witness::fit_line(&pts);
            (name, slope, exp)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Kakeya slab experiments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Placement {
    /// Slab translates drawn uniformly from `[-1,1]^d`.
    Random { seed: u64 },
    /// Caller-provided translates, cycled if fewer than the direction count.
    Given(Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct KakeyaReport {
    pub delta: f64,
    pub slab_count: usize,
    /// `L^r` norm estimate of the slab-count function.
    pub norm: f64,
    pub norm_std_err: f64,
    /// Monte Carlo measure of the union of the slabs.
    pub union_measure: f64,
}

/// Places a maximal `delta`-separated direction lattice, translates per the
/// placement, and estimates the `L^r` norm of the slab-count function by
/// midpoint quadrature in `(s,t)` crossed with Monte Carlo in `y` (a spatial
/// hash over the slab centers keeps each query `O(1)`).
pub fn kakeya_slab_norm(
    p: &SymmetricPencil<f64>,
    delta: f64,
    r: f64,
    placement: &Placement,
    budget: usize,
) -> KakeyaReport {
    let d = p.d;
    let per_axis = (2.0 / delta).floor().max(1.0) as usize;
    let mut xis: Vec<Vec<f64>> = Vec::with_capacity(per_axis.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        xis.push(idx.iter().map(|&i| -1.0 + delta * (i as f64 + 0.5)).collect());
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                break;
            }
        }
        if k == d {
            break;
        }
    }
    let n_slabs = xis.len();
    let xs: Vec<Vec<f64>> = match placement {
        Placement::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n_slabs).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
        }
        Placement::Given(list) => {
            (0..n_slabs).map(|j| list[j % list.len()].clone()).collect()
        }
    };
    let kappa = frobenius_f64(&p.a) + frobenius_f64(&p.b);
    let c_y = 1.0 + kappa * (d as f64).sqrt() + delta;
    let vol_y = (2.0 * c_y).powi(d as i32);
    let n_st = 24usize;
    let y_samples = (budget / (n_st * n_st)).max(64);
    let h = 2.0 / n_st as f64;
    // accumulate integral of G^r and of 1{G >= 1} over (y, s, t)
    let node_results: Vec<(f64, f64, f64)> = crate::par::parallel_map(n_st * n_st, |node| {
        let (i, j) = (node / n_st, node % n_st);
        let s = -1.0 + (i as f64 + 0.5) * h;
        let t = -1.0 + (j as f64 + 0.5) * h;
        let m = p.member(&s, &t);
        // slab centers for this (s,t)
        let centers: Vec<Vec<f64>> = xis
            .iter()
            .zip(&xs)
            .map(|(xi, x)| {
                let shift = m.matvec(xi);
                x.iter().zip(&shift).map(|(a, b)| a - b).collect()
            })
            .collect();
        let hash = SpatialHash::build(&centers, delta);
        let mut rng = ChaCha8Rng::seed_from_u64(0xAB0 ^ node as u64);
        let mut acc_pow = 0.0f64;
        let mut acc_pow_sq = 0.0f64;
        let mut acc_union = 0.0f64;
        let mut y = vec![0.0; d];
        for _ in 0..y_samples {
            for yk in y.iter_mut() {
                *yk = rng.gen_range(-c_y..c_y);
            }
            let g = hash.count_within(&centers, &y, delta) as f64;
            let gp = if g > 0.0 { g.powf(r) } else { 0.0 };
            acc_pow += gp;
            acc_pow_sq += gp * gp;
            if g >= 1.0 {
                acc_union += 1.0;
            }
        }
        (acc_pow, acc_pow_sq, acc_union)
    });
    let total_samples = (n_st * n_st * y_samples) as f64;
    let sum_pow: f64 = node_results.iter().map(|(a, _, _)| a).sum();
    let sum_sq: f64 = node_results.iter().map(|(_, b, _)| b).sum();
    let sum_union: f64 = node_results.iter().map(|(_, _, c)| c).sum();
    let mean = sum_pow / total_samples;
    let var = (sum_sq / total_samples - mean * mean).max(0.0);
    let integral = 4.0 * vol_y * mean;
    let int_se = 4.0 * vol_y * (var / total_samples).sqrt();
    let norm = integral.powf(1.0 / r);
    // first-order error propagation through the 1/r power
    let norm_std_err = if integral > 0.0 { norm / (r * integral) * int_se } else { 0.0 };
    // union measure over y only (independent of (s,t) count weighting):
    // estimated on the same product space, so multiply by the (s,t) area
    let union_measure = 4.0 * vol_y * (sum_union / total_samples);
    KakeyaReport { delta, slab_count: n_slabs, norm, norm_std_err, union_measure }
}

struct SpatialHash {
    cell: f64,
    map: std::collections::HashMap<Vec<i64>, Vec<usize>>,
}

impl SpatialHash {
    fn build(centers: &[Vec<f64>], delta: f64) -> Self {
        let cell = delta.max(1e-12);
        let mut map: std::collections::HashMap<Vec<i64>, Vec<usize>> = Default::default();
        for (j, c) in centers.iter().enumerate() {
            let key: Vec<i64> = c.iter().map(|v| (v / cell).floor() as i64).collect();
            map.entry(key).or_default().push(j);
        }
        SpatialHash { cell, map }
    }

    fn count_within(&self, centers: &[Vec<f64>], y: &[f64], delta: f64) -> usize {
        let d = y.len();
        let base: Vec<i64> = y.iter().map(|v| (v / self.cell).floor() as i64).collect();
        let mut count = 0usize;
        let neighbors = 3usize.pow(d as u32);
        let mut key = vec![0i64; d];
        for n in 0..neighbors {
            let mut rem = n;
            for k in 0..d {
                key[k] = base[k] + (rem % 3) as i64 - 1;
                rem /= 3;
            }
            if let Some(list) = self.map.get(&key) {
                for &j in list {
                    let dist_sq: f64 =
                        y.iter().zip(&centers[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    if dist_sq < delta * delta {
                        count += 1;
                    }
                }
            }
        }
        count
    }
}

/// Monte Carlo measure of a single slab (for the analytic cross-check).
pub fn slab_measure_mc(
    p: &SymmetricPencil<f64>,
    slab: &Slab,
    budget: usize,
    seed: u64,
) -> Estimate {
    let d = p.d;
    let kappa = frobenius_f64(&p.a) + frobenius_f64(&p.b);
    let reach = slab.x.iter().map(|v| v.abs()).fold(0.0f64, f64::max)
        + kappa * (d as f64).sqrt()
        + slab.delta;
    let mut bbox = vec![(-reach, reach); d];
    bbox.push((-1.0, 1.0));
    bbox.push((-1.0, 1.0));
    let pc = p.clone();
    let sl = slab.clone();
    let set = SetPredicate::new(bbox, None, move |pt| {
        sl.contains(&pc, &pt[..d], pt[d], pt[d + 1])
    });
    measure_mc(&set, budget, seed)
}
