//! Sublevel-set measures `|{(s,t) in [-1,1]^2 : |P(s,t)| < delta}|` and
//! their decay exponents.
//!
//! The decay rate in `delta` encodes the curvature: forms with all root
//! multiplicities at most `d/2` decay like `delta^(2/d)` (with a log factor
//! exactly when some multiplicity equals `d/2`), while a dominant
//! multiplicity `m* > d/2` slows the decay to `delta^(1/m*)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::pencil::{eval_form, BinaryForm};

#[derive(Debug, Error, PartialEq)]
pub enum SublevelError {
    #[error("ladder must be strictly decreasing with at least {min} points, got {got}")]
    BadLadder { min: usize, got: usize },
    #[error("a measured value on the ladder is zero; increase the sample budget")]
    DegenerateLadder,
}

/// How to estimate the measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Cell-center sampling on an `n x n` grid over `[-1,1]^2`.
    Grid(usize),
    /// Uniform Monte Carlo, deterministic given the seed.
    MonteCarlo { samples: usize, seed: u64 },
}

/// A measure estimate; `std_err` is present for Monte Carlo.
#[derive(Debug, Clone, Copy)]
pub struct Measure {
    pub value: f64,
    pub std_err: Option<f64>,
}

/// `log+ x = max(1, ln x)`: the convention keeping the log correction
/// harmless near `delta = 1`.
pub fn log_plus(x: f64) -> f64 {
    x.ln().max(1.0)
}

/// Measure of `{ |P| < delta }` in the square, by grid fraction or Monte
/// Carlo mean (times the square's area 4). The Monte Carlo point stream
/// depends only on the seed, so the estimate is monotone in `delta` sample
/// by sample.
pub fn sublevel_measure(form: &BinaryForm<f64>, delta: f64, method: Method) -> Measure {
    assert!(delta > 0.0, "threshold must be positive");
    match method {
        Method::Grid(n) => {
            assert!(n >= 64, "grid must have at least 64 cells per axis");
            let mut hits = 0usize;
            for i in 0..n {
                let s = -1.0 + (2.0 * i as f64 + 1.0) / n as f64;
                for j in 0..n {
                    let t = -1.0 + (2.0 * j as f64 + 1.0) / n as f64;
                    if eval_form(form, &s, &t).abs() < delta {
                        hits += 1;
                    }
                }
            }
            Measure { value: 4.0 * hits as f64 / (n * n) as f64, std_err: None }
        }
        Method::MonteCarlo { samples, seed } => {
            assert!(samples >= 10_000, "Monte Carlo needs at least 1e4 samples");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0usize;
            for _ in 0..samples {
                let s: f64 = rng.gen_range(-1.0..1.0);
                let t: f64 = rng.gen_range(-1.0..1.0);
                if eval_form(form, &s, &t).abs() < delta {
                    hits += 1;
                }
            }
            let p = hits as f64 / samples as f64;
            Measure {
                value: 4.0 * p,
                std_err: Some(4.0 * (p * (1.0 - p) / samples as f64).sqrt()),
            }
        }
    }
}

/// Exact measure of `{ |s|,|t| <= 1 : |s^mu t^nu| < delta }` by closed-form
/// integration: `4 delta^(1/mu) (1 + ln(1/delta^(1/mu)))` on the diagonal
/// `mu = nu`, and the two-piece power integral otherwise.
pub fn two_factor_oracle(mu: f64, nu: f64, delta: f64) -> f64 {
    assert!(mu > 0.0 && nu > 0.0 && delta > 0.0);
    if delta >= 1.0 {
        return 4.0;
    }
    if (mu - nu).abs() < 1e-12 {
        let a = delta.powf(1.0 / mu);
        4.0 * (a + a * (1.0 / a).ln())
    } else {
        let a = delta.powf(1.0 / mu);
        let b = delta.powf(1.0 / nu);
        4.0 * (a + (b - a) / (1.0 - mu / nu))
    }
}

/// A fitted decay exponent over a `delta` ladder.
#[derive(Debug, Clone)]
pub struct ExponentFit {
    pub deltas: Vec<f64>,
    pub measures: Vec<f64>,
    /// Slope of `log measure` against `log delta`.
    pub exponent: f64,
    /// Slope after dividing the measure by `log+ (1/delta)`, when a log
    /// factor is hypothesized.
    pub log_corrected: Option<f64>,
    /// Largest absolute residual of the reported fit.
    pub residual: f64,
}

/// Least-squares decay exponent of the sublevel measure along the ladder.
pub fn fit_exponent(
    form: &BinaryForm<f64>,
    ladder: &[f64],
    method: Method,
    hypothesize_log: bool,
) -> Result<ExponentFit, SublevelError> {
    if ladder.len() < 5 || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SublevelError::BadLadder { min: 5, got: ladder.len() });
    }
    let measures: Vec<f64> = ladder
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            // per-delta seed offset keeps batches independent but reproducible
            let m = match method {
                Method::MonteCarlo { samples, seed } => {
                    sublevel_measure(form, delta, Method::MonteCarlo { samples, seed: seed.wrapping_add(k as u64) })
                }
                grid => sublevel_measure(form, delta, grid),
            };
            m.value
        })
        .collect();
    if measures.contains(&0.0) {
        return Err(SublevelError::DegenerateLadder);
    }
    let raw: Vec<(f64, f64)> =
        ladder.iter().zip(&measures).map(|(&d, &m)| (d.ln(), m.ln())).collect();
    let (exponent, raw_res) = crate::witness::fit_line(&raw);
    let (log_corrected, residual) = if hypothesize_log {
        let corr: Vec<(f64, f64)> = ladder
            .iter()
            .zip(&measures)
            .map(|(&d, &m)| (d.ln(), (m / log_plus(1.0 / d)).ln()))
            .collect();
        let (slope, res) = crate::witness::fit_line(&corr);
        (Some(slope), res)
    } else {
        (None, raw_res)
    };
    Ok(ExponentFit { deltas: ladder.to_vec(), measures, exponent, log_corrected, residual })
}

/// The default ladder `2^-4 .. 2^-16`.
pub fn default_ladder() -> Vec<f64> {
    (4..=16).map(|k| 0.5f64.powi(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(coeffs: Vec<f64>) -> BinaryForm<f64> {
        BinaryForm::new(coeffs)
    }

    fn st() -> BinaryForm<f64> {
        form(vec![0.0, 1.0, 0.0])
    }

    fn disk() -> BinaryForm<f64> {
        // -s^2 - t^2, so |P| = s^2 + t^2
        form(vec![-1.0, 0.0, -1.0])
    }

    #[test]
    fn disk_measure_is_circle_area() {
        let delta = 0.25;
        let exact = std::f64::consts::PI * delta;
        let grid = sublevel_measure(&disk(), delta, Method::Grid(512));
        assert!((grid.value - exact).abs() < 5e-3, "grid {} vs {}", grid.value, exact);
        let mc = sublevel_measure(&disk(), delta, Method::MonteCarlo { samples: 1_000_000, seed: 3 });
        let se = mc.std_err.unwrap();
        assert!((mc.value - exact).abs() < 3.0 * se, "mc {} vs {} (se {})", mc.value, exact, se);
    }

    #[test]
    fn st_measure_matches_oracle() {
        let delta = (-1.0f64).exp();
        let oracle = two_factor_oracle(1.0, 1.0, delta);
        assert!((oracle - 4.0 * (delta + delta * (1.0 / delta).ln())).abs() < 1e-12);
        assert!((oracle - 2.943).abs() < 1e-3);
        let mc = sublevel_measure(&st(), delta, Method::MonteCarlo { samples: 1_000_000, seed: 5 });
        assert!((mc.value - oracle).abs() < 3.0 * mc.std_err.unwrap());
    }

    #[test]
    fn oracle_asymmetric_case_against_grid() {
        // mu=2, nu=1 at moderate delta, cross-checked by a fine grid on |s^2 t| < delta
        let delta = 1e-2;
        let oracle = two_factor_oracle(2.0, 1.0, delta);
        // |s|^2 |t| < delta as a binary form s^2 t of degree 3: coeffs index 2
        let f = form(vec![0.0, 0.0, 1.0, 0.0]);
        let grid = sublevel_measure(&f, delta, Method::Grid(2048));
        assert!((grid.value - oracle).abs() < 2e-3, "grid {} oracle {}", grid.value, oracle);
        // dominant term is delta^(1/2)
        let tiny = two_factor_oracle(2.0, 1.0, 1e-4);
        assert!(tiny > 1e-2 && tiny < 8e-2, "dominant sqrt scaling, got {tiny}");
        assert_eq!(two_factor_oracle(2.0, 1.0, 1.5), 4.0);
        // symmetry in (mu, nu)
        assert!((two_factor_oracle(2.0, 1.0, 1e-3) - two_factor_oracle(1.0, 2.0, 1e-3)).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_delta_with_same_seed() {
        let f = form(vec![1.0, 3.0, 3.0, 1.0]);
        let mut last = -1.0;
        for k in (2..14).rev() {
            let m = sublevel_measure(&f, 0.5f64.powi(k), Method::MonteCarlo { samples: 20_000, seed: 9 });
            assert!(m.value >= last, "measure must be nondecreasing in delta");
            last = m.value;
        }
    }

    #[test]
    fn exponent_fits_match_theory() {
        let ladder = default_ladder();
        let mc = |seed| Method::MonteCarlo { samples: 400_000, seed };
        // st: log-corrected exponent 1.0 (= 2/d with log loss)
        let fit = fit_exponent(&st(), &ladder[..11], mc(11), true).unwrap();
        assert!((fit.log_corrected.unwrap() - 1.0).abs() < 0.05, "st: {:?}", fit.log_corrected);
        // (s+t)^3: exponent 1/3 (= 1/m*)
        let cube = form(vec![1.0, 3.0, 3.0, 1.0]);
        let fit = fit_exponent(&cube, &ladder, mc(12), false).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 0.05, "cube: {}", fit.exponent);
        // disk: exponent 1.0, no log correction needed
        let fit = fit_exponent(&disk(), &ladder[..9], mc(13), false).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.05, "disk: {}", fit.exponent);
    }

    #[test]
    fn sharpness_floor_on_small_boxes() {
        // every nonzero form obeys measure >= c * delta^(2/d): the box
        // |s|,|t| <~ delta^(1/d) sits inside the sublevel set
        for (f, d) in [(st(), 2usize), (form(vec![1.0, 3.0, 3.0, 1.0]), 3), (disk(), 2)] {
            let scale: f64 = f.coeffs.iter().map(|c| c.abs()).sum();
            for k in [4, 8, 12] {
                let delta = 0.5f64.powi(k);
                let m = sublevel_measure(&f, delta, Method::MonteCarlo { samples: 400_000, seed: 21 + k as u64 });
                let floor = 1e-2 * (delta / scale).powf(2.0 / d as f64);
                assert!(m.value >= floor, "floor violated: {} < {floor}", m.value);
            }
        }
    }

    #[test]
    fn degenerate_ladder_detected() {
        // a form bounded away from zero on the square: |P| >= 1 forces
        // zero measure at small delta
        let f = form(vec![2.0, 0.0, 2.0]); // 2s^2 + 2t^2... vanishes at origin; use constant-ish trick
        // (s^2 + t^2 + cross terms) still vanishes at 0; instead use a ladder
        // far below the resolvable scale with a tiny budget
        let err = fit_exponent(&f, &[1e-30, 1e-31, 1e-32, 1e-33, 1e-34], Method::MonteCarlo { samples: 10_000, seed: 2 }, false);
        assert_eq!(err.unwrap_err(), SublevelError::DegenerateLadder);
        let err = fit_exponent(&f, &[0.5, 0.25], Method::Grid(64), false);
        assert_eq!(err.unwrap_err(), SublevelError::BadLadder { min: 5, got: 2 });
    }
}
