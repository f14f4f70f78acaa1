//! Curated pencil suite: canonical examples with hand-derived verdicts,
//! seeded random pencils, and random `SL(d,Q) x SL(2,Q)` conjugations.
//! Shared by the integration tests and the benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mat::Mat;
use crate::pencil::SymmetricPencil;
use crate::scalar::{rat_int, Rat};

/// What the hand derivation says about a canonical pencil.
#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    WellCurved { critical: bool, m_star: usize },
    Flat { m_star: usize, n0: usize, big_blocks: Vec<usize> },
    KernelSplit { k: usize, l: usize },
    CommonKernel,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub label: &'static str,
    pub pencil: SymmetricPencil<Rat>,
    pub expected: Expected,
}

pub fn rmat(rows: Vec<Vec<i64>>) -> Mat<Rat> {
    Mat::from_rows(rows.into_iter().map(|r| r.into_iter().map(rat_int).collect()).collect())
}

pub fn pencil(a: Vec<Vec<i64>>, b: Vec<Vec<i64>>) -> SymmetricPencil<Rat> {
    SymmetricPencil::new(rmat(a), rmat(b)).expect("fixture matrices are symmetric")
}

/// The canonical examples with hand-derived verdicts.
pub fn canonical_fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    out.push(Fixture {
        label: "d2-indefinite-critical",
        pencil: pencil(vec![vec![1, 0], vec![0, -1]], vec![vec![0, 1], vec![1, 0]]),
        expected: Expected::WellCurved { critical: true, m_star: 1 },
    });
    out.push(Fixture {
        label: "d2-split-st",
        pencil: pencil(vec![vec![1, 0], vec![0, 0]], vec![vec![0, 0], vec![0, 1]]),
        expected: Expected::WellCurved { critical: true, m_star: 1 },
    });
    out.push(Fixture {
        label: "d2-identity-flat",
        pencil: pencil(vec![vec![1, 0], vec![0, 1]], vec![vec![1, 0], vec![0, 1]]),
        expected: Expected::Flat { m_star: 2, n0: 2, big_blocks: vec![] },
    });
    out.push(Fixture {
        label: "d2-common-kernel",
        pencil: pencil(vec![vec![1, 0], vec![0, 0]], vec![vec![0, 0], vec![0, 0]]),
        expected: Expected::CommonKernel,
    });
    out.push(Fixture {
        label: "d3-cross-kernel-split",
        pencil: pencil(
            vec![vec![0, 0, 1], vec![0, 0, 0], vec![1, 0, 0]],
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0]],
        ),
        expected: Expected::KernelSplit { k: 2, l: 1 },
    });
    out.push(Fixture {
        label: "d3-distinct-eigenvalues",
        pencil: pencil(
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 3]],
        ),
        expected: Expected::WellCurved { critical: false, m_star: 1 },
    });
    out.push(Fixture {
        label: "d3-antijordan-cubic",
        pencil: pencil(
            vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]],
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]],
        ),
        expected: Expected::Flat { m_star: 3, n0: 0, big_blocks: vec![3] },
    });
    out.push(Fixture {
        label: "d4-st-squared",
        pencil: pencil(
            vec![
                vec![1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 0],
            ],
            vec![
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1],
            ],
        ),
        expected: Expected::WellCurved { critical: true, m_star: 2 },
    });
    out.push(Fixture {
        label: "d4-double-antijordan",
        pencil: pencil(
            vec![
                vec![1, 0, 0, 0],
                vec![0, 0, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 0],
            ],
            vec![
                vec![0, 1, 0, 0],
                vec![1, 0, 0, 0],
                vec![0, 0, 0, 1],
                vec![0, 0, 1, 0],
            ],
        ),
        expected: Expected::Flat { m_star: 4, n0: 0, big_blocks: vec![2, 2] },
    });
    out.push(Fixture {
        label: "d4-mixed-blocks",
        pencil: pencil(
            vec![
                vec![1, 0, 0, 0],
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 2],
            ],
            vec![
                vec![0, 1, 0, 0],
                vec![1, 0, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1],
            ],
        ),
        expected: Expected::Flat { m_star: 3, n0: 1, big_blocks: vec![2] },
    });
    out.push(Fixture {
        label: "d6-doubled-kernel-split",
        pencil: {
            let z = vec![0i64; 3];
            let a3 = [vec![0, 0, 1], vec![0, 0, 0], vec![1, 0, 0]];
            let b3 = [vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0]];
            let embed = |m: &[Vec<i64>]| -> Vec<Vec<i64>> {
                let mut rows = Vec::new();
                for r in m {
                    let mut row = r.clone();
                    row.extend(z.iter());
                    rows.push(row);
                }
                for r in m {
                    let mut row = z.clone();
                    row.extend(r.iter());
                    rows.push(row);
                }
                rows
            };
            pencil(embed(&a3), embed(&b3))
        },
        expected: Expected::KernelSplit { k: 4, l: 2 },
    });
    out.push(Fixture {
        label: "d2-scaled-identity-flat",
        pencil: pencil(vec![vec![3, 0], vec![0, 3]], vec![vec![1, 0], vec![0, 1]]),
        expected: Expected::Flat { m_star: 2, n0: 2, big_blocks: vec![] },
    });
    out.push(Fixture {
        label: "d5-identity-vs-signature",
        pencil: pencil(
            vec![
                vec![1, 0, 0, 0, 0],
                vec![0, 1, 0, 0, 0],
                vec![0, 0, 1, 0, 0],
                vec![0, 0, 0, 1, 0],
                vec![0, 0, 0, 0, 1],
            ],
            vec![
                vec![1, 0, 0, 0, 0],
                vec![0, 2, 0, 0, 0],
                vec![0, 0, 3, 0, 0],
                vec![0, 0, 0, 4, 0],
                vec![0, 0, 0, 0, 5],
            ],
        ),
        expected: Expected::WellCurved { critical: false, m_star: 1 },
    });
    out
}

/// Random special-linear rational matrix: a product of elementary shears
/// with small integer coefficients (determinant exactly one).
pub fn random_sl(rng: &mut ChaCha8Rng, d: usize, ops: usize) -> Mat<Rat> {
    let mut m = Mat::<Rat>::identity(d);
    for _ in 0..ops {
        let i = rng.gen_range(0..d);
        let mut j = rng.gen_range(0..d);
        while j == i {
            j = rng.gen_range(0..d);
        }
        let c = rat_int(rng.gen_range(-2..=2));
        // row_i += c * row_j
        for col in 0..d {
            let add = c.clone() * m[(j, col)].clone();
            m[(i, col)] = m[(i, col)].clone() + add;
        }
    }
    m
}

/// Random symmetric pencil with small integer entries.
pub fn random_pencil(rng: &mut ChaCha8Rng, d: usize) -> SymmetricPencil<Rat> {
    let mut sym = || {
        let mut m = Mat::<Rat>::zero(d, d);
        for i in 0..d {
            for j in 0..=i {
                let v = rat_int(rng.gen_range(-3..=3));
                m[(i, j)] = v.clone();
                m[(j, i)] = v;
            }
        }
        m
    };
    SymmetricPencil::new(sym(), sym()).unwrap()
}

/// The curated suite: canonical fixtures, two random conjugates of each, and
/// seeded random pencils across dimensions 2..=6 (at least 200 entries).
pub fn curated_suite(seed: u64) -> Vec<(String, SymmetricPencil<Rat>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<(String, SymmetricPencil<Rat>)> = Vec::new();
    for fx in canonical_fixtures() {
        out.push((fx.label.to_string(), fx.pencil.clone()));
        for c in 0..2 {
            let m = random_sl(&mut rng, fx.pencil.d, 3 * fx.pencil.d);
            let n = random_sl(&mut rng, 2, 4);
            let conj = fx.pencil.transform_congruence(&m).transform_sigma(&n);
            out.push((format!("{}-conj{}", fx.label, c), conj));
        }
    }
    for d in 2..=6usize {
        for k in 0..34 {
            out.push((format!("random-d{d}-{k}"), random_pencil(&mut rng, d)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_large_enough() {
        let suite = curated_suite(2024);
        assert!(suite.len() >= 200, "suite has {} pencils", suite.len());
    }

    #[test]
    fn random_sl_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=5 {
            let m = random_sl(&mut rng, d, 3 * d);
            assert_eq!(crate::mat::det_bareiss(&m), rat_int(1));
        }
    }
}
