//! Pairing factorizations of binary forms and their infeasibility
//! certificates.
//!
//! Given the distinct-root multiplicities `m_1..m_l` of a degree-`d` form,
//! the equations `L_j : sum_{i<j} mu_ij + sum_{k>j} mu_jk = m_j` ask for the
//! form to be rewritten as a product of two-root pairs `(theta_j theta_k)^mu`.
//! A non-negative solution exists exactly when no multiplicity exceeds `d/2`;
//! otherwise a two-line Farkas certificate proves infeasibility. Everything
//! here is exact rational arithmetic: the sizes are tiny (at most 66
//! variables at `d = 12`) so a bespoke dense simplex beats any external
//! solver dependency.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Exact rational with machine-word storage; tableau entries stay far below
/// the i128 range at these sizes.
pub type Frac = Ratio<i128>;

#[derive(Debug, Error, PartialEq)]
pub enum FactorizeError {
    #[error("multiplicities sum to {got}, expected degree {expected}")]
    InvalidMultiplicities { got: usize, expected: usize },
    #[error("flat factorization needs m* > sum of the other multiplicities ({m_star} <= {rest})")]
    NotDominant { m_star: usize, rest: usize },
}

/// Non-negative pair exponents `mu_jk` solving the `L_j` system; only the
/// non-zero entries are stored. Keys are `(j, k)` with `j < k`, 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFactorization {
    pub weights: BTreeMap<(usize, usize), Frac>,
}

impl PairFactorization {
    /// Row sums: the exponent mass at root `j`.
    pub fn row_sum(&self, j: usize) -> Frac {
        self.weights
            .iter()
            .filter(|((a, b), _)| *a == j || *b == j)
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn total(&self) -> Frac {
        self.weights.values().copied().sum()
    }
}

/// Farkas certificate of infeasibility: `y_j + y_k >= 0` for all `j < k`
/// while `sum m_j y_j < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub y: Vec<Frac>,
}

impl FarkasCertificate {
    pub fn validates(&self, mults: &[usize]) -> bool {
        let n = self.y.len();
        if n != mults.len() {
            return false;
        }
        for j in 0..n {
            for k in j + 1..n {
                if self.y[j] + self.y[k] < Frac::zero() {
                    return false;
                }
            }
        }
        let dot: Frac = mults.iter().zip(&self.y).map(|(&m, y)| Frac::from(m as i128) * y).sum();
        dot < Frac::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairingOutcome {
    Feasible(PairFactorization),
    Infeasible(FarkasCertificate),
}

/// Pairing factorization of the `L_j` system, or the canonical certificate.
///
/// Feasible answers are the lexicographically smallest solution under the
/// variable order `(1,2), (1,3), ..., (1,l), (2,3), ...` so golden tests are
/// deterministic. Certificates put `-1` on the maximal multiplicity and `+1`
/// elsewhere, matching the contradiction that forces `m_max > d/2`; both
/// certificate inequalities are checked before returning.
pub fn pair_factorization(mults: &[usize], d: usize) -> Result<PairingOutcome, FactorizeError> {
    let got: usize = mults.iter().sum();
    if got != d {
        return Err(FactorizeError::InvalidMultiplicities { got, expected: d });
    }
    assert!(mults.iter().all(|&m| m >= 1), "multiplicities must be >= 1");
    let l = mults.len();
    let max = mults.iter().copied().max().unwrap_or(0);
    if 2 * max > d {
        let j_star = mults.iter().position(|&m| m == max).unwrap();
        let y: Vec<Frac> = (0..l)
            .map(|j| if j == j_star { -Frac::one() } else { Frac::one() })
            .collect();
        let cert = FarkasCertificate { y };
        assert!(cert.validates(mults), "canonical certificate failed its own inequalities");
        return Ok(PairingOutcome::Infeasible(cert));
    }
    let vars: Vec<(usize, usize)> =
        (0..l).flat_map(|j| (j + 1..l).map(move |k| (j, k))).collect();
    let rows: Vec<Vec<usize>> = (0..l)
        .map(|j| {
            vars.iter()
                .enumerate()
                .filter(|(_, (a, b))| *a == j || *b == j)
                .map(|(idx, _)| idx)
                .collect()
        })
        .collect();
    let rhs: Vec<Frac> = mults.iter().map(|&m| Frac::from(m as i128)).collect();
    let sol = lex_min_incidence(&rows, vars.len(), &rhs)
        .expect("system with all multiplicities <= d/2 must be feasible");
    let mut weights = BTreeMap::new();
    for (idx, w) in sol.into_iter().enumerate() {
        if !w.is_zero() {
            weights.insert(vars[idx], w);
        }
    }
    Ok(PairingOutcome::Feasible(PairFactorization { weights }))
}

/// Grouped variant: each root of the reference form splits into a group of
/// perturbed roots, and only cross-group pairs are admissible variables.
/// Feasible exactly when every group total is at most `d/2`; the certificate
/// puts `-1` on every member of the overweight group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupedOutcome {
    /// `((j, i), (k, i')) -> mu`, with `j < k` group indices.
    #[allow(clippy::type_complexity)]
    Feasible(BTreeMap<((usize, usize), (usize, usize)), Frac>),
    /// `y[(j, i)]` indexed like the input groups.
    Infeasible(Vec<Vec<Frac>>),
}

pub fn grouped_pair_factorization(
    groups: &[Vec<usize>],
    d: usize,
) -> Result<GroupedOutcome, FactorizeError> {
    let got: usize = groups.iter().flatten().sum();
    if got != d {
        return Err(FactorizeError::InvalidMultiplicities { got, expected: d });
    }
    let totals: Vec<usize> = groups.iter().map(|g| g.iter().sum()).collect();
    let max = totals.iter().copied().max().unwrap_or(0);
    if 2 * max > d {
        let j_star = totals.iter().position(|&t| t == max).unwrap();
        let y: Vec<Vec<Frac>> = groups
            .iter()
            .enumerate()
            .map(|(j, g)| {
                g.iter()
                    .map(|_| if j == j_star { -Frac::one() } else { Frac::one() })
                    .collect()
            })
            .collect();
        // same two checks as the ungrouped certificate, across groups
        let mut dot = Frac::zero();
        for (j, g) in groups.iter().enumerate() {
            for (i, &m) in g.iter().enumerate() {
                dot += Frac::from(m as i128) * y[j][i];
            }
        }
        assert!(dot < Frac::zero());
        return Ok(GroupedOutcome::Infeasible(y));
    }
    // members flattened; variables are cross-group member pairs
    let members: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(j, g)| (0..g.len()).map(move |i| (j, i)))
        .collect();
    let vars: Vec<((usize, usize), (usize, usize))> = members
        .iter()
        .flat_map(|&a| {
            members
                .iter()
                .filter(move |&&b| b.0 > a.0)
                .map(move |&b| (a, b))
                .collect::<Vec<_>>()
        })
        .collect();
    let rows: Vec<Vec<usize>> = members
        .iter()
        .map(|&m| {
            vars.iter()
                .enumerate()
                .filter(|(_, (a, b))| *a == m || *b == m)
                .map(|(idx, _)| idx)
                .collect()
        })
        .collect();
    let rhs: Vec<Frac> = members
        .iter()
        .map(|&(j, i)| Frac::from(groups[j][i] as i128))
        .collect();
    let sol = lex_min_incidence(&rows, vars.len(), &rhs)
        .expect("grouped system with all group totals <= d/2 must be feasible");
    let mut weights = BTreeMap::new();
    for (idx, w) in sol.into_iter().enumerate() {
        if !w.is_zero() {
            weights.insert(vars[idx], w);
        }
    }
    Ok(GroupedOutcome::Feasible(weights))
}

/// Exponent transfer for the flat case: spread the dominant multiplicity
/// `m*` over the `l` other roots as `mu_j = m_j + (m* - sum m_i) / l`, so
/// each `mu_j > m_j` and the exponents sum to `m*`.
pub fn flat_factorization(m_star: usize, others: &[usize]) -> Result<Vec<Frac>, FactorizeError> {
    let rest: usize = others.iter().sum();
    if m_star <= rest {
        return Err(FactorizeError::NotDominant { m_star, rest });
    }
    if others.is_empty() {
        return Ok(Vec::new());
    }
    let bump = Frac::new((m_star - rest) as i128, others.len() as i128);
    Ok(others.iter().map(|&m| Frac::from(m as i128) + bump).collect())
}

// ---------------------------------------------------------------------------
// Dense exact simplex (phase 1 + sequential lexicographic minimization)
// ---------------------------------------------------------------------------

/// Lexicographically smallest non-negative solution of an incidence system
/// `sum_{v in rows[j]} x_v = rhs[j]` (all coefficients one). Variables are
/// minimized in index order, each fixed at its minimum by substitution into
/// the right-hand side before the next solve.
fn lex_min_incidence(rows: &[Vec<usize>], nvars: usize, rhs: &[Frac]) -> Option<Vec<Frac>> {
    let mut fixed: Vec<Option<Frac>> = vec![None; nvars];
    for target in 0..nvars {
        let (active, reduced_rhs) = reduce(rows, rhs, &fixed)?;
        let mut cost = vec![Frac::zero(); active.len()];
        if let Some(pos) = active.iter().position(|&v| v == target) {
            cost[pos] = Frac::one();
        } else {
            continue;
        }
        let value = simplex_min(rows, &active, &reduced_rhs, &cost)?;
        fixed[target] = Some(value);
    }
    Some(fixed.into_iter().map(|f| f.unwrap_or_else(Frac::zero)).collect())
}

/// Substitutes fixed variables into the rhs, returns active columns.
fn reduce(
    rows: &[Vec<usize>],
    rhs: &[Frac],
    fixed: &[Option<Frac>],
) -> Option<(Vec<usize>, Vec<Frac>)> {
    let active: Vec<usize> = (0..fixed.len()).filter(|&v| fixed[v].is_none()).collect();
    let mut out = rhs.to_vec();
    for (j, row) in rows.iter().enumerate() {
        for &v in row {
            if let Some(val) = fixed[v] {
                out[j] -= val;
            }
        }
        if out[j].is_negative() {
            return None;
        }
    }
    Some((active, out))
}

/// Minimizes `cost . x` over `{A x = b, x >= 0}` for the 0/1 incidence
/// matrix described by `rows`/`active`. Phase-1 artificial start, Bland's
/// rule throughout (no cycling). Returns the optimal value, `None` if
/// infeasible.
fn simplex_min(
    rows: &[Vec<usize>],
    active: &[usize],
    rhs: &[Frac],
    cost: &[Frac],
) -> Option<Frac> {
    let m = rows.len();
    let n = active.len();
    // tableau columns: n structural, m artificial, 1 rhs
    let cols = n + m + 1;
    let mut t: Vec<Vec<Frac>> = (0..m)
        .map(|j| {
            let mut row = vec![Frac::zero(); cols];
            for (pos, &v) in active.iter().enumerate() {
                if rows[j].contains(&v) {
                    row[pos] = Frac::one();
                }
            }
            row[n + j] = Frac::one();
            row[cols - 1] = rhs[j];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1: minimize the artificial sum
    let phase1: Vec<Frac> = (0..n + m)
        .map(|j| if j >= n { Frac::one() } else { Frac::zero() })
        .collect();
    let v1 = run_simplex(&mut t, &mut basis, &phase1, n + m);
    if !v1.is_zero() {
        return None;
    }
    // phase 2: artificial columns are forbidden from entering
    let phase2: Vec<Frac> = (0..n + m)
        .map(|j| if j < n { cost[j] } else { Frac::zero() })
        .collect();
    Some(run_simplex(&mut t, &mut basis, &phase2, n))
}

fn run_simplex(
    t: &mut [Vec<Frac>],
    basis: &mut [usize],
    cost: &[Frac],
    enter_limit: usize,
) -> Frac {
    let m = t.len();
    let cols = t[0].len();
    let rhs_col = cols - 1;
    loop {
        // reduced costs r_j = c_j - c_B . column_j
        let mut entering = None;
        for j in 0..enter_limit {
            let mut r = cost[j];
            for i in 0..m {
                if !t[i][j].is_zero() {
                    r -= cost[basis[i]] * t[i][j];
                }
            }
            if r.is_negative() {
                entering = Some(j);
                break; // Bland: smallest improving index
            }
        }
        let Some(e) = entering else {
            let mut val = Frac::zero();
            for i in 0..m {
                val += cost[basis[i]] * t[i][rhs_col];
            }
            return val;
        };
        // ratio test, Bland tie-break on the leaving basis variable
        let mut leave: Option<(usize, Frac)> = None;
        for i in 0..m {
            if t[i][e].is_positive() {
                let ratio = t[i][rhs_col] / t[i][e];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let (li, _) = leave.expect("bounded feasible region: ratio test cannot fail");
        // pivot
        let piv = t[li][e];
        for j in 0..cols {
            t[li][j] /= piv;
        }
        for i in 0..m {
            if i != li && !t[i][e].is_zero() {
                let f = t[i][e];
                for j in 0..cols {
                    let sub = f * t[li][j];
                    t[i][j] -= sub;
                }
            }
        }
        basis[li] = e;
    }
}

/// All integer partitions of `n` in weakly decreasing order; test helper for
/// the exhaustive dichotomy sweep.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=max.min(n)).rev() {
            cur.push(k);
            rec(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(n: i128, d: i128) -> Frac {
        Frac::new(n, d)
    }

    #[test]
    fn two_simple_roots_pair_up() {
        let out = pair_factorization(&[1, 1], 2).unwrap();
        match out {
            PairingOutcome::Feasible(f) => {
                assert_eq!(f.weights.get(&(0, 1)), Some(&Frac::one()));
                assert_eq!(f.total(), frac(1, 1));
            }
            _ => panic!("expected feasible"),
        }
    }

    #[test]
    fn partition_211_of_4_is_feasible() {
        let out = pair_factorization(&[2, 1, 1], 4).unwrap();
        let PairingOutcome::Feasible(f) = out else { panic!("expected feasible") };
        for (j, &m) in [2usize, 1, 1].iter().enumerate() {
            assert_eq!(f.row_sum(j), Frac::from(m as i128));
        }
        assert_eq!(f.total(), frac(2, 1)); // d/2
    }

    #[test]
    fn partition_31_of_4_gets_certificate() {
        let out = pair_factorization(&[3, 1], 4).unwrap();
        let PairingOutcome::Infeasible(c) = out else { panic!("expected certificate") };
        assert_eq!(c.y, vec![-Frac::one(), Frac::one()]);
        assert!(c.validates(&[3, 1]));
    }

    #[test]
    fn invalid_sum_rejected() {
        assert_eq!(
            pair_factorization(&[2, 1], 4).unwrap_err(),
            FactorizeError::InvalidMultiplicities { got: 3, expected: 4 }
        );
    }

    #[test]
    fn lex_minimality_is_deterministic() {
        let out1 = pair_factorization(&[2, 2, 1, 1], 6).unwrap();
        let out2 = pair_factorization(&[2, 2, 1, 1], 6).unwrap();
        assert_eq!(out1, out2);
        let PairingOutcome::Feasible(f) = out1 else { panic!() };
        for (j, &m) in [2usize, 2, 1, 1].iter().enumerate() {
            assert_eq!(f.row_sum(j), Frac::from(m as i128));
        }
        // hand-derived lexicographic minimum: mu_01 cannot go below 1
        // (mu_01 = 0 forces mu_02 = mu_03 = 1 and starves L_1), then
        // mu_02 = 0, mu_03 = 1, mu_12 = 1 complete the solution.
        let expect: Vec<((usize, usize), Frac)> =
            vec![((0, 1), Frac::one()), ((0, 3), Frac::one()), ((1, 2), Frac::one())];
        assert_eq!(f.weights.into_iter().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn grouped_reduces_to_ungrouped_for_singletons() {
        let out = grouped_pair_factorization(&[vec![1], vec![1]], 2).unwrap();
        let GroupedOutcome::Feasible(w) = out else { panic!() };
        assert_eq!(w.get(&((0, 0), (1, 0))), Some(&Frac::one()));
    }

    #[test]
    fn grouped_split_roots_feasible() {
        // groups ((1,1),(2)): parent totals 2,2 for d=4
        let out = grouped_pair_factorization(&[vec![1, 1], vec![2]], 4).unwrap();
        let GroupedOutcome::Feasible(w) = out else { panic!() };
        let total: Frac = w.values().copied().sum();
        assert_eq!(total, frac(2, 1));
        let sum_00: Frac = w
            .iter()
            .filter(|((a, b), _)| *a == (0, 0) || *b == (0, 0))
            .map(|(_, v)| *v)
            .sum();
        assert_eq!(sum_00, Frac::one());
    }

    #[test]
    fn grouped_overweight_parent_certificate() {
        let out = grouped_pair_factorization(&[vec![2, 1], vec![1]], 4).unwrap();
        let GroupedOutcome::Infeasible(y) = out else { panic!("expected certificate") };
        assert!(y[0].iter().all(|v| v.is_negative()));
        assert!(y[1].iter().all(|v| v.is_positive()));
    }

    #[test]
    fn flat_factorization_formula() {
        assert_eq!(flat_factorization(3, &[1, 1]).unwrap(), vec![frac(3, 2), frac(3, 2)]);
        assert_eq!(flat_factorization(3, &[1]).unwrap(), vec![frac(3, 1)]);
        assert_eq!(
            flat_factorization(2, &[1, 1]).unwrap_err(),
            FactorizeError::NotDominant { m_star: 2, rest: 2 }
        );
        assert_eq!(flat_factorization(4, &[]).unwrap(), Vec::<Frac>::new());
    }

    #[test]
    fn exhaustive_dichotomy_small() {
        for d in 1..=8usize {
            for part in partitions(d) {
                let out = pair_factorization(&part, d).unwrap();
                let max = *part.iter().max().unwrap();
                match out {
                    PairingOutcome::Feasible(f) => {
                        assert!(2 * max <= d, "feasible but max part {max} > d/2 for {part:?}");
                        for (j, &m) in part.iter().enumerate() {
                            assert_eq!(
                                f.row_sum(j),
                                Frac::from(m as i128),
                                "L_{j} violated for {part:?}"
                            );
                        }
                        assert_eq!(f.total(), frac(d as i128, 2));
                    }
                    PairingOutcome::Infeasible(c) => {
                        assert!(2 * max > d, "certificate but max part {max} <= d/2 for {part:?}");
                        assert!(c.validates(&part));
                    }
                }
            }
        }
    }

    #[test]
    fn partition_count_sanity() {
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(partitions(12).len(), 77);
    }
}
