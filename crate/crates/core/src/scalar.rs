//! Scalar plumbing shared by the exact-rational and f64 code paths.
//!
//! Exact mode works over [`Rat`] (arbitrary-precision rationals, always in
//! lowest terms with positive denominator, which `num-rational` guarantees by
//! construction). Float mode works over plain `f64`; every tolerance is an
//! explicit parameter of the operation that uses it, never hidden state.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};



/// Exact rational scalar.
pub type Rat = BigRational;

/// The arithmetic shared by both scalar modes.
///
/// Deliberately small: just the field operations plus the conversions the
/// generic pencil code needs. `magnitude` is only ever used to pick
/// numerically favourable branches (e.g. which variable Horner factors out),
/// so an approximate value is fine for exact scalars.
pub trait Field: crate::mat::MatScalar {
    fn from_int(n: i64) -> Self;
    fn to_f64_approx(&self) -> f64;
    fn magnitude(&self) -> f64 {
        self.to_f64_approx().abs()
    }
}

impl Field for Rat {
    fn from_int(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
    fn to_f64_approx(&self) -> f64 {
        rat_to_f64(self)
    }
}

impl Field for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn to_f64_approx(&self) -> f64 {
        *self
    }
}

/// `f64` value of a rational, robust to numerators/denominators far outside
/// the `f64` range (falls back to the bit-length representation).
pub fn rat_to_f64(r: &Rat) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let l = rat_log2_abs(r);
    match l {
        Some(l) => {
            let sign = if r.is_negative() { -1.0 } else { 1.0 };
            sign * l.exp2()
        }
        None => 0.0,
    }
}

/// `log2 |r|`, or `None` for `r = 0`. Exact up to f64 rounding even when the
/// rational itself overflows f64 (uses bit lengths plus a 64-bit mantissa).
pub fn rat_log2_abs(r: &Rat) -> Option<f64> {
    if r.is_zero() {
        return None;
    }
    Some(bigint_log2_abs(r.numer()) - bigint_log2_abs(r.denom()))
}

fn bigint_log2_abs(n: &BigInt) -> f64 {
    let n = n.abs();
    let bits = n.bits();
    if bits <= 63 {
        return (n.to_i64().unwrap() as f64).log2();
    }
    // Keep the top 63 bits as a mantissa, remember how many we dropped.
    let shift = bits - 63;
    let top = (n >> shift).to_i64().unwrap() as f64;
    top.log2() + shift as f64
}

/// Exact rational from an f64 (every finite f64 is a dyadic rational).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Reconstructs a small-denominator rational close to `x`, verified to within
/// `tol`, via continued fractions. Used to recover exact eigenvalues from
/// float root estimates; the caller must still verify exactness downstream.
pub fn rational_reconstruct(x: f64, max_den: u64, tol: f64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, x.floor() as i128, 1i128);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        let cand = Rat::new(BigInt::from(p1), BigInt::from(q1));
        if (rat_to_f64(&cand) - x).abs() <= tol {
            return Some(cand);
        }
        if frac.abs() < 1e-18 {
            break;
        }
        let a = (1.0 / frac).floor();
        frac = 1.0 / frac - a;
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 as u128 > max_den as u128 || q2 <= 0 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    let cand = Rat::new(BigInt::from(p1), BigInt::from(q1));
    if (rat_to_f64(&cand) - x).abs() <= tol {
        Some(cand)
    } else {
        None
    }
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn rationals_stay_reduced_with_positive_denominator() {
        let r = rat(6, -4);
        assert_eq!(r, rat(-3, 2));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn log2_handles_huge_rationals() {
        let big = rat_int(2).pow(500);
        let l = rat_log2_abs(&big).unwrap();
        assert!((l - 500.0).abs() < 1e-9);
        let tiny = Rat::one() / big;
        assert!((rat_log2_abs(&tiny).unwrap() + 500.0).abs() < 1e-9);
    }

    #[test]
    fn reconstruct_simple_fractions() {
        let x = 1.0 / 3.0;
        let r = rational_reconstruct(x, 1_000_000, 1e-12).unwrap();
        assert_eq!(r, rat(1, 3));
        assert_eq!(rational_reconstruct(0.5, 10, 1e-12).unwrap(), rat(1, 2));
        assert!(rational_reconstruct(std::f64::consts::PI, 10, 1e-12).is_none());
    }
}
