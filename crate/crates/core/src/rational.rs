//! Exact rational arithmetic helpers.
//!
//! Probabilities, regularity parameters and masses are carried as
//! arbitrary-precision rationals so that every inequality in the crate is
//! decided exactly. Rationals serialize as decimal-free `"num/den"` strings.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `a/b` as an exact rational. Panics on `b == 0`; intended for literals.
pub fn rat(a: i64, b: i64) -> Rational {
    assert!(b != 0, "zero denominator");
    Rational::new(BigInt::from(a), BigInt::from(b))
}

pub fn rat_int(a: i64) -> Rational {
    Rational::from(BigInt::from(a))
}

pub fn rat_usize(a: usize) -> Rational {
    Rational::from(BigInt::from(a))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `r^e` for signed integer exponents, exact. `r` must be nonzero when `e < 0`.
pub fn pow_i64(r: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num::traits::Pow::pow(r.clone(), e as u64)
    } else {
        assert!(!r.is_zero(), "negative power of zero");
        num::traits::Pow::pow(r.clone().recip(), (-e) as u64)
    }
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num_str
        .parse()
        .map_err(|_| Error::input(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den_str
        .parse()
        .map_err(|_| Error::input(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::input(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"num/den"` rendering (reduced, denominator positive, always
/// carries the denominator so the format is self-describing).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Nearest-enough f64 rendering for human-readable columns. Falls back to a
/// sign-preserving ratio of magnitudes for out-of-range values.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
