//! Outward-rounded f64 intervals.
//!
//! The numeric validators (`tau_check`, `kappa0_conditions`,
//! `main_theorem_bound`) involve `log2` of integers, which is irrational in
//! general. Verdicts must not depend on floating rounding, so every
//! operation widens outward: a comparison is only reported when the
//! intervals separate.

use num::traits::ToPrimitive;

use crate::rational::Rational;

/// Safety margin in ulps applied around transcendental results, which are
/// faithful but not correctly rounded.
const TRANS_ULPS: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

fn down_n(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = down(x);
    }
    x
}

fn up_n(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = up(x);
    }
    x
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn from_u64(x: u64) -> Self {
        let f = x as f64;
        if x < (1u64 << 53) {
            Interval::point(f)
        } else {
            Interval { lo: down(f), hi: up(f) }
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        let f = r.to_f64().unwrap_or(f64::NAN);
        if f.is_nan() {
            return Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
        }
        // num's conversion is not guaranteed correctly rounded; widen.
        Interval { lo: down_n(f, 2), hi: up_n(f, 2) }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: down(self.lo + other.lo), hi: up(self.hi + other.hi) }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval { lo: down(self.lo - other.hi), hi: up(self.hi - other.lo) }
    }

    /// Product for non-negative intervals (all uses here are non-negative).
    pub fn mul_nonneg(&self, other: &Interval) -> Interval {
        debug_assert!(self.lo >= 0.0 && other.lo >= 0.0);
        Interval { lo: down(self.lo * other.lo), hi: up(self.hi * other.hi) }
    }

    /// Quotient for non-negative numerator and strictly positive denominator.
    pub fn div_pos(&self, other: &Interval) -> Interval {
        debug_assert!(self.lo >= 0.0 && other.lo > 0.0);
        Interval { lo: down(self.lo / other.hi), hi: up(self.hi / other.lo) }
    }

    /// Integer power of a non-negative interval.
    pub fn powi_nonneg(&self, e: u32) -> Interval {
        debug_assert!(self.lo >= 0.0);
        let mut acc = Interval::point(1.0);
        for _ in 0..e {
            acc = acc.mul_nonneg(self);
        }
        acc
    }

    /// `log2` of a positive interval; exact on exact powers of two.
    pub fn log2_pos(&self) -> Interval {
        debug_assert!(self.lo > 0.0);
        let exact = self.lo == self.hi && self.lo.log2().exp2() == self.lo;
        if exact {
            Interval::point(self.lo.log2())
        } else {
            Interval {
                lo: down_n(self.lo.log2(), TRANS_ULPS),
                hi: up_n(self.hi.log2(), TRANS_ULPS),
            }
        }
    }

    /// `2^self`.
    pub fn exp2(&self) -> Interval {
        Interval {
            lo: down_n(self.lo.exp2(), TRANS_ULPS),
            hi: up_n(self.hi.exp2(), TRANS_ULPS),
        }
    }

    /// `self^exponent` for positive base: `exp2(exponent * log2 self)`.
    pub fn pow_interval(&self, exponent: &Interval) -> Interval {
        self.log2_pos().mul_signed(exponent).exp2()
    }

    /// General signed product (used only by `pow_interval`).
    fn mul_signed(&self, other: &Interval) -> Interval {
        let cands = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = cands.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: down(lo), hi: up(hi) }
    }

    /// Is every point of `self` <= every point of `other`?
    pub fn definitely_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn definitely_ge(&self, other: &Interval) -> bool {
        self.lo >= other.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}
