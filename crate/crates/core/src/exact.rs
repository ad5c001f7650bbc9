//! Exact sums of rational multiples of square roots, and outward-rounded
//! intervals for displaying them.
//!
//! Every inequality evaluated by the criteria has the shape
//! `a + b*sqrt(x) > 0` or `a*sqrt(x) + b*sqrt(y) > 0` with rational `a, b`, so
//! its sign is decided by comparing squares of rationals. Floating point is
//! only used to print the enclosing [`Interval`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::factorize_unchecked;

/// Splits `x` into `(s, f)` with `x = s^2 * f` and `f` squarefree.
fn square_split(x: u128) -> (u128, u128) {
    if x == 0 {
        return (0, 1);
    }
    let f = factorize_unchecked(x);
    let mut s = 1u128;
    let mut free = 1u128;
    for (p, e) in f.factors {
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            free *= p;
        }
    }
    (s, free)
}

/// `sum_i c_i * sqrt(x_i)` with distinct squarefree radicands `x_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    /// Sorted by radicand; zero coefficients are dropped.
    terms: Vec<(u128, BigRational)>,
}

impl Surd {
    pub fn zero() -> Self {
        Surd { terms: Vec::new() }
    }

    pub fn rational(c: BigRational) -> Self {
        Surd::term(c, 1)
    }

    pub fn int(c: impl Into<BigInt>) -> Self {
        Surd::rational(BigRational::from_integer(c.into()))
    }

    /// `c * sqrt(x)`.
    pub fn term(c: BigRational, x: u128) -> Self {
        let (s, free) = square_split(x);
        let c = c * BigRational::from_integer(s.into());
        let mut out = Surd::zero();
        out.push(free, c);
        out
    }

    pub fn sqrt(x: u128) -> Self {
        Surd::term(BigRational::one(), x)
    }

    /// `q^(k/2)`.
    pub fn pow_half(q: u128, k: u32) -> Self {
        let whole = BigInt::from(q).pow(k / 2);
        let c = BigRational::from_integer(whole);
        if k % 2 == 0 {
            Surd::rational(c)
        } else {
            Surd::term(c, q)
        }
    }

    fn push(&mut self, x: u128, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(y, _)| y.cmp(&x)) {
            Ok(i) => {
                self.terms[i].1 += c;
                if self.terms[i].1.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (x, c)),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Surd::zero();
        for (x, d) in &self.terms {
            out.push(*x, d * c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of distinct radicands (counting the rational part as one).
    pub fn radicand_count(&self) -> usize {
        self.terms.len()
    }

    /// Exact sign. Supports up to two distinct radicands, which covers every
    /// inequality used by the criteria.
    pub fn sign(&self) -> Result<Ordering> {
        match self.terms.as_slice() {
            [] => Ok(Ordering::Equal),
            [(_, c)] => Ok(c.cmp(&BigRational::zero())),
            [(x, a), (y, b)] => {
                let zero = BigRational::zero();
                let (sa, sb) = (a.cmp(&zero), b.cmp(&zero));
                if sa == sb {
                    return Ok(sa);
                }
                // Opposite signs: the term with the larger square wins.
                let lhs = a * a * BigRational::from_integer((*x).into());
                let rhs = b * b * BigRational::from_integer((*y).into());
                Ok(match lhs.cmp(&rhs) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    Ordering::Equal => Ordering::Equal,
                })
            }
            _ => Err(Error::Capability(format!(
                "sign of a surd with {} radicands is not supported",
                self.terms.len()
            ))),
        }
    }

    pub fn cmp_surd(&self, other: &Surd) -> Result<Ordering> {
        (self.clone() - other.clone()).sign()
    }

    /// Outward-rounded enclosure.
    pub fn enclosure(&self) -> Interval {
        self.terms.iter().fold(Interval::point(0.0), |acc, (x, c)| {
            acc + Interval::from_rational(c) * Interval::from_int(*x).sqrt()
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.enclosure().mid()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (x, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            if *x == 1 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "sqrt({x})")?;
            } else {
                write!(f, "{a}*sqrt({x})")?;
            }
        }
        Ok(())
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(mut self, rhs: Surd) -> Surd {
        for (x, c) in rhs.terms {
            self.push(x, c);
        }
        self
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        self.scale(&-BigRational::one())
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let mut out = Surd::zero();
        for (x, a) in &self.terms {
            for (y, b) in &rhs.terms {
                let g = num_integer::gcd(*x, *y);
                // sqrt(x) sqrt(y) = g sqrt(x/g * y/g) for squarefree x, y
                let c = a * b * BigRational::from_integer(g.into());
                out.push((x / g) * (y / g), c);
            }
        }
        out
    }
}

/// A closed interval `[lo, hi]` of reals, with every operation rounded outward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    fn around(x: f64) -> Self {
        Interval { lo: x.next_down(), hi: x.next_up() }
    }

    pub fn from_int(x: u128) -> Self {
        let f = x as f64;
        if f as u128 == x && f < 9.0e15 {
            Interval::point(f)
        } else {
            Interval::around(f)
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        if r.is_integer() {
            if let Some(v) = r.to_integer().to_i64() {
                if v.unsigned_abs() < (1 << 53) {
                    return Interval::point(v as f64);
                }
            }
        }
        let f = r.to_f64().unwrap_or(match r.numer().sign() {
            Sign::Minus => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        });
        let iv = Interval::around(f);
        Interval::new(iv.lo.next_down(), iv.hi.next_up())
    }

    pub fn sqrt(self) -> Self {
        Interval::new(self.lo.max(0.0).sqrt().next_down().max(0.0), self.hi.sqrt().next_up())
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// The same midpoint with `factor` times the width (and at least one ulp on each side).
    pub fn widen(&self, factor: f64) -> Self {
        let m = self.mid();
        let half = 0.5 * self.width() * factor;
        Interval::new((m - half).next_down().min(self.lo), (m + half).next_up().max(self.hi))
    }

    /// True when every point of `self` exceeds every point of `other`.
    pub fn certainly_gt(&self, other: &Interval) -> bool {
        self.lo > other.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new((self.lo + rhs.lo).next_down(), (self.hi + rhs.hi).next_up())
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new((self.lo - rhs.hi).next_down(), (self.hi - rhs.lo).next_up())
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo.next_down(), hi.next_up())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn ratu(n: u128) -> BigRational {
    BigRational::from_integer(n.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_radicands() {
        assert_eq!(Surd::sqrt(9), Surd::int(3));
        assert_eq!(Surd::sqrt(12), Surd::term(ratu(2), 3));
        assert_eq!(Surd::pow_half(5, 3), Surd::term(ratu(5), 5));
        assert_eq!(Surd::sqrt(2) * Surd::sqrt(2), Surd::int(2));
        assert_eq!((Surd::sqrt(6) * Surd::sqrt(10)), Surd::term(ratu(2), 15));
    }

    #[test]
    fn signs() {
        // 5^{3/2} - 16 < 0
        let s = Surd::pow_half(5, 3) - Surd::int(16);
        assert_eq!(s.sign().unwrap(), Ordering::Less);
        // sqrt(2) - 1 > 0
        assert_eq!((Surd::sqrt(2) - Surd::int(1)).sign().unwrap(), Ordering::Greater);
        // 3 sqrt(2) - 2 sqrt(5) < 0  (18 < 20)
        let s = Surd::term(ratu(3), 2) - Surd::term(ratu(2), 5);
        assert_eq!(s.sign().unwrap(), Ordering::Less);
        let three = Surd::int(1) + Surd::sqrt(2) + Surd::sqrt(3);
        assert!(three.sign().is_err());
    }

    #[test]
    fn display() {
        let s = Surd::int(-4) + Surd::term(rat(3, 2), 5);
        assert_eq!(s.to_string(), "-4 + 3/2*sqrt(5)");
    }

    proptest! {
        #[test]
        fn sign_agrees_with_float(a in -1000i64..1000, b in -1000i64..1000, x in 2u128..500) {
            let s = Surd::int(a) + Surd::term(ratu(b.unsigned_abs() as u128), x).scale(&rat(b.signum(), 1));
            let f = a as f64 + b as f64 * (x as f64).sqrt();
            if f.abs() > 1e-6 {
                let expected = if f > 0.0 { Ordering::Greater } else { Ordering::Less };
                prop_assert_eq!(s.sign().unwrap(), expected);
            }
            prop_assert!(s.enclosure().contains(f) || (s.enclosure().mid() - f).abs() < 1e-9);
        }

        #[test]
        fn enclosure_contains_value(n in 1i64..1_000_000, d in 1i64..1000, x in 1u128..100_000) {
            let s = Surd::term(rat(n, d), x);
            let v = (n as f64 / d as f64) * (x as f64).sqrt();
            let e = s.enclosure();
            prop_assert!(e.lo <= v * (1.0 + 1e-15) && v * (1.0 - 1e-15) <= e.hi);
            prop_assert!(e.widen(2.0).lo <= e.lo && e.widen(2.0).hi >= e.hi);
        }
    }
}
