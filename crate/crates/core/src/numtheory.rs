//! Exact integer arithmetic: factorization, radicals and the divisor-counting
//! quantities consumed by the existence criteria.
//!
//! Integers are `u128`. Factorization is deterministic: trial division by the
//! primes below [`TRIAL_LIMIT`], a Miller-Rabin test with a fixed base set that
//! is exact below 3.3e24, and Brent's variant of Pollard rho with the
//! increment schedule `c = 1, 2, 3, ...`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest input accepted by [`factorize`].
pub const FACTOR_LIMIT: u128 = 1 << 80;

/// Primes below this bound are removed by trial division before rho.
pub const TRIAL_LIMIT: u64 = 1_000_000;

/// Miller-Rabin with the first 13 primes as bases is exact below this value.
const MR_EXACT_BELOW: u128 = 3_317_044_064_679_887_385_961_981;

const MR_BASES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn sieve_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn trial_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_primes(TRIAL_LIMIT))
}

/// The `i`-th prime, 1-indexed: `nth_prime(1) == 2`, `nth_prime(2) == 3`.
pub fn nth_prime(i: usize) -> u64 {
    assert!(i >= 1, "primes are indexed from 1");
    let table = trial_primes();
    if i <= table.len() {
        return table[i - 1];
    }
    let mut count = table.len();
    let mut c = TRIAL_LIMIT + 1;
    loop {
        if is_prime(c as u128) {
            count += 1;
            if count == i {
                return c;
            }
        }
        c += 2;
    }
}

pub fn gcd(a: u128, b: u128) -> u128 {
    a.gcd(&b)
}

/// `a * b mod m` for any `m < 2^126`.
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let (a, b) = (a % m, b % m);
    if m <= u64::MAX as u128 {
        return a * b % m;
    }
    // Feed b into the accumulator `chunk` bits at a time so that neither the
    // shifted accumulator nor `a * digit` leaves 128 bits.
    let chunk = m.leading_zeros();
    debug_assert!(chunk >= 2);
    let bits = 128 - b.leading_zeros();
    let mut r: u128 = 0;
    let mut pos = bits.div_ceil(chunk) * chunk;
    let mask = (1u128 << chunk) - 1;
    while pos > 0 {
        pos -= chunk;
        let digit = (b >> pos) & mask;
        r = ((r << chunk) % m + a * digit % m) % m;
    }
    r
}

pub fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test, exact for every `n < 3.3e24`.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    assert!(n < MR_EXACT_BELOW, "primality of {n} is outside the deterministic range");
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Integer `k`-th root, rounded down.
pub fn iroot(n: u128, k: u32) -> u128 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64) as u128;
    let pow_le = |r: u128| -> bool {
        match r.checked_pow(k) {
            Some(v) => v <= n,
            None => false,
        }
    };
    while r > 0 && !pow_le(r) {
        r -= 1;
    }
    while pow_le(r + 1) {
        r += 1;
    }
    r
}

pub fn isqrt(n: u128) -> u128 {
    iroot(n, 2)
}

fn brent_rho(n: u128) -> u128 {
    debug_assert!(n > 3 && n % 2 == 1);
    for c in 1u128.. {
        let f = |x: u128| (mul_mod(x, x, n) + c) % n;
        let mut y = 2u128;
        let mut r = 1u64;
        let mut q = 1u128;
        let mut g = 1u128;
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// A complete prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u128,
    /// `(prime, exponent)` with strictly increasing primes.
    pub factors: Vec<(u128, u32)>,
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

impl Factorization {
    pub fn one() -> Self {
        Factorization { value: 1, factors: Vec::new() }
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn radical(&self) -> u128 {
        self.primes().product()
    }

    /// `W(t) = 2^omega(t)`, the number of squarefree divisors.
    pub fn w(&self) -> u128 {
        1u128 << self.omega()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn contains(&self, p: u128) -> bool {
        self.factors.binary_search_by(|&(q, _)| q.cmp(&p)).is_ok()
    }

    /// Factorization of the product, merging exponents.
    pub fn mul(&self, other: &Factorization) -> Result<Factorization> {
        let value = self
            .value
            .checked_mul(other.value)
            .ok_or_else(|| Error::Overflow(format!("{} * {}", self.value, other.value)))?;
        let mut factors = self.factors.clone();
        for &(p, e) in &other.factors {
            match factors.binary_search_by(|&(q, _)| q.cmp(&p)) {
                Ok(i) => factors[i].1 += e,
                Err(i) => factors.insert(i, (p, e)),
            }
        }
        Ok(Factorization { value, factors })
    }

    /// The subset of primes also dividing `m`, as a squarefree number.
    pub fn radical_part_dividing(&self, m: u128) -> u128 {
        self.primes().filter(|&p| m % p == 0).product()
    }
}

/// Complete factorization of `1 <= t <= 2^80`.
pub fn factorize(t: u128) -> Result<Factorization> {
    if t == 0 {
        return domain("cannot factor 0");
    }
    if t > FACTOR_LIMIT {
        return Err(Error::Capability(format!("{t} exceeds the factorization limit 2^80")));
    }
    Ok(factorize_unchecked(t))
}

pub(crate) fn factorize_unchecked(t: u128) -> Factorization {
    let mut n = t;
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for &p in trial_primes() {
        let p = p as u128;
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if n > 1 {
        let mut pending = vec![n];
        let mut large: Vec<u128> = Vec::new();
        while let Some(m) = pending.pop() {
            if m < (TRIAL_LIMIT as u128) * (TRIAL_LIMIT as u128) || is_prime(m) {
                // Every prime factor exceeds TRIAL_LIMIT, so m is prime here.
                large.push(m);
                continue;
            }
            if let Some((root, k)) = perfect_power(m) {
                for _ in 0..k {
                    pending.push(root);
                }
                continue;
            }
            let d = brent_rho(m);
            pending.push(d);
            pending.push(m / d);
        }
        large.sort_unstable();
        for p in large {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
    }
    Factorization { value: t, factors }
}

fn perfect_power(m: u128) -> Option<(u128, u32)> {
    let bits = 128 - m.leading_zeros();
    for k in 2..=bits {
        let r = iroot(m, k);
        if r < 2 {
            break;
        }
        if r.pow(k) == m {
            return Some((r, k));
        }
    }
    None
}

/// `W(t)`: the number of squarefree divisors of `t`.
pub fn squarefree_divisor_count(t: u128) -> Result<u128> {
    Ok(factorize(t)?.w())
}

/// If `q = p^e` for a prime `p` and `e >= 1`, returns `(p, e)`.
pub fn prime_power(q: u128) -> Option<(u128, u32)> {
    if q < 2 {
        return None;
    }
    let f = factorize(q).ok()?;
    match f.factors.as_slice() {
        [(p, e)] => Some((*p, *e)),
        _ => None,
    }
}

/// All odd prime powers `3 <= q <= limit`, ascending.
pub fn odd_prime_powers(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let primes = sieve_primes(limit);
    let mut out = Vec::new();
    for &p in primes.iter().skip(1) {
        let mut q = p;
        loop {
            out.push(q);
            match q.checked_mul(p) {
                Some(next) if next <= limit => q = next,
                _ => break,
            }
        }
    }
    out.sort_unstable();
    out
}

/// The bound `W(t) <= c_{t,a} t^{1/a}`, kept in exact components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WBound {
    pub a: u32,
    /// Number `j` of distinct primes of `t` not exceeding `2^a`.
    pub j: u32,
    /// Product of those primes.
    pub prime_product: u128,
    /// `c_{t,a} = 2^j / prime_product^{1/a}`.
    pub c: f64,
}

impl WBound {
    /// `c_{t,a} * t^{1/a}`.
    pub fn bound_for(&self, t: u128) -> f64 {
        (self.c.ln() + (t as f64).ln() / self.a as f64).exp()
    }
}

/// `c_{t,a}` from the factorization of `t`.
pub fn wr_bound_of(f: &Factorization, a: u32) -> WBound {
    let cutoff = if a >= 127 { u128::MAX } else { 1u128 << a };
    let small: Vec<u128> = f.primes().filter(|&p| p <= cutoff).collect();
    let j = small.len() as u32;
    let prime_product: u128 = small.iter().product();
    let ln_c = j as f64 * std::f64::consts::LN_2 - (prime_product as f64).ln() / a as f64;
    WBound { a, j, prime_product, c: ln_c.exp() }
}

pub fn wr_bound(t: u128, a: u32) -> Result<WBound> {
    if a == 0 {
        return domain("a must be positive");
    }
    Ok(wr_bound_of(&factorize(t)?, a))
}

/// The universal constant: `sup_t c_{t,8}`, the product of `2 / p^{1/8}` over
/// every prime `p < 256`.
pub fn d_sup() -> f64 {
    sieve_primes(256)
        .into_iter()
        .map(|p| 2.0 / (p as f64).powf(0.125))
        .filter(|&f| f > 1.0)
        .product()
}

/// All integer invariants of a pair `(q, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QnDecomposition {
    pub q: u128,
    pub n: u32,
    pub p: u128,
    /// `q = p^e`.
    pub e: u32,
    /// `q^n - 1`, factored.
    pub order: Factorization,
    /// Radical of `q^n - 1`.
    pub q0: u128,
    /// `Q = (q^n - 1) / (q - 1)`, factored.
    pub big_q: Factorization,
    /// Product of the primes of `q0` dividing `Q`.
    pub m_q: u128,
    /// 2-adic valuation of `q^n - 1`.
    pub ell: u32,
    /// Odd part of `q + 1` (only for `n = 2`).
    pub r2: Option<u128>,
    /// Odd part of `q - 1` (only for `n = 2`).
    pub s2: Option<u128>,
}

impl QnDecomposition {
    /// Radical of the odd part of `q^n - 1` (written `q_2'` for `n = 2`).
    pub fn odd_radical(&self) -> u128 {
        self.order.primes().filter(|&p| p != 2).product()
    }

    /// Odd primes of `q^n - 1`, ascending.
    pub fn odd_primes(&self) -> Vec<u128> {
        self.order.primes().filter(|&p| p != 2).collect()
    }

    /// Odd primes dividing `q + 1`; used by the `n = 2` criteria.
    pub fn primes_of_q_plus_1(&self) -> Vec<u128> {
        let qp1 = self.q + 1;
        self.order.primes().filter(|&p| p != 2 && qp1 % p == 0).collect()
    }
}

fn divisors_of(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Cyclotomic values `Phi_d(q)` for every `d | n` (ascending in `d`).
fn cyclotomic_values(q: u128, n: u32) -> Result<Vec<(u32, u128)>> {
    let mut out: Vec<(u32, u128)> = Vec::new();
    for d in divisors_of(n) {
        let qd = q
            .checked_pow(d)
            .ok_or_else(|| Error::Overflow(format!("{q}^{d} exceeds 128 bits")))?;
        let mut v = qd - 1;
        for &(e, phi) in &out {
            if d % e == 0 {
                v /= phi;
            }
        }
        out.push((d, v));
    }
    Ok(out)
}

pub fn decompose(q: u128, n: u32) -> Result<QnDecomposition> {
    if q % 2 == 0 {
        return domain("2-primitive elements exist only in odd characteristic");
    }
    if n == 0 {
        return domain("extension degree must be positive");
    }
    let (p, e) = prime_power(q).ok_or_else(|| Error::Domain(format!("{q} is not a prime power")))?;
    let parts = cyclotomic_values(q, n)?;
    let mut order = Factorization::one();
    let mut big_q = Factorization::one();
    for &(d, v) in &parts {
        let f = factorize(v)?;
        order = order.mul(&f)?;
        if d > 1 {
            big_q = big_q.mul(&f)?;
        }
    }
    let q0 = order.radical();
    let m_q = order.radical_part_dividing(big_q.value);
    let ell = order.factors.iter().find(|&&(p, _)| p == 2).map_or(0, |&(_, e)| e);
    let (r2, s2) = if n == 2 {
        let odd = |mut v: u128| {
            while v % 2 == 0 {
                v /= 2;
            }
            v
        };
        (Some(odd(q + 1)), Some(odd(q - 1)))
    } else {
        (None, None)
    };
    Ok(QnDecomposition { q, n, p, e, order, q0, big_q, m_q, ell, r2, s2 })
}

/// Euler's totient.
pub fn phi(m: u128) -> Result<u128> {
    let f = factorize(m)?;
    Ok(f.factors.iter().fold(1u128, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1)))
}

pub fn moebius(m: u128) -> Result<i8> {
    let f = factorize(m)?;
    if !f.is_squarefree() {
        return Ok(0);
    }
    Ok(if f.omega() % 2 == 0 { 1 } else { -1 })
}

/// `theta(m) = phi(m) / m` as an exact rational.
pub fn theta(m: u128) -> Result<BigRational> {
    Ok(BigRational::new(BigInt::from(phi(m)?), BigInt::from(m)))
}

/// `theta` of a squarefree number given by its primes.
pub fn theta_of_primes(primes: &[u128]) -> BigRational {
    primes.iter().fold(BigRational::from_integer(1.into()), |acc, &p| {
        acc * BigRational::new(BigInt::from(p - 1), BigInt::from(p))
    })
}

/// Arithmetic function selector for the CLI-facing `arith` entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Phi,
    Moebius,
    Theta,
}

/// Value of an arithmetic function: integers for `phi`/`moebius`, a rational for `theta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithValue {
    Integer(BigInt),
    Rational(BigRational),
}

pub fn arith(kind: ArithKind, m: u128) -> Result<ArithValue> {
    if m == 0 {
        return domain("m must be positive");
    }
    Ok(match kind {
        ArithKind::Phi => ArithValue::Integer(phi(m)?.into()),
        ArithKind::Moebius => ArithValue::Integer(moebius(m)?.into()),
        ArithKind::Theta => ArithValue::Rational(theta(m)?),
    })
}

/// Squarefree divisors of a squarefree number given by its primes.
pub fn squarefree_divisors(primes: &[u128]) -> Vec<u128> {
    let mut out = vec![1u128];
    for &p in primes {
        let len = out.len();
        for i in 0..len {
            out.push(out[i] * p);
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_radical(mut t: u128) -> u128 {
        let mut rad = 1;
        let mut p = 2;
        while p * p <= t {
            if t % p == 0 {
                rad *= p;
                while t % p == 0 {
                    t /= p;
                }
            }
            p += 1;
        }
        if t > 1 {
            rad *= t;
        }
        rad
    }

    #[test]
    fn small_factorizations() {
        assert_eq!(factorize(1).unwrap().factors, vec![]);
        assert_eq!(factorize(24).unwrap().factors, vec![(2, 3), (3, 1)]);
        let f = factorize(371_292).unwrap();
        assert_eq!(f.value, 13u128.pow(5) - 1);
        assert_eq!(f.radical(), trial_radical(371_292));
        assert!(factorize(0).is_err());
    }

    #[test]
    fn factors_near_the_limit() {
        // Two 40-bit primes.
        let p = 549_755_813_911u128;
        let q = 549_755_813_927u128;
        assert!(is_prime(p) && is_prime(q));
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors, vec![(p, 1), (q, 1)]);
        let f = factorize(p * p).unwrap();
        assert_eq!(f.factors, vec![(p, 2)]);
        assert!(factorize(FACTOR_LIMIT + 1).is_err());
    }

    #[test]
    fn mul_mod_wide_moduli() {
        let m = (1u128 << 81) - 1;
        let a = m - 5;
        let b = m - 7;
        // (−5)(−7) = 35 mod m
        assert_eq!(mul_mod(a, b, m), 35);
    }

    #[test]
    fn w_examples() {
        assert_eq!(squarefree_divisor_count(1).unwrap(), 1);
        assert_eq!(squarefree_divisor_count(24).unwrap(), 4);
        assert_eq!(squarefree_divisor_count(8).unwrap(), 2);
    }

    #[test]
    fn wr_bound_examples() {
        let b = wr_bound(24, 8).unwrap();
        let expected = 4.0 / 6f64.powf(1.0 / 8.0);
        assert!((b.c - expected).abs() < 1e-12);
        assert!((b.c - 3.197).abs() < 1e-3);
        assert!(4.0 <= b.bound_for(24));
        // no prime <= 2^2 = 4 divides 35 * 11
        assert_eq!(wr_bound(385, 2).unwrap().c, 1.0);
        assert!(d_sup() < 4514.7);
        assert!(d_sup() > 4514.0);
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(5, 3).unwrap();
        assert_eq!(d.order.value, 124);
        assert_eq!(d.q0, 62);
        assert_eq!(d.big_q.value, 31);
        assert_eq!(d.m_q, 31);
        let d = decompose(3, 2).unwrap();
        assert_eq!((d.order.value, d.ell, d.r2, d.s2), (8, 3, Some(1), Some(1)));
        let d = decompose(7, 2).unwrap();
        assert_eq!((d.order.value, d.ell, d.r2, d.s2), (48, 4, Some(1), Some(3)));
        assert!(decompose(4, 2).is_err());
        assert!(decompose(15, 2).is_err());
    }

    #[test]
    fn decompose_large_quintic() {
        let d = decompose(73_259, 5).unwrap();
        let f = &d.order;
        let product: u128 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
        assert_eq!(product, 73_259u128.pow(5) - 1);
        assert!(f.primes().all(is_prime));
    }

    #[test]
    fn arith_examples() {
        assert_eq!(phi(26).unwrap(), 12);
        assert_eq!(moebius(12).unwrap(), 0);
        assert_eq!(moebius(30).unwrap(), -1);
        assert_eq!(theta(62).unwrap(), BigRational::new(15.into(), 31.into()));
        assert_eq!(
            arith(ArithKind::Phi, 26).unwrap(),
            ArithValue::Integer(12.into())
        );
    }

    #[test]
    fn odd_prime_power_count() {
        // Count used by the n = 2 scan.
        assert_eq!(odd_prime_powers(1_048_576).len(), 82_247);
        assert_eq!(&odd_prime_powers(30)[..], &[3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29]);
    }

    #[test]
    fn nth_prime_indexing() {
        assert_eq!(nth_prime(1), 2);
        assert_eq!(nth_prime(2), 3);
        assert_eq!(nth_prime(54), 251);
    }

    proptest! {
        #[test]
        fn factorization_invariants(t in 1u128..1_000_000) {
            let f = factorize(t).unwrap();
            let product: u128 = f.factors.iter().map(|&(p, e)| p.pow(e)).product();
            prop_assert_eq!(product, t);
            prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.primes().all(is_prime));
            prop_assert_eq!(t % f.radical(), 0);
            let mu_sq = (1..=t).filter(|d| t % d == 0 && moebius(*d).unwrap() != 0).count();
            prop_assert_eq!(f.w(), mu_sq as u128);
        }

        #[test]
        fn w_below_c_bound(t in 1u128..1_000_000, a in 2u32..=8) {
            let b = wr_bound(t, a).unwrap();
            let w = squarefree_divisor_count(t).unwrap() as f64;
            prop_assert!(w <= b.bound_for(t) * (1.0 + 1e-12));
        }

        #[test]
        fn c8_universal(t in 1u128..(1u128 << 60)) {
            prop_assert!(wr_bound(t, 8).unwrap().c < 4514.7);
        }

        #[test]
        fn decompose_invariants(idx in 0usize..200, n in 1u32..6) {
            let q = odd_prime_powers(2000)[idx] as u128;
            let d = decompose(q, n).unwrap();
            prop_assert_eq!(d.big_q.value % d.m_q, 0);
            prop_assert_eq!(d.q0 % d.m_q, 0);
            prop_assert_eq!(d.order.value % d.q0, 0);
            if n == 2 {
                let (r2, s2) = (d.r2.unwrap(), d.s2.unwrap());
                prop_assert_eq!(gcd(r2, s2), 1);
                prop_assert_eq!((1u128 << d.ell) * r2 * s2, q * q - 1);
            }
        }
    }
}
