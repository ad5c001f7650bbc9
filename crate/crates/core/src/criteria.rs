//! Existence criteria for 2-primitive elements with prescribed trace, the
//! greedy sieve and the `t`-range search procedures.
//!
//! Every verdict is decided exactly: both sides of an inequality are kept as
//! [`Surd`]s and compared by sign. Intervals in a report are for display.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use serde::{Deserialize, Serialize};

use crate::exact::{rat, ratu, Interval, Surd};
use crate::numtheory::{self, nth_prime, prime_power, QnDecomposition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// Recursion step for composite degree: `(q, n)` follows from `(q^l, n / l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub l: u32,
    pub q: u128,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairClass {
    pub q: u128,
    pub n: u32,
    pub parity: Parity,
    pub reduction: Option<Reduction>,
}

fn least_prime_factor(n: u32) -> u32 {
    (2..=n).find(|d| n % d == 0).unwrap_or(n)
}

pub fn classify_pair(q: u128, n: u32) -> Result<PairClass> {
    if q % 2 == 0 {
        return Err(Error::Domain("2-primitive elements exist only in odd characteristic".into()));
    }
    if prime_power(q).is_none() {
        return Err(Error::Domain(format!("{q} is not a prime power")));
    }
    if n < 2 {
        return Err(Error::Domain("extension degree must be at least 2".into()));
    }
    let parity = if q % 4 == 3 && n % 2 == 1 { Parity::Odd } else { Parity::Even };
    let l = least_prime_factor(n);
    let reduction = if l < n {
        let ql = q
            .checked_pow(l)
            .ok_or_else(|| Error::Overflow(format!("{q}^{l} exceeds 128 bits")))?;
        Some(Reduction { l, q: ql, n: n / l })
    } else {
        None
    };
    Ok(PairClass { q, n, parity, reduction })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaClass {
    Zero,
    Nonzero,
    Any,
}

impl fmt::Display for BetaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BetaClass::Zero => "zero",
            BetaClass::Nonzero => "nonzero",
            BetaClass::Any => "any",
        })
    }
}

impl FromStr for BetaClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(BetaClass::Zero),
            "nonzero" => Ok(BetaClass::Nonzero),
            "any" => Ok(BetaClass::Any),
            _ => Err(Error::Parse(format!("unknown beta class '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionId {
    #[serde(rename = "odd-pair")]
    OddPair,
    #[serde(rename = "reduction")]
    Reduction,
    #[serde(rename = "prescribed-trace")]
    PrescribedTrace,
    #[serde(rename = "generic")]
    Generic,
    #[serde(rename = "dt")]
    Dt,
    H,
    N,
    T,
    Z,
    E1,
    G1,
    #[serde(rename = "n3")]
    N3,
    #[serde(rename = "n2")]
    N2,
    #[serde(rename = "siev4")]
    Siev4,
}

impl CriterionId {
    pub fn name(self) -> &'static str {
        match self {
            CriterionId::OddPair => "odd-pair",
            CriterionId::Reduction => "reduction",
            CriterionId::PrescribedTrace => "prescribed-trace",
            CriterionId::Generic => "generic",
            CriterionId::Dt => "dt",
            CriterionId::H => "H",
            CriterionId::N => "N",
            CriterionId::T => "T",
            CriterionId::Z => "Z",
            CriterionId::E1 => "E1",
            CriterionId::G1 => "G1",
            CriterionId::N3 => "n3",
            CriterionId::N2 => "n2",
            CriterionId::Siev4 => "siev4",
        }
    }

    pub fn is_sieved(self) -> bool {
        matches!(
            self,
            CriterionId::T | CriterionId::Z | CriterionId::E1 | CriterionId::G1 | CriterionId::Siev4
        )
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let all = [
            CriterionId::OddPair,
            CriterionId::Reduction,
            CriterionId::PrescribedTrace,
            CriterionId::Generic,
            CriterionId::Dt,
            CriterionId::H,
            CriterionId::N,
            CriterionId::T,
            CriterionId::Z,
            CriterionId::E1,
            CriterionId::G1,
            CriterionId::N3,
            CriterionId::N2,
            CriterionId::Siev4,
        ];
        all.into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown criterion '{s}'")))
    }
}

mod ratstr {
    use num_rational::BigRational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A split `radical = k * p_1 ... p_s` together with the sub-data taken over a
/// second modulus (`Q` for the `q^n - 1` sieve, `q + 1` for the `n = 2` sieve).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveSet {
    pub k: u128,
    pub primes: Vec<u128>,
    #[serde(with = "ratstr")]
    pub delta: BigRational,
    /// Number of sieving primes dividing the second modulus.
    pub r: usize,
    #[serde(with = "ratstr")]
    pub delta_sub: BigRational,
    /// Product of the primes of `k` dividing the second modulus.
    pub k_sub: u128,
    pub w_k: u128,
    pub w_k_sub: u128,
}

impl SieveSet {
    /// `pool` lists the primes of the radical being sieved.
    pub fn new(pool: &[u128], primes: &[u128], modulus: u128) -> Result<SieveSet> {
        for (i, p) in primes.iter().enumerate() {
            if !pool.contains(p) {
                return Err(Error::Precondition(format!("sieving prime {p} does not divide the radical")));
            }
            if primes[..i].contains(p) {
                return Err(Error::Precondition(format!("sieving prime {p} repeated")));
            }
        }
        let mut k = 1u128;
        let mut k_sub = 1u128;
        let mut w_k = 1u128;
        let mut w_k_sub = 1u128;
        for &p in pool.iter().filter(|p| !primes.contains(p)) {
            k *= p;
            w_k *= 2;
            if modulus % p == 0 {
                k_sub *= p;
                w_k_sub *= 2;
            }
        }
        let mut delta = BigRational::one();
        let mut delta_sub = BigRational::one();
        let mut r = 0;
        for &p in primes {
            let inv = BigRational::new(1.into(), p.into());
            if modulus % p == 0 {
                r += 1;
                delta_sub -= &inv;
            }
            delta -= inv;
        }
        Ok(SieveSet { k, primes: primes.to_vec(), delta, r, delta_sub, k_sub, w_k, w_k_sub })
    }

    pub fn s(&self) -> usize {
        self.primes.len()
    }

    /// `(s - 1) / delta + 2`.
    pub fn main_factor(&self) -> BigRational {
        rat(self.s() as i64 - 1, 1) / &self.delta + rat(2, 1)
    }

    /// `(r - 1 + delta_sub) / delta + 1`.
    pub fn sub_factor(&self) -> BigRational {
        (rat(self.r as i64 - 1, 1) + &self.delta_sub) / &self.delta + BigRational::one()
    }

    fn require_positive(&self) -> Result<()> {
        if self.delta.is_positive() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("sieve constant {} is not positive", self.delta)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Proved,
    Inconclusive,
}

/// One side of an inequality: exact closed form plus an outward-rounded enclosure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub exact: String,
    pub interval: Interval,
}

impl Side {
    pub fn of(s: &Surd) -> Side {
        Side { exact: s.to_string(), interval: s.enclosure() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub q: u128,
    pub n: u32,
    pub beta_class: BetaClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sieve: Option<SieveSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Side>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub quantities: BTreeMap<String, String>,
}

impl CriterionReport {
    pub fn proved(&self) -> bool {
        self.verdict == Verdict::Proved
    }
}

struct Ineq {
    criterion: CriterionId,
    beta_class: BetaClass,
    sieve: Option<SieveSet>,
    quantities: BTreeMap<String, String>,
}

impl Ineq {
    fn new(criterion: CriterionId, beta_class: BetaClass) -> Self {
        Ineq { criterion, beta_class, sieve: None, quantities: BTreeMap::new() }
    }

    fn with_sieve(mut self, s: SieveSet) -> Self {
        self.sieve = Some(s);
        self
    }

    fn note(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.quantities.insert(key.to_string(), value.to_string());
        self
    }

    fn decide(self, q: u128, n: u32, lhs: Surd, rhs: Surd) -> Result<CriterionReport> {
        let verdict = match (lhs.clone() - rhs.clone()).sign()? {
            Ordering::Greater => Verdict::Proved,
            _ => Verdict::Inconclusive,
        };
        Ok(CriterionReport {
            criterion: self.criterion,
            q,
            n,
            beta_class: self.beta_class,
            sieve: self.sieve,
            lhs: Some(Side::of(&lhs)),
            rhs: Some(Side::of(&rhs)),
            verdict,
            quantities: self.quantities,
        })
    }
}

fn int(x: u128) -> Surd {
    Surd::int(x)
}

fn big(x: u128) -> BigInt {
    BigInt::from(x)
}

fn require_even(dec: &QnDecomposition) -> Result<()> {
    if dec.q % 4 == 3 && dec.n % 2 == 1 {
        Err(Error::Domain(format!("({}, {}) is an odd pair", dec.q, dec.n)))
    } else {
        Ok(())
    }
}

fn w_of(m: u128) -> Result<u128> {
    Ok(numtheory::factorize(m)?.w())
}

/// The odd pair argument: existence for every trace, no computation needed.
pub fn odd_pair_report(q: u128, n: u32) -> Result<CriterionReport> {
    let class = classify_pair(q, n)?;
    let verdict = if class.parity == Parity::Odd { Verdict::Proved } else { Verdict::Inconclusive };
    Ok(CriterionReport {
        criterion: CriterionId::OddPair,
        q,
        n,
        beta_class: BetaClass::Any,
        sieve: None,
        lhs: None,
        rhs: None,
        verdict,
        quantities: BTreeMap::new(),
    })
}

/// Existence of an `r`-primitive element with any trace for large `n`.
/// Decided on the equivalent integer form `q^(n-4) * 10^4 > 98^4 * r^3`.
pub fn prescribed_trace_check(q: u128, n: u32, r: u128) -> bool {
    if n <= 4 || q < 2 {
        return false;
    }
    let lhs = big(q).pow(n - 4) * BigInt::from(10u32).pow(4u32);
    let rhs = BigInt::from(98u32).pow(4u32) * big(r).pow(3u32);
    lhs > rhs
}

/// Generic or data-dependent mode of the `n > 4` gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum N4Mode {
    Generic,
    Exact,
}

fn generic_holds(q: u128, n: u32) -> bool {
    let lhs = big(q).pow(3 * n - 8) * BigInt::from(10u32).pow(8u32);
    lhs > BigInt::from(180_588u32).pow(8u32)
}

fn q_pow_display(q: u128, n: u32) -> (Interval, String) {
    let e = (3 * n - 8) as f64 / 8.0;
    let v = ((q as f64).ln() * e).exp();
    (Interval::point(v).widen(1e-12), format!("{q}^({}/8)", 3 * n - 8))
}

/// The generic `n > 4` condition `q^(3n/8 - 1) > 4 * 4514.7`.
pub fn generic_report(q: u128, n: u32) -> Result<CriterionReport> {
    if n <= 4 {
        return Err(Error::Domain("the gate applies to n > 4".into()));
    }
    let (lhs_iv, lhs_ex) = q_pow_display(q, n);
    let rhs = ratu(180_588) / ratu(10);
    let verdict = if generic_holds(q, n) { Verdict::Proved } else { Verdict::Inconclusive };
    Ok(CriterionReport {
        criterion: CriterionId::Generic,
        q,
        n,
        beta_class: BetaClass::Any,
        sieve: None,
        lhs: Some(Side { exact: lhs_ex, interval: lhs_iv }),
        rhs: Some(Side { exact: rhs.to_string(), interval: Interval::from_rational(&rhs) }),
        verdict,
        quantities: BTreeMap::new(),
    })
}

/// The refinement `q^(3n/8 - 1) > 4 d_{q^n - 1}` with the exact constant of
/// `q^n - 1`, decided as `q^(3n-8) * P > (4 * 2^j)^8`.
pub fn dt_report(dec: &QnDecomposition) -> Result<CriterionReport> {
    let (q, n) = (dec.q, dec.n);
    if n <= 4 {
        return Err(Error::Domain("the gate applies to n > 4".into()));
    }
    let wb = numtheory::wr_bound_of(&dec.order, 8);
    let lhs = big(q).pow(3 * n - 8) * big(wb.prime_product);
    let rhs = (BigInt::from(4u32) * BigInt::from(2u32).pow(wb.j)).pow(8u32);
    let (lhs_iv, lhs_ex) = q_pow_display(q, n);
    let d = 4.0 * wb.c;
    let mut quantities = BTreeMap::new();
    quantities.insert("j".into(), wb.j.to_string());
    quantities.insert("prime_product".into(), wb.prime_product.to_string());
    Ok(CriterionReport {
        criterion: CriterionId::Dt,
        q,
        n,
        beta_class: BetaClass::Any,
        sieve: None,
        lhs: Some(Side { exact: lhs_ex, interval: lhs_iv }),
        rhs: Some(Side {
            exact: format!("4 * 2^{} / {}^(1/8)", wb.j, wb.prime_product),
            interval: Interval::point(d).widen(1e-12),
        }),
        verdict: if lhs > rhs { Verdict::Proved } else { Verdict::Inconclusive },
        quantities,
    })
}

/// Boolean form of the `n > 4` gate.
pub fn n4_simple_check(q: u128, n: u32, mode: N4Mode) -> Result<bool> {
    if n <= 4 {
        return Err(Error::Domain("the gate applies to n > 4".into()));
    }
    match mode {
        N4Mode::Generic => Ok(generic_holds(q, n)),
        N4Mode::Exact => Ok(dt_report(&numtheory::decompose(q, n)?)?.proved()),
    }
}

/// Least prime power satisfying the generic `n > 4` condition.
pub fn generic_threshold(n: u32) -> Result<u128> {
    if n <= 4 {
        return Err(Error::Domain("the gate applies to n > 4".into()));
    }
    let (mut lo, mut hi) = (1u128, 2u128);
    while !generic_holds(hi, n) {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if generic_holds(mid, n) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut q = hi.max(2);
    while prime_power(q).is_none() {
        q += 1;
    }
    Ok(q)
}

fn check_divides(m: u128, t: u128, what: &str) -> Result<()> {
    if m == 0 || t % m != 0 {
        Err(Error::Precondition(format!("{m} does not divide {what} = {t}")))
    } else {
        Ok(())
    }
}

/// The lower bound `theta(m) q^((n-1)/2) {q^((n-1)/2) - 4W(m) + 2W(m_Q) + 1}`
/// on `N_beta(m)` for `beta != 0`.
pub fn thm_h_bound(dec: &QnDecomposition, m: u128) -> Result<Surd> {
    require_even(dec)?;
    if m % 2 == 1 {
        return Err(Error::Domain("m must be even".into()));
    }
    check_divides(m, dec.order.value, "q^n - 1")?;
    let f = numtheory::factorize(m)?;
    let m_q = f.radical_part_dividing(dec.big_q.value);
    let bracket = Surd::pow_half(dec.q, dec.n - 1) - int(4 * f.w()) + int(2 * w_of(m_q)? + 1);
    Ok(Surd::pow_half(dec.q, dec.n - 1).scale(&numtheory::theta(m)?) * bracket)
}

pub fn thm_h_check(dec: &QnDecomposition, m: u128) -> Result<CriterionReport> {
    let bound = thm_h_bound(dec, m)?;
    let f = numtheory::factorize(m)?;
    let w_mq = w_of(f.radical_part_dividing(dec.big_q.value))?;
    let lhs = Surd::pow_half(dec.q, dec.n - 1) + int(2 * w_mq + 1);
    let rhs = int(4 * f.w());
    Ineq::new(CriterionId::H, BetaClass::Nonzero)
        .note("m", m)
        .note("W(m)", f.w())
        .note("W(m_Q)", w_mq)
        .note("bound", &bound)
        .decide(dec.q, dec.n, lhs, rhs)
}

/// The lower bound `theta(m) q^(n/2 - 1) {q^(n/2) - 2W(m)(q - 1)}` on `N_0(m)`, `m | Q`.
pub fn thm_n_bound(dec: &QnDecomposition, m: u128) -> Result<Surd> {
    require_even(dec)?;
    if dec.n < 3 {
        return Err(Error::Domain("the trace-zero bound needs n >= 3".into()));
    }
    check_divides(m, dec.big_q.value, "Q")?;
    let bracket = Surd::pow_half(dec.q, dec.n) - int(2 * w_of(m)? * (dec.q - 1));
    Ok(Surd::pow_half(dec.q, dec.n - 2).scale(&numtheory::theta(m)?) * bracket)
}

/// `q^(n/2) > 2W(Q)(q - 1)` for `beta = 0`.
pub fn thm_n_check(dec: &QnDecomposition) -> Result<CriterionReport> {
    let m = dec.big_q.radical();
    let bound = thm_n_bound(dec, m)?;
    let w = dec.big_q.w();
    Ineq::new(CriterionId::N, BetaClass::Zero)
        .note("W(Q)", w)
        .note("bound", &bound)
        .decide(dec.q, dec.n, Surd::pow_half(dec.q, dec.n), int(2 * w * (dec.q - 1)))
}

/// Sieve over `radical(q^n - 1)` with sub-data over `Q`. The prime 2 stays in `k`.
pub fn sieve_for_order(dec: &QnDecomposition, primes: &[u128]) -> Result<SieveSet> {
    if primes.contains(&2) {
        return Err(Error::Precondition("2 cannot be sieved: k must stay even".into()));
    }
    let pool: Vec<u128> = dec.order.primes().collect();
    SieveSet::new(&pool, primes, dec.big_q.value)
}

/// Sieve over the radical of `Q`.
pub fn sieve_for_q(dec: &QnDecomposition, primes: &[u128]) -> Result<SieveSet> {
    let pool: Vec<u128> = dec.big_q.primes().collect();
    SieveSet::new(&pool, primes, 1)
}

/// Sieve over `q_2'` with sub-data over `q + 1`.
pub fn sieve_for_n2(dec: &QnDecomposition, primes: &[u128]) -> Result<SieveSet> {
    SieveSet::new(&dec.odd_primes(), primes, dec.q + 1)
}

/// Sieved bound on `N_beta(q^n - 1)` for `beta != 0`.
pub fn thm_t_bound(dec: &QnDecomposition, primes: &[u128]) -> Result<Surd> {
    require_even(dec)?;
    let s = sieve_for_order(dec, primes)?;
    s.require_positive()?;
    let half = Surd::pow_half(dec.q, dec.n - 1);
    let bracket = half.clone() - Surd::rational(s.main_factor() * ratu(4 * s.w_k))
        + Surd::rational(s.sub_factor() * ratu(2 * s.w_k_sub));
    let c = &s.delta * numtheory::theta(s.k)?;
    Ok(half.scale(&c) * bracket)
}

pub fn thm_t_check(dec: &QnDecomposition, primes: &[u128]) -> Result<CriterionReport> {
    require_even(dec)?;
    let s = sieve_for_order(dec, primes)?;
    s.require_positive()?;
    let bound = thm_t_bound(dec, primes)?;
    let rhs = s.main_factor() * ratu(4 * s.w_k) - s.sub_factor() * ratu(2 * s.w_k_sub);
    Ineq::new(CriterionId::T, BetaClass::Nonzero)
        .note("bound", &bound)
        .with_sieve(s)
        .decide(dec.q, dec.n, Surd::pow_half(dec.q, dec.n - 1), Surd::rational(rhs))
}

/// Sieved bound on `N_0(Q)`.
pub fn thm_z_bound(dec: &QnDecomposition, primes: &[u128]) -> Result<Surd> {
    require_even(dec)?;
    if dec.n < 3 {
        return Err(Error::Domain("the trace-zero sieve needs n >= 3".into()));
    }
    let s = sieve_for_q(dec, primes)?;
    s.require_positive()?;
    let bracket = Surd::pow_half(dec.q, dec.n - 2) - Surd::rational(s.main_factor() * ratu(2 * s.w_k));
    let c = &s.delta * numtheory::theta(s.k)?;
    Ok(Surd::pow_half(dec.q, dec.n).scale(&c) * bracket)
}

pub fn thm_z_check(dec: &QnDecomposition, primes: &[u128]) -> Result<CriterionReport> {
    let bound = thm_z_bound(dec, primes)?;
    let s = sieve_for_q(dec, primes)?;
    let rhs = s.main_factor() * ratu(2 * s.w_k);
    Ineq::new(CriterionId::Z, BetaClass::Zero)
        .note("bound", &bound)
        .with_sieve(s)
        .decide(dec.q, dec.n, Surd::pow_half(dec.q, dec.n - 2), Surd::rational(rhs))
}

fn require_e1g1(dec: &QnDecomposition) -> Result<()> {
    if dec.q % 4 != 1 {
        return Err(Error::Domain("the refined criteria need q = 1 (mod 4)".into()));
    }
    if dec.n % 2 == 0 {
        return Err(Error::Domain("the refined criteria need n odd".into()));
    }
    Ok(())
}

/// Refined sieve criterion for `beta != 0`, `q = 1 (mod 4)`, `n` odd.
pub fn e1_check(dec: &QnDecomposition, primes: &[u128]) -> Result<CriterionReport> {
    require_e1g1(dec)?;
    let s = sieve_for_order(dec, primes)?;
    s.require_positive()?;
    let c = s.main_factor() * ratu(2 * s.w_k) - s.sub_factor() * ratu(s.w_k_sub);
    Ineq::new(CriterionId::E1, BetaClass::Nonzero)
        .with_sieve(s)
        .decide(dec.q, dec.n, Surd::pow_half(dec.q, dec.n - 1), Surd::term(c, 2))
}

/// Refined sieve criterion for `beta = 0`, `q = 1 (mod 4)`, `n` odd.
pub fn g1_check(dec: &QnDecomposition, primes: &[u128]) -> Result<CriterionReport> {
    require_e1g1(dec)?;
    let s = sieve_for_q(dec, primes)?;
    s.require_positive()?;
    let c = s.main_factor() * ratu(s.w_k);
    Ineq::new(CriterionId::G1, BetaClass::Zero)
        .with_sieve(s)
        .decide(dec.q, dec.n, Surd::pow_half(dec.q, dec.n - 2), Surd::term(c, 2))
}

/// `q^(1/2) > 2 sqrt(2) W(q^3 - 1)`, which implies both refined criteria unsieved.
pub fn n3_simple_check(dec: &QnDecomposition) -> Result<CriterionReport> {
    require_e1g1(dec)?;
    if dec.n != 3 {
        return Err(Error::Domain("this filter is for n = 3".into()));
    }
    let w = dec.order.w();
    Ineq::new(CriterionId::N3, BetaClass::Any)
        .note("W(q0)", w)
        .decide(dec.q, dec.n, Surd::sqrt(dec.q), Surd::term(ratu(2 * w), 2))
}

fn n2_rhs(q: u128, w_main: BigRational, w_sub: BigRational) -> Surd {
    // q = 1 (mod 4) halves the correction term.
    let sub = if q % 4 == 1 { w_sub / ratu(2) } else { w_sub };
    let root = Surd::sqrt(q);
    (root.scale(&w_main) - (root - int(1)).scale(&sub)).scale(&ratu(4))
}

fn require_n2(dec: &QnDecomposition) -> Result<()> {
    if dec.n != 2 {
        return Err(Error::Domain("this criterion is for n = 2".into()));
    }
    Ok(())
}

/// Unsieved `n = 2` criterion for `beta != 0`. `r` defaults to `q_2'`.
pub fn prop_n2_check(dec: &QnDecomposition, r: Option<u128>) -> Result<CriterionReport> {
    require_n2(dec)?;
    let q2 = dec.odd_radical();
    let r = r.unwrap_or(q2);
    check_divides(r, q2, "q_2'")?;
    let pool = numtheory::factorize(r)?;
    let r1 = pool.radical_part_dividing(dec.q + 1);
    let (w_r, w_r1) = (pool.w(), w_of(r1)?);
    let lhs = int(dec.q + 1);
    let rhs = n2_rhs(dec.q, ratu(w_r), ratu(w_r1));
    Ineq::new(CriterionId::N2, BetaClass::Nonzero)
        .note("r", r)
        .note("W(r)", w_r)
        .note("W(r1)", w_r1)
        .decide(dec.q, dec.n, lhs, rhs)
}

/// Lower bound on `4 Q_r / theta(r)` from the unsieved `n = 2` estimate.
pub fn prop_n2_bound(dec: &QnDecomposition, r: u128) -> Result<Surd> {
    require_n2(dec)?;
    check_divides(r, dec.odd_radical(), "q_2'")?;
    let f = numtheory::factorize(r)?;
    let w_r1 = w_of(f.radical_part_dividing(dec.q + 1))?;
    Ok(int(dec.q + 1) - n2_rhs(dec.q, ratu(f.w()), ratu(w_r1)))
}

/// Sieved `n = 2` criterion for `beta != 0`.
pub fn siev4_check(dec: &QnDecomposition, primes: &[u128]) -> Result<CriterionReport> {
    require_n2(dec)?;
    let s = sieve_for_n2(dec, primes)?;
    s.require_positive()?;
    let lhs = int(dec.q + 1);
    let rhs = n2_rhs(dec.q, s.main_factor() * ratu(s.w_k), s.sub_factor() * ratu(s.w_k_sub));
    Ineq::new(CriterionId::Siev4, BetaClass::Nonzero)
        .with_sieve(s)
        .decide(dec.q, dec.n, lhs, rhs)
}

/// Dispatch for the sieved criteria.
pub fn sieved_check(dec: &QnDecomposition, id: CriterionId, primes: &[u128]) -> Result<CriterionReport> {
    match id {
        CriterionId::T => thm_t_check(dec, primes),
        CriterionId::Z => thm_z_check(dec, primes),
        CriterionId::E1 => e1_check(dec, primes),
        CriterionId::G1 => g1_check(dec, primes),
        CriterionId::Siev4 => siev4_check(dec, primes),
        other => Err(Error::Domain(format!("{other} does not take a sieve"))),
    }
}

/// Primes eligible for sieving, largest first.
fn sieve_pool(dec: &QnDecomposition, id: CriterionId) -> Vec<u128> {
    let mut pool: Vec<u128> = match id {
        CriterionId::Z | CriterionId::G1 => dec.big_q.primes().collect(),
        _ => dec.odd_primes(),
    };
    pool.reverse();
    pool
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyResult {
    /// The check with an empty sieve.
    pub unsieved: CriterionReport,
    /// The first proving report, or the last one tried.
    pub report: CriterionReport,
    /// Number of sieve sets evaluated, the empty one included.
    pub tried: usize,
}

/// Grow the sieve from the largest prime down until a set proves the
/// criterion, the primes run out or the sieve constant would drop to zero.
pub fn greedy_sieve(dec: &QnDecomposition, id: CriterionId) -> Result<GreedyResult> {
    if !id.is_sieved() {
        return Err(Error::Domain(format!("{id} does not take a sieve")));
    }
    let unsieved = sieved_check(dec, id, &[])?;
    let mut report = unsieved.clone();
    let mut tried = 1;
    if report.proved() {
        return Ok(GreedyResult { unsieved, report, tried });
    }
    let pool = sieve_pool(dec, id);
    let mut delta = BigRational::one();
    for i in 0..pool.len() {
        delta -= BigRational::new(1.into(), pool[i].into());
        if !delta.is_positive() {
            break;
        }
        report = sieved_check(dec, id, &pool[..=i])?;
        tried += 1;
        if report.proved() {
            break;
        }
    }
    Ok(GreedyResult { unsieved, report, tried })
}

/// How many primes the `t`-range procedure sieves in Step 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SieveCount {
    /// The largest admissible `s`.
    Max,
    /// One less than the largest admissible `s`.
    OneLess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TRangeOutcome {
    pub n: u32,
    pub t1: u32,
    pub t2: u32,
    pub s: u32,
    #[serde(with = "ratstr")]
    pub delta: BigRational,
    #[serde(with = "ratstr")]
    pub q1: BigRational,
    pub q1_approx: f64,
    pub c: u32,
    pub success: bool,
}

fn prime_rat(i: u32) -> BigRational {
    BigRational::new(1.into(), nth_prime(i as usize).into())
}

/// The four-step search ruling out all `q` whose relevant radical has
/// between `t1` and `t2` prime factors (`n = 3` or `n = 2`).
pub fn t_range_algorithm(n: u32, t1: u32, t2: u32, mode: SieveCount) -> Result<TRangeOutcome> {
    if t1 > t2 {
        return Err(Error::Precondition(format!("t1 = {t1} exceeds t2 = {t2}")));
    }
    let c2: u32 = match n {
        3 => 8,
        2 => 4,
        _ => return Err(Error::Domain("the t-range search is for n = 2 or 3".into())),
    };
    let delta_for = |s: u32| (0..s).fold(BigRational::one(), |acc, i| acc - prime_rat(t1 - i));
    let mut s = (0..=t1).rev().find(|&s| delta_for(s).is_positive()).unwrap_or(0);
    if mode == SieveCount::OneLess {
        s = s.saturating_sub(1);
    }
    let delta = delta_for(s);
    let factor = rat(s as i64 - 1, 1) / &delta + rat(2, 1);
    let base = factor * BigRational::from_integer(BigInt::from(2u32).pow(t2 - s));
    let q1 = ratu(c2 as u128) * &base * &base;
    let limit: BigRational = Pow::pow(&q1, n) - BigRational::one();
    let mut c = 0u32;
    let mut product = BigRational::one();
    loop {
        let next = &product * ratu(nth_prime(c as usize + 1) as u128);
        if next > limit {
            break;
        }
        product = next;
        c += 1;
    }
    let q1_approx = Interval::from_rational(&q1).mid();
    Ok(TRangeOutcome { n, t1, t2, s, delta, q1, q1_approx, c, success: c <= t1 })
}

/// Per-class result of the criterion dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassOutcome {
    Proved(CriterionId),
    Inconclusive,
    /// No 2-primitive element can have this trace, so the class is not a target.
    NotRequired,
}

impl ClassOutcome {
    pub fn settled(self) -> bool {
        !matches!(self, ClassOutcome::Inconclusive)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub class: PairClass,
    /// `q^n - 1`, when the dispatch had to factor it.
    pub order: Option<numtheory::Factorization>,
    pub zero: ClassOutcome,
    pub nonzero: ClassOutcome,
    pub trail: Vec<CriterionReport>,
}

impl Decision {
    pub fn settled(&self) -> bool {
        self.zero.settled() && self.nonzero.settled()
    }
}

fn record_greedy(trail: &mut Vec<CriterionReport>, slot: &mut ClassOutcome, g: GreedyResult) {
    let more = g.tried > 1;
    record(trail, slot, g.unsieved);
    if more {
        record(trail, slot, g.report);
    }
}

fn record(trail: &mut Vec<CriterionReport>, slot: &mut ClassOutcome, r: CriterionReport) {
    if r.proved() && *slot == ClassOutcome::Inconclusive {
        *slot = ClassOutcome::Proved(r.criterion);
    }
    trail.push(r);
}

/// Run the criteria in their canonical order until both trace classes are settled.
pub fn decide(q: u128, n: u32) -> Result<Decision> {
    let class = classify_pair(q, n)?;
    let mut trail = Vec::new();
    if class.parity == Parity::Odd {
        trail.push(odd_pair_report(q, n)?);
        return Ok(Decision {
            class,
            order: None,
            zero: ClassOutcome::Proved(CriterionId::OddPair),
            nonzero: ClassOutcome::Proved(CriterionId::OddPair),
            trail,
        });
    }
    if let Some(red) = class.reduction {
        let sub = decide(red.q, red.n)?;
        trail.extend(sub.trail);
        let proved = matches!(sub.nonzero, ClassOutcome::Proved(_));
        let outcome = if proved { ClassOutcome::Proved(CriterionId::Reduction) } else { ClassOutcome::Inconclusive };
        return Ok(Decision { class, order: None, zero: outcome, nonzero: outcome, trail });
    }
    if n > 4 {
        let r = generic_report(q, n)?;
        if r.proved() {
            trail.push(r);
            return Ok(Decision {
                class,
                order: None,
                zero: ClassOutcome::Proved(CriterionId::Generic),
                nonzero: ClassOutcome::Proved(CriterionId::Generic),
                trail,
            });
        }
        trail.push(r);
    }
    let dec = numtheory::decompose(q, n)?;
    let mut zero = ClassOutcome::Inconclusive;
    let mut nonzero = ClassOutcome::Inconclusive;
    match n {
        2 => {
            zero = ClassOutcome::NotRequired;
            let r = prop_n2_check(&dec, None)?;
            let proved = r.proved();
            record(&mut trail, &mut nonzero, r);
            if !proved {
                let g = greedy_sieve(&dec, CriterionId::Siev4)?;
                if g.tried > 1 {
                    record(&mut trail, &mut nonzero, g.report);
                }
            }
        }
        3 => {
            let r = n3_simple_check(&dec)?;
            if r.proved() {
                zero = ClassOutcome::Proved(CriterionId::N3);
                nonzero = zero;
                trail.push(r);
            } else {
                trail.push(r);
                record_greedy(&mut trail, &mut nonzero, greedy_sieve(&dec, CriterionId::E1)?);
                record_greedy(&mut trail, &mut zero, greedy_sieve(&dec, CriterionId::G1)?);
            }
        }
        _ => {
            let r = dt_report(&dec)?;
            if r.proved() {
                trail.push(r);
                return Ok(Decision {
                    class,
                    order: Some(dec.order),
                    zero: ClassOutcome::Proved(CriterionId::Dt),
                    nonzero: ClassOutcome::Proved(CriterionId::Dt),
                    trail,
                });
            }
            trail.push(r);
            record(&mut trail, &mut nonzero, thm_h_check(&dec, dec.q0)?);
            record(&mut trail, &mut zero, thm_n_check(&dec)?);
        }
    }
    Ok(Decision { class, order: Some(dec.order), zero, nonzero, trail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::decompose;

    fn dec(q: u128, n: u32) -> QnDecomposition {
        decompose(q, n).unwrap()
    }

    #[test]
    fn pair_classes() {
        assert_eq!(classify_pair(3, 3).unwrap().parity, Parity::Odd);
        assert_eq!(classify_pair(5, 3).unwrap().parity, Parity::Even);
        let c = classify_pair(3, 4).unwrap();
        assert_eq!(c.parity, Parity::Even);
        assert_eq!(c.reduction, Some(Reduction { l: 2, q: 9, n: 2 }));
        assert_eq!(classify_pair(5, 9).unwrap().reduction, Some(Reduction { l: 3, q: 125, n: 3 }));
        assert!(matches!(classify_pair(4, 3), Err(Error::Domain(_))));
        assert!(matches!(classify_pair(5, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn prescribed_trace_examples() {
        assert!(prescribed_trace_check(3, 13, 1));
        assert!(!prescribed_trace_check(3, 12, 1));
        assert!(!prescribed_trace_check(3, 5, 2));
        assert!(prescribed_trace_check(1_000_003, 5, 2));
        assert!(!prescribed_trace_check(1_000_003, 4, 2));
    }

    #[test]
    fn table_one_thresholds() {
        let want = [(5, 73259), (7, 419), (11, 25), (13, 13), (17, 7), (19, 5), (23, 4)];
        for (n, t) in want {
            assert_eq!(generic_threshold(n).unwrap(), t, "n = {n}");
        }
        for n in 27..40 {
            assert!(n4_simple_check(3, n, N4Mode::Generic).unwrap());
        }
    }

    #[test]
    fn n5_bounds_settle_survivors() {
        for q in [5, 9, 13, 25, 37] {
            let d = dec(q, 5);
            assert!(!dt_report(&d).unwrap().proved());
            assert!(thm_h_check(&d, d.q0).unwrap().proved(), "H for {q}");
            assert!(thm_n_check(&d).unwrap().proved(), "N for {q}");
        }
        assert!(dt_report(&dec(41, 5)).unwrap().proved());
    }

    #[test]
    fn thm_n_small() {
        let r = thm_n_check(&dec(5, 3)).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.quantities["W(Q)"], "2");
        assert!(matches!(thm_n_check(&dec(5, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn h_requires_even_m() {
        let d = dec(5, 2);
        assert!(matches!(thm_h_bound(&d, 3), Err(Error::Domain(_))));
        assert!(matches!(thm_h_bound(&d, 10), Err(Error::Precondition(_))));
        assert!(thm_h_bound(&d, 2).is_ok());
    }

    #[test]
    fn listed_sieve_sets_prove() {
        assert!(e1_check(&dec(29, 3), &[67, 13, 7]).unwrap().proved());
        assert!(e1_check(&dec(61, 3), &[97, 13, 5]).unwrap().proved());
        assert!(e1_check(&dec(121, 3), &[37, 19, 7]).unwrap().proved());
        let table2: [(u128, &[u128]); 8] = [
            (29, &[67, 13]),
            (61, &[97, 13, 3]),
            (81, &[73, 13]),
            (109, &[571, 7]),
            (277, &[193, 19, 7]),
            (289, &[307, 13, 7]),
            (373, &[73, 13]),
            (1369, &[67, 43]),
        ];
        for (q, set) in table2 {
            assert!(g1_check(&dec(q, 3), set).unwrap().proved(), "G1 for {q}");
        }
        // The unrefined trace-zero sieve is too weak for these rows.
        assert!(!thm_z_check(&dec(81, 3), &[73, 13]).unwrap().proved());
        assert!(!thm_z_check(&dec(1369, 3), &[67, 43]).unwrap().proved());
    }

    #[test]
    fn sieve_preconditions() {
        let d = dec(29, 3);
        assert!(matches!(thm_t_check(&d, &[2]), Err(Error::Precondition(_))));
        assert!(matches!(thm_t_check(&d, &[11]), Err(Error::Precondition(_))));
        assert!(matches!(thm_t_check(&d, &[7, 7]), Err(Error::Precondition(_))));
        let small = [3u128, 5, 7, 11, 13, 17, 19, 23, 29, 31];
        let s = SieveSet::new(&small, &small, 1).unwrap();
        assert!(matches!(s.require_positive(), Err(Error::Precondition(_))));
        assert!(matches!(e1_check(&dec(7, 3), &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn sieve_set_invariants() {
        let d = dec(29, 3);
        let s = sieve_for_order(&d, &[67, 13]).unwrap();
        assert_eq!(s.k * 67 * 13, d.q0);
        assert_eq!(s.delta, rat(1, 1) - rat(1, 67) - rat(1, 13));
        assert_eq!(s.r, 2);
        assert_eq!(s.k, 14);
        assert_eq!(s.k_sub, 1);
        let json = serde_json::to_string(&s).unwrap();
        let back: SieveSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn empty_sieve_degenerates() {
        for q in [5u128, 13, 29, 41, 101] {
            let d = dec(q, 2);
            let a = prop_n2_check(&d, None).unwrap();
            let b = siev4_check(&d, &[]).unwrap();
            assert_eq!(a.lhs, b.lhs);
            assert_eq!(a.rhs, b.rhs);
            assert_eq!(a.verdict, b.verdict);
        }
        for (q, n) in [(5u128, 3u32), (13, 3), (9, 5)] {
            let d = dec(q, n);
            let t = thm_t_bound(&d, &[]).unwrap();
            let h = thm_h_bound(&d, d.q0).unwrap();
            // The sieved bound drops the +1 of the unsieved one.
            let diff = h - t;
            assert_ne!(diff.sign().unwrap(), Ordering::Less);
        }
    }

    #[test]
    fn greedy_examples() {
        let g = greedy_sieve(&dec(29, 3), CriterionId::G1).unwrap();
        assert!(g.report.proved());
        assert_eq!(g.report.sieve.unwrap().primes, vec![67, 13]);
        let g = greedy_sieve(&dec(277, 3), CriterionId::G1).unwrap();
        assert_eq!(g.report.sieve.unwrap().primes, vec![193, 19, 7]);
        let g = greedy_sieve(&dec(29, 3), CriterionId::E1).unwrap();
        assert_eq!(g.report.sieve.unwrap().primes, vec![67, 13, 7]);
        for q in [5u128, 9, 13, 25] {
            assert!(!greedy_sieve(&dec(q, 3), CriterionId::E1).unwrap().report.proved());
        }
        assert!(matches!(greedy_sieve(&dec(29, 3), CriterionId::H), Err(Error::Domain(_))));
    }

    #[test]
    fn n2_examples() {
        assert!(!prop_n2_check(&dec(1_044_889, 2), None).unwrap().proved());
        let g = greedy_sieve(&dec(3541, 2), CriterionId::Siev4).unwrap();
        assert!(!g.report.proved());
        assert!(g.tried > 1);
        assert!(prop_n2_check(&dec(1_000_003, 2), None).unwrap().proved());
    }

    #[test]
    fn t_range_examples() {
        for (t1, t2) in [(35, 53), (29, 34), (24, 28), (21, 23), (19, 20), (18, 18), (17, 17)] {
            assert!(t_range_algorithm(3, t1, t2, SieveCount::Max).unwrap().success, "({t1},{t2})");
        }
        for t in 8..=13 {
            assert!(!t_range_algorithm(3, t, t, SieveCount::Max).unwrap().success, "t = {t}");
        }
        assert!(t_range_algorithm(3, 16, 16, SieveCount::OneLess).unwrap().success);
        let worst = (8..=15)
            .map(|t| t_range_algorithm(3, t, t, SieveCount::OneLess).unwrap().q1_approx)
            .fold(0.0, f64::max);
        assert!((worst - 511_094.73).abs() < 0.01, "{worst}");
        let a = t_range_algorithm(2, 11, 13, SieveCount::Max).unwrap();
        assert!(a.success);
        assert_eq!(a.c, 11);
        assert!(t_range_algorithm(2, 10, 10, SieveCount::Max).unwrap().success);
        assert!(matches!(t_range_algorithm(3, 5, 4, SieveCount::Max), Err(Error::Precondition(_))));
        assert!(matches!(t_range_algorithm(5, 4, 4, SieveCount::Max), Err(Error::Domain(_))));
    }

    #[test]
    fn dispatch() {
        let d = decide(3, 3).unwrap();
        assert_eq!(d.nonzero, ClassOutcome::Proved(CriterionId::OddPair));
        let d = decide(5, 3).unwrap();
        assert!(!d.settled());
        let d = decide(29, 3).unwrap();
        assert!(d.settled());
        let d = decide(5, 2).unwrap();
        assert_eq!(d.zero, ClassOutcome::NotRequired);
        assert_eq!(d.nonzero, ClassOutcome::Inconclusive);
        assert!(decide(101, 7).unwrap().settled());
        let d = decide(5, 5).unwrap();
        assert_eq!(d.nonzero, ClassOutcome::Proved(CriterionId::H));
        let d = decide(78_125, 5).unwrap();
        assert_eq!(d.zero, ClassOutcome::Proved(CriterionId::Generic));
        let json = serde_json::to_string(&d).unwrap();
        let back: Decision = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
