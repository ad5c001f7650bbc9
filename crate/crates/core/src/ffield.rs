//! Finite fields `F_{p^k}` in polynomial basis, and extensions `F_{q^n} / F_q`.
//!
//! Elements are coefficient vectors (ascending degree) over `F_p`. The index of
//! an element is `sum c_j p^j`; "first" and "least" always refer to ascending
//! index. The canonical modulus is the least monic irreducible polynomial when
//! coefficient vectors are compared starting from the constant term.
//!
//! Element labels depend on the modulus; sets such as "the traces attained by
//! 2-primitive elements" are representation independent up to the labelling.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numtheory::{self, factorize, is_prime, Factorization};

/// Largest field order accepted by [`build_field`].
pub const FIELD_LIMIT: u128 = 1 << 40;

/// Discrete-log tables (and everything built on them) exist only up to this order.
pub const LOG_TABLE_LIMIT: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FFElem {
    pub coeffs: Vec<u64>,
}

impl fmt::Display for FFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for FFElem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(FFElem { coeffs })
    }
}

// ---------------------------------------------------------------------------
// Polynomials over F_p, dense, ascending degree.

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    numtheory::pow_mod(a as u128, (p - 2) as u128, p as u128) as u64
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Remainder of `a` modulo the monic polynomial `f`.
fn poly_rem(mut a: Vec<u64>, f: &[u64], p: u64) -> Vec<u64> {
    let df = f.len() - 1;
    while a.len() > df {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let off = a.len() - df;
            for (j, &c) in f[..df].iter().enumerate() {
                let t = mulm(lead, c, p);
                a[off + j] = (a[off + j] + p - t) % p;
            }
        }
    }
    a
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] += x as u128 * y as u128;
            if acc[i + j] >= 1 << 126 {
                acc[i + j] %= p as u128;
            }
        }
    }
    acc.into_iter().map(|v| (v % p as u128) as u64).collect()
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    poly_rem(poly_mul(a, b, p), f, p)
}

fn poly_powmod(base: &[u64], mut e: u128, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base.to_vec(), f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, f, p);
        }
        e >>= 1;
        if e > 0 {
            b = poly_mulmod(&b, &b, f, p);
        }
    }
    poly_rem(acc, f, p)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let lead_inv = inv_mod(*b.last().unwrap(), p);
        let monic: Vec<u64> = b.iter().map(|&c| mulm(c, lead_inv, p)).collect();
        let r = trim(poly_rem(a, &monic, p));
        a = monic;
        b = r;
    }
    a
}

/// Rabin's test for a monic polynomial of degree `k`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = (f.len() - 1) as u32;
    if k == 1 {
        return true;
    }
    let x = vec![0, 1];
    // x^{p^j} mod f for j = 0..=k
    let mut frob = vec![poly_rem(x.clone(), f, p)];
    for _ in 0..k {
        let next = poly_powmod(frob.last().unwrap(), p as u128, f, p);
        frob.push(next);
    }
    if trim(poly_sub(&frob[k as usize], &x, p)).len() > 0 {
        return false;
    }
    let kf = factorize(k as u128).expect("k >= 1");
    for r in kf.primes() {
        let j = (k as u128 / r) as usize;
        let h = poly_sub(&frob[j], &x, p);
        if poly_gcd(f, &h, p).len() != 1 {
            return false;
        }
    }
    true
}

/// The canonical modulus of degree `k` over `F_p`.
fn canonical_modulus(p: u64, k: u32) -> Vec<u64> {
    if k == 1 {
        return vec![0, 1];
    }
    let k = k as usize;
    // Counter over (c_0, ..., c_{k-1}) with c_0 most significant.
    let mut c = vec![0u64; k];
    loop {
        let mut f = c.clone();
        f.push(1);
        if c[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
        let mut i = k;
        loop {
            i -= 1;
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
            assert!(i > 0, "an irreducible polynomial of every degree exists");
        }
    }
}

// ---------------------------------------------------------------------------

/// Discrete logarithms with respect to the generator.
#[derive(Debug)]
pub struct LogTables {
    /// `exp[e]` is the index of `g^e`, for `0 <= e < size - 1`.
    pub exp: Vec<u32>,
    /// `log[idx]` is the exponent of the element with index `idx`; `log[0]` is unused.
    pub log: Vec<u32>,
}

/// A constructed field `F_{p^k}`. Immutable after construction.
#[derive(Debug)]
pub struct FieldCtx {
    p: u64,
    k: u32,
    size: u64,
    modulus: Vec<u64>,
    generator: FFElem,
    group: Factorization,
    logs: OnceLock<LogTables>,
}

fn check_characteristic(p: u64, k: u32) -> Result<()> {
    if p == 2 {
        return domain("2-primitive elements exist only in odd characteristic");
    }
    if !is_prime(p as u128) {
        return domain(format!("{p} is not prime"));
    }
    if k == 0 {
        return domain("extension degree must be positive");
    }
    match (p as u128).checked_pow(k) {
        Some(s) if s <= FIELD_LIMIT => Ok(()),
        _ => Err(Error::Capability(format!("{p}^{k} exceeds the field size limit 2^40"))),
    }
}

/// `F_{p^k}` with the canonical modulus and least primitive generator.
pub fn build_field(p: u64, k: u32) -> Result<FieldCtx> {
    check_characteristic(p, k)?;
    FieldCtx::from_modulus(p, canonical_modulus(p, k))
}

impl FieldCtx {
    /// A field over a caller-chosen monic irreducible modulus (ascending coefficients).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<FieldCtx> {
        if modulus.len() < 2 || modulus.last() != Some(&1) {
            return domain("modulus must be monic of degree at least 1");
        }
        check_characteristic(p, (modulus.len() - 1) as u32)?;
        if modulus.iter().any(|&c| c >= p) {
            return domain("modulus coefficients must lie in [0, p)");
        }
        if !is_irreducible(&modulus, p) {
            return domain("modulus is reducible");
        }
        FieldCtx::from_modulus(p, modulus)
    }

    fn from_modulus(p: u64, modulus: Vec<u64>) -> Result<FieldCtx> {
        let k = (modulus.len() - 1) as u32;
        let size = p.pow(k);
        let group = factorize(size as u128 - 1)?;
        let mut ctx = FieldCtx {
            p,
            k,
            size,
            modulus,
            generator: FFElem { coeffs: vec![0; k as usize] },
            group,
            logs: OnceLock::new(),
        };
        let g = (1..size)
            .map(|i| ctx.from_index(i))
            .find(|x| ctx.is_primitive(x))
            .expect("the multiplicative group is cyclic");
        ctx.generator = g;
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    /// `p^k`.
    pub fn size(&self) -> u64 {
        self.size
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn generator(&self) -> &FFElem {
        &self.generator
    }
    /// Factorization of `p^k - 1`.
    pub fn group_order(&self) -> &Factorization {
        &self.group
    }

    pub fn zero(&self) -> FFElem {
        FFElem { coeffs: vec![0; self.k as usize] }
    }

    pub fn one(&self) -> FFElem {
        self.constant(1)
    }

    pub fn constant(&self, c: u64) -> FFElem {
        let mut z = self.zero();
        z.coeffs[0] = c % self.p;
        z
    }

    pub fn from_index(&self, mut idx: u64) -> FFElem {
        let mut coeffs = vec![0; self.k as usize];
        for c in coeffs.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        FFElem { coeffs }
    }

    pub fn index(&self, x: &FFElem) -> u64 {
        index_of(&x.coeffs, self.p)
    }

    /// Validates an element read from outside.
    pub fn elem(&self, coeffs: Vec<u64>) -> Result<FFElem> {
        if coeffs.len() != self.k as usize || coeffs.iter().any(|&c| c >= self.p) {
            return domain(format!("not an element of F_{{{}^{}}}: {coeffs:?}", self.p, self.k));
        }
        Ok(FFElem { coeffs })
    }

    pub fn parse(&self, s: &str) -> Result<FFElem> {
        let mut e: FFElem = s.parse()?;
        if e.coeffs.len() < self.k as usize {
            e.coeffs.resize(self.k as usize, 0);
        }
        self.elem(e.coeffs)
    }

    pub fn elements(&self) -> impl Iterator<Item = FFElem> + '_ {
        (0..self.size).map(|i| self.from_index(i))
    }

    pub fn is_zero(&self, x: &FFElem) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FFElem, b: &FFElem) -> FFElem {
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| (x + y) % self.p).collect();
        FFElem { coeffs }
    }

    pub fn sub(&self, a: &FFElem, b: &FFElem) -> FFElem {
        let coeffs =
            a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| (x + self.p - y) % self.p).collect();
        FFElem { coeffs }
    }

    pub fn neg(&self, a: &FFElem) -> FFElem {
        self.sub(&self.zero(), a)
    }

    pub fn scalar(&self, c: u64, a: &FFElem) -> FFElem {
        FFElem { coeffs: a.coeffs.iter().map(|&x| mulm(x, c % self.p, self.p)).collect() }
    }

    fn pad(&self, mut v: Vec<u64>) -> FFElem {
        v.resize(self.k as usize, 0);
        FFElem { coeffs: v }
    }

    pub fn mul(&self, a: &FFElem, b: &FFElem) -> FFElem {
        if self.k == 1 {
            return FFElem { coeffs: vec![mulm(a.coeffs[0], b.coeffs[0], self.p)] };
        }
        self.pad(poly_mulmod(&a.coeffs, &b.coeffs, &self.modulus, self.p))
    }

    /// `acc <- acc * b`, reusing `scratch` across calls.
    pub fn mul_assign(&self, acc: &mut [u64], b: &[u64], scratch: &mut Vec<u128>) {
        let p = self.p;
        let k = self.k as usize;
        if k == 1 {
            acc[0] = mulm(acc[0], b[0], p);
            return;
        }
        scratch.clear();
        scratch.resize(2 * k - 1, 0);
        for i in 0..k {
            if acc[i] == 0 {
                continue;
            }
            for j in 0..k {
                scratch[i + j] += acc[i] as u128 * b[j] as u128;
            }
        }
        let pp = p as u128;
        for t in (k..2 * k - 1).rev() {
            let lead = (scratch[t] % pp) as u64;
            if lead == 0 {
                continue;
            }
            let off = t - k;
            for j in 0..k {
                let c = self.modulus[j];
                if c != 0 {
                    // subtract lead * c, kept nonnegative by adding a multiple of p
                    scratch[off + j] += (p - mulm(lead, c, p)) as u128;
                }
            }
        }
        for i in 0..k {
            acc[i] = (scratch[i] % pp) as u64;
        }
    }

    pub fn pow(&self, a: &FFElem, e: u128) -> FFElem {
        if self.k == 1 {
            return FFElem {
                coeffs: vec![numtheory::pow_mod(a.coeffs[0] as u128, e, self.p as u128) as u64],
            };
        }
        let mut acc = self.one();
        let mut b = a.clone();
        let mut e = e;
        let mut scratch = Vec::new();
        while e > 0 {
            if e & 1 == 1 {
                self.mul_assign(&mut acc.coeffs, &b.coeffs, &mut scratch);
            }
            e >>= 1;
            if e > 0 {
                let bb = b.clone();
                self.mul_assign(&mut b.coeffs, &bb.coeffs, &mut scratch);
            }
        }
        acc
    }

    pub fn inv(&self, a: &FFElem) -> Result<FFElem> {
        if self.is_zero(a) {
            return domain("0 has no inverse");
        }
        Ok(self.pow(a, self.size as u128 - 2))
    }

    /// `sum_{i < k/d} xi^{p^{d i}}`, an element of the degree-`d` subfield.
    pub fn trace(&self, xi: &FFElem, d: u32) -> Result<FFElem> {
        if d == 0 || self.k % d != 0 {
            return domain(format!("{d} does not divide {}", self.k));
        }
        let q = (self.p as u128).pow(d);
        let mut acc = self.zero();
        let mut cur = xi.clone();
        for _ in 0..self.k / d {
            acc = self.add(&acc, &cur);
            cur = self.pow(&cur, q);
        }
        Ok(acc)
    }

    /// The absolute trace `Tr_{F_{p^k}/F_p}` as an integer in `[0, p)`.
    pub fn abs_trace(&self, xi: &FFElem) -> u64 {
        self.trace(xi, 1).expect("1 divides k").coeffs[0]
    }

    pub fn mult_order(&self, xi: &FFElem) -> Result<u128> {
        if self.is_zero(xi) {
            return domain("0 has no multiplicative order");
        }
        let mut ord = self.group.value;
        for &(r, e) in &self.group.factors {
            for _ in 0..e {
                if self.pow(xi, ord / r) == self.one() {
                    ord /= r;
                } else {
                    break;
                }
            }
        }
        Ok(ord)
    }

    pub fn is_primitive(&self, xi: &FFElem) -> bool {
        !self.is_zero(xi)
            && self.group.primes().all(|r| self.pow(xi, self.group.value / r) != self.one())
    }

    /// `xi` is `m`-free: `gcd(m, (p^k - 1)/ord(xi)) = 1`.
    pub fn is_m_free(&self, xi: &FFElem, m: u128) -> Result<bool> {
        let n = self.group.value;
        if m == 0 || n % m != 0 {
            return domain(format!("{m} does not divide {n}"));
        }
        if self.is_zero(xi) {
            return domain("0 is not m-free for any m");
        }
        Ok(factorize(m)?.primes().all(|r| self.pow(xi, n / r) != self.one()))
    }

    /// `xi` has order exactly `(p^k - 1)/r`. Zero is never r-primitive.
    pub fn is_r_primitive(&self, xi: &FFElem, r: u128) -> Result<bool> {
        let n = self.group.value;
        if r == 0 || n % r != 0 {
            return domain(format!("{r} does not divide {n}"));
        }
        if self.is_zero(xi) {
            return Ok(false);
        }
        Ok(self.mult_order(xi)? == n / r)
    }

    pub fn has_log_tables(&self) -> bool {
        self.size <= LOG_TABLE_LIMIT
    }

    /// Lazily built discrete-log tables.
    pub fn logs(&self) -> Result<&LogTables> {
        if !self.has_log_tables() {
            return Err(Error::Capability(format!(
                "F_{{{}^{}}} has more than 2^26 elements; no discrete-log table",
                self.p, self.k
            )));
        }
        Ok(self.logs.get_or_init(|| {
            let n = (self.size - 1) as usize;
            let mut exp = Vec::with_capacity(n);
            let mut log = vec![u32::MAX; self.size as usize];
            let mut cur = self.one();
            let mut scratch = Vec::new();
            for e in 0..n {
                let idx = self.index(&cur);
                exp.push(idx as u32);
                log[idx as usize] = e as u32;
                self.mul_assign(&mut cur.coeffs, &self.generator.coeffs, &mut scratch);
            }
            LogTables { exp, log }
        }))
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, xi: &FFElem) -> Result<u64> {
        if self.is_zero(xi) {
            return domain("0 has no discrete logarithm");
        }
        Ok(self.logs()?.log[self.index(xi) as usize] as u64)
    }

    /// `g^e`.
    pub fn exp(&self, e: u128) -> FFElem {
        self.pow(&self.generator, e)
    }

    /// The least nonsquare of the field.
    pub fn least_nonsquare(&self) -> FFElem {
        let half = (self.size as u128 - 1) / 2;
        (1..self.size)
            .map(|i| self.from_index(i))
            .find(|x| self.pow(x, half) != self.one())
            .expect("odd fields have nonsquares")
    }

    pub fn is_square(&self, x: &FFElem) -> bool {
        self.is_zero(x) || self.pow(x, (self.size as u128 - 1) / 2) == self.one()
    }
}

fn index_of(coeffs: &[u64], p: u64) -> u64 {
    coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c)
}

// ---------------------------------------------------------------------------
// Linear algebra over F_p.

/// Solves `M x = b_j` for every column `b_j`, where `M` has `rows` rows and
/// `cols` independent columns. Returns `None` if some system is inconsistent.
fn solve_columns(m: &[Vec<u64>], rhs: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let rows = m[0].len();
    let cols = m.len();
    let nr = rhs.len();
    // augmented row-major matrix
    let mut a: Vec<Vec<u64>> = (0..rows)
        .map(|i| {
            let mut row: Vec<u64> = m.iter().map(|c| c[i]).collect();
            row.extend(rhs.iter().map(|c| c[i]));
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(r) = (pivot_row..rows).find(|&r| a[r][col] != 0) else {
            return None;
        };
        a.swap(pivot_row, r);
        let inv = inv_mod(a[pivot_row][col], p);
        for v in a[pivot_row].iter_mut() {
            *v = mulm(*v, inv, p);
        }
        for r in 0..rows {
            if r != pivot_row && a[r][col] != 0 {
                let f = a[r][col];
                for c in 0..cols + nr {
                    let t = mulm(f, a[pivot_row][c], p);
                    a[r][c] = (a[r][c] + p - t) % p;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    for row in a.iter().skip(cols) {
        if row[cols..].iter().any(|&v| v != 0) {
            return None;
        }
    }
    Some((0..nr).map(|j| (0..cols).map(|i| a[pivots[i]][cols + j]).collect()).collect())
}

/// `F_{q^n}` over `F_q`, with `F_q` carried by its own (canonical) field so
/// that base-field labels agree with the standalone field.
#[derive(Debug)]
pub struct Extension {
    pub base: FieldCtx,
    pub field: FieldCtx,
    pub n: u32,
    /// Image of `x^j` (powers of the embedded root of the base modulus), `j < e`.
    embed_cols: Vec<Vec<u64>>,
    /// Row `j` maps the big-field coefficient vector to coordinate `j` of the trace in `base`.
    trace_rows: Vec<Vec<u64>>,
}

impl Extension {
    /// Canonical `F_{q^n}` over canonical `F_q`.
    pub fn new(q: u64, n: u32) -> Result<Extension> {
        let (p, e) = numtheory::prime_power(q as u128)
            .ok_or_else(|| Error::Domain(format!("{q} is not a prime power")))?;
        if n == 0 {
            return domain("extension degree must be positive");
        }
        let base = build_field(p as u64, e)?;
        let field = build_field(p as u64, e * n)?;
        Extension::from_fields(base, field)
    }

    pub fn from_fields(base: FieldCtx, field: FieldCtx) -> Result<Extension> {
        if base.p != field.p || field.k % base.k != 0 {
            return domain("base is not a subfield");
        }
        let p = base.p;
        let e = base.k;
        let n = field.k / e;
        let q = base.size as u128;
        // Least root of the base modulus inside the big field.
        let root = if e == 1 {
            field.constant((p - base.modulus[0]) % p)
        } else {
            let cof = (field.size as u128 - 1) / (q - 1);
            let eval = |z: &FFElem| {
                base.modulus
                    .iter()
                    .rev()
                    .fold(field.zero(), |acc, &c| field.add(&field.mul(&acc, z), &field.constant(c)))
            };
            (0..q as u64 - 1)
                .map(|j| field.exp(j as u128 * cof))
                .filter(|z| field.is_zero(&eval(z)))
                .min_by_key(|z| field.index(z))
                .ok_or_else(|| Error::Domain("base modulus has no root".into()))?
        };
        let mut embed_cols = Vec::new();
        let mut cur = field.one();
        for _ in 0..e {
            embed_cols.push(cur.coeffs.clone());
            cur = field.mul(&cur, &root);
        }
        let traces: Vec<Vec<u64>> = (0..field.k)
            .map(|i| {
                let mut x = field.zero();
                x.coeffs[i as usize] = 1;
                field.trace(&x, e).map(|t| t.coeffs)
            })
            .collect::<Result<_>>()?;
        let cols = solve_columns(&embed_cols, &traces, p)
            .ok_or_else(|| Error::Domain("trace map does not land in the base field".into()))?;
        let trace_rows = (0..e as usize).map(|j| cols.iter().map(|c| c[j]).collect()).collect();
        Ok(Extension { base, field, n, embed_cols, trace_rows })
    }

    pub fn q(&self) -> u64 {
        self.base.size
    }

    pub fn embed(&self, c: &FFElem) -> FFElem {
        let p = self.field.p;
        let mut out = self.field.zero();
        for (j, &cj) in c.coeffs.iter().enumerate() {
            if cj == 0 {
                continue;
            }
            for (o, &v) in out.coeffs.iter_mut().zip(&self.embed_cols[j]) {
                *o = (*o + mulm(cj, v, p)) % p;
            }
        }
        out
    }

    /// Preimage of an element of the embedded subfield.
    pub fn restrict(&self, y: &FFElem) -> Result<FFElem> {
        let sol = solve_columns(&self.embed_cols, &[y.coeffs.clone()], self.field.p)
            .ok_or_else(|| Error::Domain(format!("{y} does not lie in F_q")))?;
        Ok(FFElem { coeffs: sol.into_iter().next().unwrap() })
    }

    /// `Tr_{F_{q^n}/F_q}` expressed in the base field.
    pub fn trace_to_base(&self, xi: &FFElem) -> FFElem {
        FFElem { coeffs: self.trace_coords(&xi.coeffs) }
    }

    fn trace_coords(&self, coeffs: &[u64]) -> Vec<u64> {
        let p = self.field.p as u128;
        self.trace_rows
            .iter()
            .map(|row| {
                let s: u128 = row.iter().zip(coeffs).map(|(&a, &b)| a as u128 * b as u128).sum();
                (s % p) as u64
            })
            .collect()
    }

    /// Base-field index of the trace of a raw coefficient vector. Hot path of brute force.
    pub fn trace_index(&self, coeffs: &[u64]) -> u64 {
        let p = self.field.p as u128;
        let mut idx = 0u64;
        for row in self.trace_rows.iter().rev() {
            let mut s = 0u128;
            for (&a, &b) in row.iter().zip(coeffs) {
                s += a as u128 * b as u128;
            }
            idx = idx * self.field.p + (s % p) as u64;
        }
        idx
    }

    /// `Q = (q^n - 1)/(q - 1)`.
    pub fn big_q(&self) -> u128 {
        (self.field.size as u128 - 1) / (self.base.size as u128 - 1)
    }
}

/// The first nonzero `alpha` of `F_{q^l}` with `Tr(alpha) = beta`.
pub fn find_lift(q: u64, l: u32, beta: &FFElem) -> Result<(Extension, FFElem)> {
    if !is_prime(l as u128) {
        return domain(format!("{l} is not prime"));
    }
    let ext = Extension::new(q, l)?;
    let beta = ext.base.elem(beta.coeffs.clone())?;
    let bi = ext.base.index(&beta);
    let alpha = (1..ext.field.size)
        .map(|i| ext.field.from_index(i))
        .find(|a| ext.trace_index(&a.coeffs) == bi)
        .expect("fibres of the trace have q^{l-1} elements");
    Ok((ext, alpha))
}

/// The first `c` in `F_q^*` with `c * xi` primitive. Requires `xi` to be `Q`-free.
pub fn scale_to_primitive(ext: &Extension, xi: &FFElem) -> Result<FFElem> {
    let f = &ext.field;
    let bq = ext.big_q();
    let rad_q = factorize(bq)?.radical();
    if f.is_zero(xi) || !f.is_m_free(xi, rad_q)? {
        return Err(Error::Precondition(format!("{xi} is not {rad_q}-free")));
    }
    (1..ext.base.size)
        .map(|i| ext.base.from_index(i))
        .find(|c| f.is_primitive(&f.mul(&ext.embed(c), xi)))
        .ok_or_else(|| Error::Precondition("no scalar makes the element primitive".into()))
}

/// `(theta1, theta2)`: an `F_q`-basis of `F_{q^2}` with `Tr(theta1) = beta` and `Tr(theta2) = 0`.
pub fn trace_basis(ext: &Extension, beta: &FFElem) -> Result<(FFElem, FFElem)> {
    if ext.n != 2 {
        return domain("trace bases are defined for quadratic extensions");
    }
    let (b, f) = (&ext.base, &ext.field);
    if b.is_zero(beta) {
        return domain("beta must be nonzero");
    }
    let bi = b.index(beta);
    let theta1 = (1..f.size)
        .map(|i| f.from_index(i))
        .find(|x| ext.trace_index(&x.coeffs) == bi)
        .expect("trace is onto");
    let t1_inv = f.inv(&theta1)?;
    let q = b.size as u128;
    let other = (1..f.size)
        .map(|i| f.from_index(i))
        .find(|x| {
            let r = f.mul(x, &t1_inv);
            f.pow(&r, q) != r
        })
        .expect("F_{q^2} has dimension 2");
    let tr = ext.trace_to_base(&other);
    let c = b.mul(&tr, &b.inv(beta)?);
    let theta2 = f.sub(&other, &f.mul(&ext.embed(&c), &theta1));
    Ok((theta1, theta2))
}

/// The three characteristic functions built from character sums.
#[derive(Debug, Clone, Copy)]
pub enum CharFn<'a> {
    /// Indicator of `m`-free elements.
    OmegaM(u128),
    /// Indicator of `k`-th powers.
    WK(u128),
    /// Indicator of `Tr_{F_{q^n}/F_q}(xi) = beta`.
    TBeta { ext: &'a Extension, beta: &'a FFElem },
}

/// `e^{2 pi i a e / n}`, the value of the `a`-th multiplicative character at `g^e`.
pub(crate) fn root_of_unity(num: u128, den: u128) -> Complex64 {
    let r = (num % den) as f64 / den as f64;
    Complex64::from_polar(1.0, TAU * r)
}

/// Sum of all characters of exact order `d` at `g^e` in a group of order `n`.
fn order_d_sum(n: u128, d: u128, e: u128) -> Complex64 {
    let step = n / d;
    (1..=d)
        .filter(|j| numtheory::gcd(*j % d, d) == 1)
        .map(|j| root_of_unity((j % d) * step % n * (e % n) % n, n))
        .sum()
}

/// Evaluates a characteristic function literally as a character sum.
pub fn characteristic_fn(ctx: &FieldCtx, kind: CharFn<'_>, xi: &FFElem) -> Result<Complex64> {
    match kind {
        CharFn::OmegaM(m) | CharFn::WK(m) => {
            let n = ctx.group.value;
            if m == 0 || n % m != 0 {
                return domain(format!("{m} does not divide {n}"));
            }
            let e = ctx.log(xi)? as u128;
            let divisors = numtheory::squarefree_divisors(&factorize(m)?.primes().collect::<Vec<_>>());
            if let CharFn::OmegaM(_) = kind {
                let theta = numtheory::theta(m)?.to_f64().unwrap_or(0.0);
                let mut acc = Complex64::new(0.0, 0.0);
                for d in divisors {
                    let mu = numtheory::moebius(d)? as f64;
                    let phi = numtheory::phi(d)? as f64;
                    acc += order_d_sum(n, d, e) * (mu / phi);
                }
                Ok(acc * theta)
            } else {
                let all: Vec<u128> = (1..=m).filter(|d| m % d == 0).collect();
                let s: Complex64 = all.iter().map(|&d| order_d_sum(n, d, e)).sum();
                Ok(s / m as f64)
            }
        }
        CharFn::TBeta { ext, beta } => {
            if ctx.k != ext.field.k || ctx.modulus != ext.field.modulus {
                return domain("t_beta must be evaluated in the extension field");
            }
            ctx.logs()?;
            let (b, f) = (&ext.base, &ext.field);
            let p = b.p as u128;
            let mut acc = Complex64::new(0.0, 0.0);
            for u in b.elements() {
                let ub = b.abs_trace(&b.mul(&u, beta)) as u128;
                let uxi = f.mul(&ext.embed(&u), xi);
                let t = b.abs_trace(&ext.trace_to_base(&uxi)) as u128;
                acc += root_of_unity((t + p - ub) % p, p);
            }
            Ok(acc / b.size as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn i9() -> (FieldCtx, FFElem) {
        let f = build_field(3, 2).unwrap();
        let i = f.elem(vec![0, 1]).unwrap();
        (f, i)
    }

    #[test]
    fn canonical_moduli() {
        let (f, _) = i9();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let f5 = build_field(5, 1).unwrap();
        assert_eq!(f5.modulus(), &[0, 1]);
        assert_eq!(f5.generator().coeffs, vec![2]);
        let f49 = build_field(7, 2).unwrap();
        assert_eq!(f49.group_order().value, 48);
        assert_eq!(build_field(5, 2).unwrap().modulus(), &[1, 1, 1]);
        assert!(build_field(2, 3).is_err());
        assert!(build_field(9, 1).is_err());
        assert!(build_field(3, 30).is_err());
    }

    #[test]
    fn every_modulus_has_no_roots() {
        for (p, k) in [(3, 3), (3, 4), (5, 3), (7, 3), (11, 2)] {
            let f = build_field(p, k).unwrap();
            let m = f.modulus();
            for a in 0..p {
                let v = m.iter().rev().fold(0u64, |acc, &c| (acc * a + c) % p);
                assert_ne!(v, 0);
            }
            assert_eq!(f.mult_order(f.generator()).unwrap(), f.group_order().value);
        }
    }

    #[test]
    fn traces() {
        let (f, i) = i9();
        assert_eq!(f.trace(&i, 1).unwrap(), f.zero());
        assert_eq!(f.trace(&f.one(), 1).unwrap(), f.constant(2));
        assert!(f.trace(&i, 3).is_err());
        let f81 = build_field(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = f81.from_index(rng.gen_range(0..81));
            let two = f81.trace(&x, 2).unwrap();
            // Tr_{2/1} on the subfield F_9
            let down = f81.add(&two, &f81.pow(&two, 3));
            assert_eq!(down, f81.trace(&x, 1).unwrap());
        }
    }

    #[test]
    fn orders_and_freeness() {
        let (f, i) = i9();
        assert_eq!(f.mult_order(&f.one()).unwrap(), 1);
        assert_eq!(f.mult_order(&i).unwrap(), 4);
        assert!(f.mult_order(&f.zero()).is_err());
        let f7 = build_field(7, 1).unwrap();
        assert_eq!(f7.mult_order(&f7.constant(3)).unwrap(), 6);
        assert!(!f.is_m_free(&i, 2).unwrap());
        assert!(f.is_m_free(&i, 1).unwrap());
        assert!(f.is_m_free(f.generator(), 2).unwrap());
        assert!(f.is_m_free(&i, 3).is_err());
        assert!(f.is_r_primitive(&i, 2).unwrap());
        assert!(f.is_r_primitive(&f.neg(&i), 2).unwrap());
        assert!(!f.is_r_primitive(&f.constant(2), 2).unwrap());
        assert!(!f.is_r_primitive(&f.zero(), 2).unwrap());
        assert!(f.is_r_primitive(f.generator(), 1).unwrap());
    }

    #[test]
    fn m_free_matches_definition() {
        for (p, k) in [(3, 1), (3, 2), (3, 3), (3, 4), (3, 6), (5, 2), (7, 2), (13, 2), (5, 4)] {
            let f = build_field(p, k).unwrap();
            let n = f.group_order().value;
            let logs = f.logs().unwrap();
            for m in (1..=n).filter(|m| n % m == 0) {
                for e in 0..n {
                    let x = f.from_index(logs.exp[e as usize] as u64);
                    // g^e is a d-th power (d | n) exactly when d | e
                    let defn = !(2..=m).any(|d| m % d == 0 && e % d == 0);
                    assert_eq!(f.is_m_free(&x, m).unwrap(), defn, "p={p} k={k} m={m} e={e}");
                }
            }
        }
    }

    #[test]
    fn vinogradov_and_power_indicators() {
        for (p, k) in [(3, 2), (3, 3), (5, 2), (7, 2), (3, 4), (13, 1), (3, 6)] {
            let f = build_field(p, k).unwrap();
            let n = f.group_order().value;
            for m in (1..=n).filter(|m| n % m == 0) {
                for x in f.elements().skip(1) {
                    let w = characteristic_fn(&f, CharFn::OmegaM(m), &x).unwrap();
                    let expect = if f.is_m_free(&x, m).unwrap() { 1.0 } else { 0.0 };
                    assert!((w.re - expect).abs() < 1e-9 && w.im.abs() < 1e-9);
                    let kth = characteristic_fn(&f, CharFn::WK(m), &x).unwrap();
                    let is_pow = f.log(&x).unwrap() as u128 % m == 0;
                    assert!((kth.re - if is_pow { 1.0 } else { 0.0 }).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn squares_of_f9() {
        let (f, _) = i9();
        let squares: Vec<u64> = f
            .elements()
            .skip(1)
            .filter(|x| characteristic_fn(&f, CharFn::WK(2), x).unwrap().re > 0.5)
            .map(|x| f.index(&x))
            .collect();
        // 1, 2, i, 2i
        assert_eq!(squares, vec![1, 2, 3, 6]);
    }

    #[test]
    fn t_beta_indicator() {
        for (q, n) in [(3, 2), (5, 2), (3, 3), (9, 2), (5, 3)] {
            let ext = Extension::new(q, n).unwrap();
            for beta in ext.base.elements() {
                for x in ext.field.elements() {
                    let t = characteristic_fn(&ext.field, CharFn::TBeta { ext: &ext, beta: &beta }, &x)
                        .unwrap();
                    let expect = if ext.trace_to_base(&x) == beta { 1.0 } else { 0.0 };
                    assert!((t.re - expect).abs() < 1e-9 && t.im.abs() < 1e-9);
                }
            }
        }
        let ext = Extension::new(3, 2).unwrap();
        let i = ext.field.elem(vec![0, 1]).unwrap();
        let zero = ext.base.zero();
        let t = characteristic_fn(&ext.field, CharFn::TBeta { ext: &ext, beta: &zero }, &i).unwrap();
        assert!((t.re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn extension_trace_agrees_with_direct_trace() {
        for (q, n) in [(9, 2), (9, 3), (25, 2), (27, 2), (5, 3)] {
            let ext = Extension::new(q, n).unwrap();
            let e = ext.base.k();
            for x in ext.field.elements().take(500) {
                let direct = ext.field.trace(&x, e).unwrap();
                assert_eq!(ext.embed(&ext.trace_to_base(&x)), direct);
                assert_eq!(ext.restrict(&direct).unwrap(), ext.trace_to_base(&x));
            }
            // embedding is a ring homomorphism
            for a in ext.base.elements() {
                for b in ext.base.elements().take(10) {
                    let lhs = ext.embed(&ext.base.mul(&a, &b));
                    let rhs = ext.field.mul(&ext.embed(&a), &ext.embed(&b));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn trace_fibres_are_uniform() {
        for (q, n) in [(3, 3), (9, 2), (5, 2), (7, 2)] {
            let ext = Extension::new(q, n).unwrap();
            let mut counts = vec![0u64; q as usize];
            for x in ext.field.elements() {
                counts[ext.trace_index(&x.coeffs) as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == (q as u64).pow(n - 1)));
        }
    }

    #[test]
    fn lifts() {
        let (ext, a) = find_lift(3, 2, &FFElem { coeffs: vec![0] }).unwrap();
        assert_eq!(a.coeffs, vec![0, 1]);
        assert_eq!(ext.trace_to_base(&a).coeffs, vec![0]);
        let (ext, a) = find_lift(5, 2, &FFElem { coeffs: vec![2] }).unwrap();
        assert_eq!(ext.trace_to_base(&a).coeffs, vec![2]);
        assert_eq!(a, ext.field.one());
        let (_, a) = find_lift(7, 3, &FFElem { coeffs: vec![3] }).unwrap();
        assert_eq!(a.coeffs, vec![1, 0, 0]);
        assert!(find_lift(3, 4, &FFElem { coeffs: vec![0] }).is_err());
    }

    #[test]
    fn scaling_to_primitive() {
        let ext = Extension::new(5, 3).unwrap();
        let f = &ext.field;
        let xi = f.exp(5);
        let c = scale_to_primitive(&ext, &xi).unwrap();
        assert_eq!(f.mult_order(&f.mul(&ext.embed(&c), &xi)).unwrap(), 124);
        let ext = Extension::new(3, 3).unwrap();
        let f = &ext.field;
        let rad = factorize(ext.big_q()).unwrap().radical();
        let mut checked = 0;
        for x in f.elements().skip(1) {
            let sq_trace_zero = ext.trace_to_base(&f.mul(&x, &x)).coeffs == vec![0];
            match scale_to_primitive(&ext, &x) {
                Ok(c) => {
                    let y = f.mul(&ext.embed(&c), &x);
                    assert!(f.is_primitive(&y));
                    if sq_trace_zero {
                        assert_eq!(ext.trace_to_base(&f.mul(&y, &y)).coeffs, vec![0]);
                    }
                    checked += 1;
                }
                Err(Error::Precondition(_)) => assert!(!f.is_m_free(&x, rad).unwrap()),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn trace_bases() {
        let base = build_field(5, 1).unwrap();
        let field = FieldCtx::with_modulus(5, vec![3, 0, 1]).unwrap();
        let ext = Extension::from_fields(base, field).unwrap();
        let (t1, t2) = trace_basis(&ext, &FFElem { coeffs: vec![2] }).unwrap();
        assert_eq!(t1, ext.field.one());
        assert_eq!(t2.coeffs, vec![0, 1]);
        for q in [3u64, 5, 7, 9, 25, 27] {
            let ext = Extension::new(q, 2).unwrap();
            for beta in ext.base.elements().skip(1) {
                let (t1, t2) = trace_basis(&ext, &beta).unwrap();
                assert_eq!(ext.trace_to_base(&t1), beta);
                assert!(ext.base.is_zero(&ext.trace_to_base(&t2)));
                for a in ext.base.elements() {
                    let x = ext.field.add(&t1, &ext.field.mul(&ext.embed(&a), &t2));
                    assert_eq!(ext.trace_to_base(&x), beta);
                }
            }
            assert!(trace_basis(&ext, &ext.base.zero()).is_err());
        }
    }

    #[test]
    fn serialization_round_trip() {
        let f = build_field(3, 3).unwrap();
        let x = f.elem(vec![2, 0, 1]).unwrap();
        assert_eq!(x.to_string(), "2,0,1");
        assert_eq!(f.parse("2,0,1").unwrap(), x);
        assert!(f.parse("3,0,0").is_err());
        assert!(FieldCtx::with_modulus(3, vec![2, 0, 1]).is_err());
    }

    #[test]
    fn odd_pairs_negate_to_primitive() {
        for (q, n) in [(3u64, 3u32), (7, 3), (3, 5)] {
            let f = build_field(q, n).unwrap();
            for x in f.elements().skip(1) {
                let two = f.is_r_primitive(&x, 2).unwrap();
                assert_eq!(two, f.is_primitive(&f.neg(&x)));
            }
        }
    }

    #[test]
    fn two_primitive_counts() {
        for (p, k) in [(3, 1), (3, 2), (3, 3), (3, 4), (3, 5), (3, 6), (5, 1), (5, 2), (5, 3), (5, 4), (7, 2), (7, 3), (11, 2), (13, 2), (23, 2)] {
            let f = build_field(p, k).unwrap();
            let n = f.group_order().value;
            if n % 2 != 0 || n == 2 {
                continue;
            }
            let count = f.elements().filter(|x| f.is_r_primitive(x, 2).unwrap()).count() as u128;
            let phi = numtheory::phi(n).unwrap();
            let odd = p % 4 == 3 && k % 2 == 1;
            assert_eq!(count, if odd { phi } else { phi / 2 }, "p={p} k={k}");
        }
    }

    proptest! {
        #[test]
        fn field_axioms(a in 0u64..625, b in 0u64..625, c in 0u64..625) {
            let f = build_field(5, 4).unwrap();
            let (x, y, z) = (f.from_index(a), f.from_index(b), f.from_index(c));
            prop_assert_eq!(f.mul(&x, &f.add(&y, &z)), f.add(&f.mul(&x, &y), &f.mul(&x, &z)));
            prop_assert_eq!(f.mul(&f.mul(&x, &y), &z), f.mul(&x, &f.mul(&y, &z)));
            prop_assert_eq!(f.index(&x), a);
            if a != 0 {
                prop_assert_eq!(f.mul(&x, &f.inv(&x).unwrap()), f.one());
                prop_assert_eq!(f.exp(f.log(&x).unwrap() as u128), x.clone());
            }
            let t = |v: &FFElem| f.trace(v, 1).unwrap();
            prop_assert_eq!(t(&f.add(&x, &y)), f.add(&t(&x), &t(&y)));
        }
    }
}
