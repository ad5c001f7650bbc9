//! Multiplicative and additive characters, Gauss sums, hybrid sums and the
//! exact counts of elements with prescribed trace.
//!
//! Characters are evaluated in the discrete-log domain: if `g` is the field
//! generator and `N = |F^*|`, the character with exponent `a` sends `g^e` to
//! `exp(2 pi i a e / N)`, and every character sends 0 to 0. The additive
//! character of a field is its canonical one, `x -> exp(2 pi i Tr_0(x) / p)`.
//! Because absolute traces compose, the lift of the canonical character of
//! `F_q` to `F_{q^n}` is the canonical character of `F_{q^n}`.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact::Surd;
use crate::ffield::{root_of_unity, Extension, FFElem, FieldCtx, LOG_TABLE_LIMIT};
use crate::numtheory::{self, gcd};

/// Complex tolerance for values that are integers in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-9;
/// Complex tolerance for magnitude statements.
pub const MAGNITUDE_TOL: f64 = 1e-6;

/// A multiplicative character of a cyclic group of order `group_order`,
/// labelled by its exact order `d` and an index `j` coprime to `d`:
/// `chi(g) = exp(2 pi i j / d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultChar {
    pub group_order: u128,
    pub order: u128,
    pub index: u128,
}

impl MultChar {
    pub fn new(group_order: u128, order: u128, index: u128) -> Result<Self> {
        if order == 0 || group_order % order != 0 {
            return domain(format!("no character of order {order} in a group of order {group_order}"));
        }
        if gcd(index % order, order) != 1 {
            return domain(format!("index {index} is not coprime to the order {order}"));
        }
        Ok(MultChar { group_order, order, index: index % order })
    }

    pub fn trivial(group_order: u128) -> Self {
        MultChar { group_order, order: 1, index: 0 }
    }

    pub fn quadratic(group_order: u128) -> Self {
        MultChar { group_order, order: 2, index: 1 }
    }

    /// All `phi(d)` characters of exact order `d`.
    pub fn all_of_order(group_order: u128, d: u128) -> Result<Vec<Self>> {
        if d == 0 || group_order % d != 0 {
            return domain(format!("{d} does not divide {group_order}"));
        }
        Ok((0..d).filter(|&j| gcd(j, d) == 1).map(|j| MultChar { group_order, order: d, index: j }).collect())
    }

    /// Every character of the group.
    pub fn all(group_order: u128) -> Vec<Self> {
        (0..group_order)
            .map(|a| MultChar::from_exponent(group_order, a))
            .collect()
    }

    /// The character `g^e -> exp(2 pi i a e / N)`.
    pub fn from_exponent(group_order: u128, a: u128) -> Self {
        let a = a % group_order;
        let g = gcd(a, group_order);
        let order = group_order / g;
        MultChar { group_order, order, index: a / g }
    }

    /// The exponent `a` with `chi(g^e) = exp(2 pi i a e / N)`.
    pub fn exponent(&self) -> u128 {
        self.index * (self.group_order / self.order)
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// `chi(g^e)`.
    pub fn at_log(&self, e: u128) -> Complex64 {
        let n = self.group_order;
        root_of_unity(numtheory::mul_mod(self.exponent(), e % n, n), n)
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &FFElem) -> Result<Complex64> {
        if ctx.is_zero(x) {
            return Ok(Complex64::zero());
        }
        Ok(self.at_log(ctx.log(x)? as u128))
    }

    /// `chi(-1) = (-1)^a`.
    pub fn at_minus_one(&self) -> i32 {
        if self.exponent() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn mul(&self, other: &MultChar) -> MultChar {
        MultChar::from_exponent(self.group_order, self.exponent() + other.exponent())
    }

    pub fn inverse(&self) -> MultChar {
        MultChar::from_exponent(self.group_order, self.group_order - self.exponent())
    }
}

/// Additive character `x -> psi(u x)` of a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddChar {
    pub u: FFElem,
}

impl AddChar {
    pub fn eval(&self, ctx: &FieldCtx, x: &FFElem) -> Complex64 {
        let t = ctx.abs_trace(&ctx.mul(&self.u, x));
        root_of_unity(t as u128, ctx.p() as u128)
    }
}

/// A literal character sum together with the bound that the theory gives for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub re: f64,
    pub im: f64,
    pub bound: f64,
    /// The bound is attained with equality.
    pub tight: bool,
}

impl SumReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
    pub fn within_bound(&self) -> bool {
        self.value().norm() <= self.bound + MAGNITUDE_TOL
    }
}

/// Log and trace tables for fast sums over a field.
struct Tables<'a> {
    n: u128,
    p: u128,
    exp: &'a [u32],
    log: &'a [u32],
    /// absolute trace by element index
    tr: Vec<u32>,
}

impl<'a> Tables<'a> {
    fn new(ctx: &'a FieldCtx) -> Result<Self> {
        let logs = ctx.logs()?;
        // Tr_0 is linear in the coefficients.
        let k = ctx.k() as usize;
        let basis: Vec<u64> = (0..k)
            .map(|j| {
                let mut x = ctx.zero();
                x.coeffs[j] = 1;
                ctx.abs_trace(&x)
            })
            .collect();
        let p = ctx.p();
        let tr = (0..ctx.size())
            .map(|mut idx| {
                let mut s = 0u128;
                for &b in &basis {
                    s += (idx % p) as u128 * b as u128;
                    idx /= p;
                }
                (s % p as u128) as u32
            })
            .collect();
        Ok(Tables { n: ctx.size() as u128 - 1, p: p as u128, exp: &logs.exp, log: &logs.log, tr })
    }

    /// `psi` at `g^e`.
    fn psi_log(&self, e: u128) -> Complex64 {
        let idx = self.exp[(e % self.n) as usize] as usize;
        root_of_unity(self.tr[idx] as u128, self.p)
    }

    fn log_of(&self, ctx: &FieldCtx, x: &FFElem) -> Option<u128> {
        if ctx.is_zero(x) {
            None
        } else {
            Some(self.log[ctx.index(x) as usize] as u128)
        }
    }

    /// `sum_{xi != 0} chi(xi) psi(u xi^r)`.
    fn hybrid(&self, chi: &MultChar, u: Option<u128>, r: u128) -> Complex64 {
        let mut acc = Complex64::zero();
        for e in 0..self.n {
            let add = match u {
                None => Complex64::new(1.0, 0.0),
                Some(lu) => self.psi_log(lu + (r * e) % self.n),
            };
            acc += chi.at_log(e) * add;
        }
        acc
    }
}

/// `g(u) = sum_xi psi(u xi^2)` evaluated in two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussSum {
    /// `sum_xi psi(u xi^2)`.
    pub value: Complex64,
    /// `sum_xi chi_2(xi) psi(u xi)`.
    pub twisted: Complex64,
    /// `u = 0`, where the first form degenerates to the field order.
    pub degenerate: bool,
}

pub fn gauss_sum(ctx: &FieldCtx, u: &FFElem) -> Result<GaussSum> {
    let t = Tables::new(ctx)?;
    let eta = MultChar::quadratic(t.n);
    let Some(lu) = t.log_of(ctx, u) else {
        return Ok(GaussSum {
            value: Complex64::new(ctx.size() as f64, 0.0),
            twisted: Complex64::zero(),
            degenerate: true,
        });
    };
    let value = Complex64::new(1.0, 0.0) + (0..t.n).map(|e| t.psi_log(lu + 2 * e)).sum::<Complex64>();
    let twisted = (0..t.n).map(|e| eta.at_log(e) * t.psi_log(lu + e)).sum();
    Ok(GaussSum { value, twisted, degenerate: false })
}

/// The sign `epsilon` and value `A = sum_{xi != 0} psi(u xi^2)` predicted in closed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussSign {
    pub epsilon: i8,
    /// `epsilon_1` for even `n`; `chi_2(u) epsilon_2` for odd `n`.
    pub sign: i8,
    pub value: Surd,
}

/// `epsilon_1` for `n` even.
pub fn epsilon1(q: u128, n: u32) -> i8 {
    if q % 4 == 3 && n % 4 == 2 {
        1
    } else {
        -1
    }
}

/// `epsilon_2` for `n` odd; `None` when `p = 3 (mod 4)` and `q` is not a square.
pub fn epsilon2(q: u128) -> Option<i8> {
    let (p, e) = numtheory::prime_power(q)?;
    match (p % 4, e % 2, e % 4) {
        (1, 1, _) => Some(1),
        (1, 0, _) => Some(-1),
        (3, 0, 2) => Some(1),
        (3, 0, 0) => Some(-1),
        _ => None,
    }
}

pub fn gauss_sign(q: u128, n: u32, u_is_square: bool) -> Result<GaussSign> {
    if q % 2 == 0 || numtheory::prime_power(q).is_none() {
        return domain(format!("{q} is not an odd prime power"));
    }
    if n == 0 {
        return domain("n must be positive");
    }
    let (eps, sign) = if n % 2 == 0 {
        let e = epsilon1(q, n);
        (e, e)
    } else {
        let e = epsilon2(q).ok_or_else(|| {
            Error::Domain(format!(
                "n is odd and p = 3 (mod 4) but q = {q} is not a square: (q, n) is an odd pair"
            ))
        })?;
        (e, if u_is_square { e } else { -e })
    };
    let value = Surd::pow_half(q, n).scale(&crate::exact::rat(sign as i64, 1)) - Surd::int(1);
    Ok(GaussSign { epsilon: eps, sign, value })
}

/// `A = sum_xi chi(xi) psi(u xi^r)` with its Weil-type bound.
pub fn hybrid_sum(ctx: &FieldCtx, chi: &MultChar, u: &FFElem, r: u128) -> Result<SumReport> {
    let t = Tables::new(ctx)?;
    if chi.group_order != t.n {
        return domain("character belongs to a different group");
    }
    if r == 0 || t.n % r != 0 {
        return domain(format!("{r} does not divide {}", t.n));
    }
    let lu = t.log_of(ctx, u);
    // With chi trivial and u = 0 the sum counts the nonzero elements.
    let v = t.hybrid(chi, lu, r);
    let root = (ctx.size() as f64).sqrt();
    let (bound, tight) = match (chi.is_trivial(), lu.is_some()) {
        (true, false) => (t.n as f64, true),
        (true, true) => ((r - 1) as f64 * root + 1.0, false),
        (false, false) => (0.0, true),
        (false, true) => (r as f64 * root, false),
    };
    Ok(SumReport { re: v.re, im: v.im, bound, tight })
}

/// `X_b(chi) = sum_xi chi(xi) psi(b xi^2)`.
pub fn x_sum(ctx: &FieldCtx, chi: &MultChar, b: &FFElem) -> Result<Complex64> {
    let t = Tables::new(ctx)?;
    Ok(t.hybrid(chi, t.log_of(ctx, b), 2))
}

/// `B = sum_{alpha in F_q} chi(theta + alpha)` for `F_{q^2} = F_q(theta)`.
pub fn katz_sum(ext: &Extension, theta: &FFElem, chi: &MultChar) -> Result<SumReport> {
    if ext.n != 2 {
        return domain("the sum is defined over quadratic extensions");
    }
    let f = &ext.field;
    let q = ext.q() as u128;
    if f.pow(theta, q) == *theta {
        return domain(format!("{theta} lies in F_q and does not generate F_{{q^2}}"));
    }
    if chi.is_trivial() {
        return domain("the character must be nontrivial");
    }
    let mut acc = Complex64::zero();
    for a in ext.base.elements() {
        acc += chi.eval(f, &f.add(theta, &ext.embed(&a)))?;
    }
    let (bound, tight) = if (q + 1) % chi.order != 0 { ((q as f64).sqrt(), true) } else { (1.0, true) };
    Ok(SumReport { re: acc.re, im: acc.im, bound, tight })
}

fn require_even_pair(q: u128, n: u32) -> Result<()> {
    if q % 4 == 3 && n % 2 == 1 {
        return domain(format!("({q}, {n}) is an odd pair"));
    }
    Ok(())
}

/// `M_beta` counted exhaustively (when small enough) and in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareCount {
    pub exact: Option<u128>,
    pub formula: u128,
}

/// Closed form of `M_beta`, the number of nonzero squares of `F_{q^n}` with trace `beta`.
pub fn squares_with_trace_formula(q: u128, n: u32, beta_zero: bool, beta_square: bool) -> Result<u128> {
    require_even_pair(q, n)?;
    let qi = |e: u32| q.pow(e) as i128;
    let twice: i128 = if n % 2 == 0 {
        let e1 = epsilon1(q, n) as i128;
        if beta_zero {
            qi(n - 1) - 1 + e1 * (q as i128 - 1) * qi(n / 2 - 1)
        } else {
            qi(n - 1) - e1 * qi(n / 2 - 1)
        }
    } else if beta_zero {
        qi(n - 1) - 1
    } else {
        let chi = if beta_square { 1 } else { -1 };
        qi(n - 1) + chi * qi((n - 1) / 2)
    };
    Ok((twice / 2) as u128)
}

/// Walks `h^0, h^1, ...` for `h = g^2` and calls `visit(e, trace index of g^{2e})`.
pub(crate) fn walk_square_traces(ext: &Extension, start: u128, end: u128, mut visit: impl FnMut(u128, u64)) {
    let f = &ext.field;
    let h = f.pow(f.generator(), 2);
    let mut cur = f.pow(&h, start);
    let mut scratch = Vec::new();
    for e in start..end {
        visit(e, ext.trace_index(&cur.coeffs));
        f.mul_assign(&mut cur.coeffs, &h.coeffs, &mut scratch);
    }
}

pub fn count_squares_with_trace(q: u128, n: u32, beta: &FFElem) -> Result<SquareCount> {
    require_even_pair(q, n)?;
    let size = q.checked_pow(n).ok_or_else(|| Error::Overflow(format!("{q}^{n}")))?;
    let ext_small = size <= LOG_TABLE_LIMIT as u128;
    let (beta_zero, beta_sq, exact) = if ext_small {
        let ext = Extension::new(q as u64, n)?;
        let beta = ext.base.elem(beta.coeffs.clone())?;
        let bi = ext.base.index(&beta);
        let half = (size - 1) / 2;
        let mut count = 0u128;
        walk_square_traces(&ext, 0, half, |_, t| {
            if t == bi {
                count += 1;
            }
        });
        (ext.base.is_zero(&beta), ext.base.is_square(&beta), Some(count))
    } else {
        let (p, e) = numtheory::prime_power(q).ok_or_else(|| Error::Domain(format!("{q} is not a prime power")))?;
        let base = crate::ffield::build_field(p as u64, e)?;
        let beta = base.elem(beta.coeffs.clone())?;
        (base.is_zero(&beta), base.is_square(&beta), None)
    };
    let formula = squares_with_trace_formula(q, n, beta_zero, beta_sq)?;
    Ok(SquareCount { exact, formula })
}

/// `N_beta(m)`: the number of `m`-free `xi` with `Tr(xi^2) = beta`, by enumeration.
pub fn count_nbeta(ext: &Extension, m: u128, beta: &FFElem) -> Result<u128> {
    require_even_pair(ext.q() as u128, ext.n)?;
    let f = &ext.field;
    if f.size() > LOG_TABLE_LIMIT {
        return Err(Error::Capability(format!("F_{} is too large to enumerate", f.size())));
    }
    let n = f.size() as u128 - 1;
    if m == 0 || n % m != 0 {
        return domain(format!("{m} does not divide {n}"));
    }
    let bi = ext.base.index(&ext.base.elem(beta.coeffs.clone())?);
    let rad = numtheory::factorize(m)?.radical();
    let mut count = 0u128;
    // xi = g^e is m-free exactly when gcd(e, m) = 1
    walk_square_traces(ext, 0, n, |e, t| {
        if t == bi && gcd(e, rad) == 1 {
            count += 1;
        }
    });
    Ok(count)
}

/// `N_beta(m)` through its character-sum expansion
/// `theta(m)/q sum_{d|m} mu(d)/phi(d) sum_{ord chi = d} sum_u conj(psi(u beta)) X_u(chi)`.
pub fn count_nbeta_charsum(ext: &Extension, m: u128, beta: &FFElem) -> Result<Complex64> {
    let f = &ext.field;
    let t = Tables::new(f)?;
    let n = t.n;
    if m == 0 || n % m != 0 {
        return domain(format!("{m} does not divide {n}"));
    }
    let primes: Vec<u128> = numtheory::factorize(m)?.primes().collect();
    let psi_base = |x: &FFElem| root_of_unity(ext.base.abs_trace(x) as u128, ext.base.p() as u128);
    let mut total = Complex64::zero();
    for d in numtheory::squarefree_divisors(&primes) {
        let coef = numtheory::moebius(d)? as f64 / numtheory::phi(d)? as f64;
        for chi in MultChar::all_of_order(n, d)? {
            let mut inner = Complex64::zero();
            for u in ext.base.elements() {
                let weight = psi_base(&ext.base.mul(&u, beta)).conj();
                inner += weight * t.hybrid(&chi, t.log_of(f, &ext.embed(&u)), 2);
            }
            total += inner * coef;
        }
    }
    let theta = crate::exact::Surd::rational(numtheory::theta(m)?).to_f64();
    Ok(total * theta / ext.q() as f64)
}

/// Both sides of `|X_b(chi)|^2 = (1 + chi(-1)) q^n + chi_2(b) G(chi_2) C(chi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A1Check {
    pub lhs: f64,
    pub rhs: Complex64,
    pub c_abs: f64,
    pub c_bound: f64,
    pub holds: bool,
}

pub fn a1_identity_check(ctx: &FieldCtx, chi: &MultChar, b: &FFElem) -> Result<A1Check> {
    if chi.is_trivial() {
        return domain("the character must be nontrivial");
    }
    if ctx.is_zero(b) {
        return domain("b must be nonzero");
    }
    let t = Tables::new(ctx)?;
    let eta = MultChar::quadratic(t.n);
    let x = t.hybrid(chi, t.log_of(ctx, b), 2);
    let g = gauss_sum(ctx, &ctx.one())?.value;
    let mut c = Complex64::zero();
    let one = ctx.one();
    for e in 0..t.n {
        let xi = ctx.from_index(t.exp[e as usize] as u64);
        let s = ctx.sub(&ctx.mul(&xi, &xi), &one);
        c += chi.at_log(e) * eta.eval(ctx, &s)?;
    }
    let q_n = ctx.size() as f64;
    let eta_b = eta.eval(ctx, b)?;
    let rhs = Complex64::new((1 + chi.at_minus_one()) as f64 * q_n, 0.0) + eta_b * g * c;
    let lhs = x.norm_sqr();
    let c_bound = 2.0 * q_n.sqrt();
    let holds = (rhs - lhs).norm() < MAGNITUDE_TOL && c.norm() <= c_bound + MAGNITUDE_TOL;
    Ok(A1Check { lhs, rhs, c_abs: c.norm(), c_bound, holds })
}

/// `|X_1(chi)| + |X_c(chi)|` against `2 sqrt(2) q^{n/2}` for the least nonsquare `c` of `F_q`.
pub fn c1_bound(ext: &Extension, chi: &MultChar) -> Result<SumReport> {
    let q = ext.q() as u128;
    if q % 4 != 1 || ext.n % 2 == 0 {
        return domain("requires q = 1 (mod 4) and n odd");
    }
    let f = &ext.field;
    let c = ext.embed(&ext.base.least_nonsquare());
    let s = x_sum(f, chi, &f.one())?.norm() + x_sum(f, chi, &c)?.norm();
    let bound = 2.0 * 2f64.sqrt() * (f.size() as f64).sqrt();
    Ok(SumReport { re: s, im: 0.0, bound, tight: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::build_field;

    #[test]
    fn gauss_sums_small() {
        let f5 = build_field(5, 1).unwrap();
        let g = gauss_sum(&f5, &f5.one()).unwrap();
        assert!((g.value - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-9);
        assert!((g.value - g.twisted).norm() < 1e-9);
        let f9 = build_field(3, 2).unwrap();
        let g1 = gauss_sum(&f9, &f9.one()).unwrap();
        assert!((g1.value.norm() - 3.0).abs() < 1e-9);
        let eta = MultChar::quadratic(8);
        for u in f9.elements().skip(1) {
            let gu = gauss_sum(&f9, &u).unwrap();
            let chi = eta.eval(&f9, &u).unwrap();
            assert!((gu.value - chi * g1.value).norm() < 1e-9);
        }
        let z = gauss_sum(&f9, &f9.zero()).unwrap();
        assert!(z.degenerate && z.value.re == 9.0);
    }

    #[test]
    fn gauss_sign_examples() {
        assert_eq!(gauss_sign(3, 2, true).unwrap().value, Surd::int(2));
        assert_eq!(gauss_sign(5, 2, true).unwrap().value, Surd::int(-6));
        let s = gauss_sign(5, 3, true).unwrap();
        assert_eq!(s.epsilon, 1);
        assert_eq!(s.value, Surd::pow_half(5, 3) - Surd::int(1));
        assert!(gauss_sign(3, 3, true).is_err());
        assert!(gauss_sign(7, 1, true).is_err());
        assert_eq!(gauss_sign(9, 3, true).unwrap().epsilon, 1);
        assert_eq!(gauss_sign(81, 3, true).unwrap().epsilon, -1);
        assert_eq!(gauss_sign(25, 3, false).unwrap().sign, 1);
    }

    #[test]
    fn hybrid_sum_cases() {
        let f9 = build_field(3, 2).unwrap();
        let triv = MultChar::trivial(8);
        let r = hybrid_sum(&f9, &triv, &f9.zero(), 2).unwrap();
        assert!((r.re - 8.0).abs() < 1e-9 && r.tight);
        let chi = MultChar::new(8, 8, 1).unwrap();
        let r = hybrid_sum(&f9, &chi, &f9.zero(), 2).unwrap();
        assert!(r.value().norm() < 1e-9);
        let r = hybrid_sum(&f9, &chi, &f9.one(), 2).unwrap();
        assert_eq!(r.bound, 6.0);
        assert!(r.within_bound());
        for chi in MultChar::all(8) {
            for u in f9.elements() {
                for rr in [1, 2, 4, 8] {
                    assert!(hybrid_sum(&f9, &chi, &u, rr).unwrap().within_bound());
                }
            }
        }
    }

    #[test]
    fn orthogonality() {
        let f = build_field(5, 2).unwrap();
        for chi in MultChar::all(24).into_iter().filter(|c| !c.is_trivial()) {
            let s: Complex64 = f.elements().map(|x| chi.eval(&f, &x).unwrap()).sum();
            assert!(s.norm() < 1e-9);
        }
        for u in f.elements().skip(1) {
            let psi = AddChar { u };
            let s: Complex64 = f.elements().map(|x| psi.eval(&f, &x)).sum();
            assert!(s.norm() < 1e-9);
        }
        for d in [1, 2, 3, 4, 6, 8, 12, 24] {
            let all = MultChar::all_of_order(24, d).unwrap();
            assert_eq!(all.len() as u128, numtheory::phi(d).unwrap());
            for c in &all {
                assert_eq!(c.mul(&c.inverse()), MultChar::trivial(24));
            }
        }
    }

    #[test]
    fn katz_examples() {
        let ext = Extension::new(3, 2).unwrap();
        let theta = ext.field.elem(vec![0, 1]).unwrap();
        let b = katz_sum(&ext, &theta, &MultChar::new(8, 4, 1).unwrap()).unwrap();
        assert!((b.value() - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        let b = katz_sum(&ext, &theta, &MultChar::new(8, 8, 1).unwrap()).unwrap();
        assert!((b.value().norm_sqr() - 3.0).abs() < 1e-6);
        assert!(katz_sum(&ext, &ext.field.one(), &MultChar::new(8, 8, 1).unwrap()).is_err());
    }

    #[test]
    fn squares_with_trace() {
        let zero = FFElem { coeffs: vec![0] };
        let c = count_squares_with_trace(3, 2, &zero).unwrap();
        assert_eq!((c.exact, c.formula), (Some(2), 2));
        for b in 1..3 {
            let c = count_squares_with_trace(3, 2, &FFElem { coeffs: vec![b] }).unwrap();
            assert_eq!((c.exact, c.formula), (Some(1), 1));
        }
        assert!(count_squares_with_trace(3, 3, &zero).is_err());
    }

    #[test]
    fn nbeta_examples() {
        let ext = Extension::new(3, 2).unwrap();
        let zero = ext.base.zero();
        assert_eq!(count_nbeta(&ext, 1, &zero).unwrap(), 4);
        assert_eq!(count_nbeta(&ext, 2, &zero).unwrap(), 4);
        let ext = Extension::new(5, 2).unwrap();
        for b in 1..5u64 {
            let beta = ext.base.constant(b);
            let v = count_nbeta(&ext, 6, &beta).unwrap();
            assert_eq!(v > 0, b == 2 || b == 3, "beta={b}");
            let m1 = count_nbeta(&ext, 1, &beta).unwrap();
            assert_eq!(m1, 2 * count_squares_with_trace(5, 2, &beta).unwrap().formula);
        }
    }

    #[test]
    fn nbeta_charsum_agrees() {
        for (q, n) in [(3u64, 2u32), (5, 2), (7, 2), (5, 3), (9, 2)] {
            let ext = Extension::new(q, n).unwrap();
            let big_n = ext.field.size() as u128 - 1;
            for m in (1..=big_n).filter(|m| big_n % m == 0 && numtheory::moebius(*m).unwrap() != 0) {
                for beta in ext.base.elements() {
                    let exact = count_nbeta(&ext, m, &beta).unwrap() as f64;
                    let cs = count_nbeta_charsum(&ext, m, &beta).unwrap();
                    assert!((cs.re - exact).abs() < 1e-6 && cs.im.abs() < 1e-6, "q={q} n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn a1_on_f9() {
        let f9 = build_field(3, 2).unwrap();
        let c = f9.least_nonsquare();
        for chi in MultChar::all(8).into_iter().filter(|c| !c.is_trivial()) {
            for b in [f9.one(), c.clone()] {
                assert!(a1_identity_check(&f9, &chi, &b).unwrap().holds);
            }
        }
    }

    #[test]
    fn c1_on_125() {
        let ext = Extension::new(5, 3).unwrap();
        for chi in MultChar::all(124).into_iter().filter(|c| !c.is_trivial()) {
            assert!(c1_bound(&ext, &chi).unwrap().within_bound());
        }
    }
}
