use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::charsums::MultChar;
use crate::ffield::{trace_basis, Extension, FFElem};
use crate::numtheory;
use crate::pipeline::verify::ENUMERATION_LIMIT;
use crate::{Error, Result};

/// Largest `r * q` for which the character-sum form is also evaluated.
pub const QR_CHARSUM_LIMIT: u128 = 1 << 24;

/// `Q_r`: how many `theta1 + alpha theta2` (`alpha` in `F_q`) are `r`-free
/// squares that are not 4th powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrCount {
    pub q: u128,
    pub beta: String,
    pub theta1: String,
    pub theta2: String,
    pub r: u128,
    pub value: u64,
    /// The character-sum evaluation, when small enough.
    pub charsum: Option<f64>,
}

/// Exact `Q_r`. `r` defaults to `q_2'`, the radical of the odd part of `q^2 - 1`.
pub fn count_qr_exact(q: u128, beta: &FFElem, r: Option<u128>) -> Result<QrCount> {
    if q.checked_mul(q).map_or(true, |s| s > ENUMERATION_LIMIT) {
        return Err(Error::Capability(format!("q = {q} is above the enumeration limit for q^2")));
    }
    let ext = Extension::new(q as u64, 2)?;
    let (b, f) = (&ext.base, &ext.field);
    let beta = b.elem(beta.coeffs.clone())?;
    if b.is_zero(&beta) {
        return Err(Error::Domain("a 2-primitive element of F_{q^2} cannot have trace 0 for q >= 5".into()));
    }
    let n = f.size() as u128 - 1;
    let mut odd = n;
    while odd % 2 == 0 {
        odd /= 2;
    }
    let q2 = numtheory::factorize(odd)?.radical();
    let r = r.unwrap_or(q2);
    if r == 0 || q2 % r != 0 {
        return Err(Error::Precondition(format!("{r} does not divide q_2' = {q2}")));
    }
    let (theta1, theta2) = trace_basis(&ext, &beta)?;
    let logs: Vec<u128> = b
        .elements()
        .map(|a| f.log(&f.add(&theta1, &f.mul(&ext.embed(&a), &theta2))).map(|e| e as u128))
        .collect::<Result<_>>()?;
    let value = logs.iter().filter(|&&e| e % 4 == 2 && numtheory::gcd(e, r) == 1).count() as u64;
    let charsum = if r * q <= QR_CHARSUM_LIMIT { Some(qr_charsum(n, r, &logs)?) } else { None };
    Ok(QrCount {
        q,
        beta: beta.to_string(),
        theta1: theta1.to_string(),
        theta2: theta2.to_string(),
        r,
        value,
        charsum,
    })
}

/// `Q_r = theta(r)/4 sum_{d | r} mu(d)/phi(d) sum_{ord chi = d} Z(chi)` with
/// `Z(chi) = Y(chi, 1) + Y(chi, eta) - Y(chi, eta_1) - Y(chi, eta_2)`.
fn qr_charsum(n: u128, r: u128, logs: &[u128]) -> Result<f64> {
    let primes: Vec<u128> = numtheory::factorize(r)?.primes().collect();
    let twisted = [
        (MultChar::trivial(n), 1.0),
        (MultChar::quadratic(n), 1.0),
        (MultChar::new(n, 4, 1)?, -1.0),
        (MultChar::new(n, 4, 3)?, -1.0),
    ];
    let mut total = Complex64::zero();
    for d in numtheory::squarefree_divisors(&primes) {
        let coef = numtheory::moebius(d)? as f64 / numtheory::phi(d)? as f64;
        for chi in MultChar::all_of_order(n, d)? {
            let mut z = Complex64::zero();
            for (eta, sign) in &twisted {
                let psi = chi.mul(eta);
                let y: Complex64 = logs.iter().map(|&e| psi.at_log(e)).sum();
                z += y * *sign;
            }
            total += z * coef;
        }
    }
    let theta = numtheory::theta(r)?.to_f64().unwrap_or(f64::NAN);
    Ok(total.re * theta / 4.0)
}

/// `ell_delta` of the decomposition `w_2 - w_4 = 1/2 sum_{delta | 4} ell_delta sum_{ord chi = delta} chi`.
pub fn ell(delta: u128) -> f64 {
    match delta {
        1 | 2 => 0.5,
        _ => -0.5,
    }
}
