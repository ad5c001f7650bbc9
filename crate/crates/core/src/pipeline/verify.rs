use serde::{Deserialize, Serialize};

use crate::criteria::{classify_pair, Parity};
use crate::ffield::{Extension, FFElem, FieldCtx};
use crate::numtheory;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Largest `q^n` enumerated by brute force.
pub const ENUMERATION_LIMIT: u128 = 1 << 26;

/// Which traces must be attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// `F_q^*` (degree 2).
    #[serde(rename = "F_q*")]
    Nonzero,
    /// All of `F_q` (degree at least 3).
    #[serde(rename = "F_q")]
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCount {
    pub trace: String,
    pub count: u64,
}

/// Traces of all 2-primitive elements of `F_{q^n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCoverage {
    pub q: u128,
    pub n: u32,
    pub parity: Parity,
    /// Attained traces in canonical element order.
    pub traces: Vec<TraceCount>,
    pub total: u64,
    pub target: Target,
    pub covered: bool,
    /// Unattained elements of `F_q`, including 0 when the target is `F_q^*`.
    pub missing: Vec<String>,
}

impl TraceCoverage {
    pub fn trace_set(&self) -> Vec<&str> {
        self.traces.iter().map(|t| t.trace.as_str()).collect()
    }
}

/// Display label of a base-field element. Prime fields print integers; a
/// field built on `x^2 + 1` prints `a+bi` with symmetric coefficients.
pub fn element_label(ctx: &FieldCtx, x: &FFElem) -> String {
    let p = ctx.p();
    if ctx.k() == 1 {
        return x.coeffs[0].to_string();
    }
    if ctx.modulus() == [1, 0, 1] {
        let sym = |c: u64| if c > p / 2 { c as i64 - p as i64 } else { c as i64 };
        let (a, b) = (sym(x.coeffs[0]), sym(x.coeffs[1]));
        let imag = match b {
            0 => String::new(),
            1 => "i".to_string(),
            -1 => "-i".to_string(),
            b => format!("{b}i"),
        };
        return match (a, b) {
            (a, 0) => a.to_string(),
            (0, _) => imag,
            (a, _) if b > 0 => format!("{a}+{imag}"),
            (a, _) => format!("{a}{imag}"),
        };
    }
    x.to_string()
}

/// Counts of `Tr(h^i)` by base-field index over `0 <= i < len` with `i` prime
/// to every element of `primes`.
fn census(ext: &Extension, h: &FFElem, len: u128, primes: &[u64], exec: Execution) -> Vec<u64> {
    let q = ext.q() as usize;
    let chunks = par::ranges(len, par::chunk_count(exec, len));
    let parts = par::map(exec, &chunks, |&(start, end)| {
        let f = &ext.field;
        let mut counts = vec![0u64; q];
        let mut cur = f.pow(h, start);
        let mut scratch = Vec::new();
        for i in start..end {
            let i = i as u64;
            if primes.iter().all(|&p| i % p != 0) {
                counts[ext.trace_index(&cur.coeffs) as usize] += 1;
            }
            f.mul_assign(&mut cur.coeffs, &h.coeffs, &mut scratch);
        }
        counts
    });
    let mut total = vec![0u64; q];
    for part in parts {
        for (t, c) in total.iter_mut().zip(part) {
            *t += c;
        }
    }
    total
}

fn check_size(q: u128, n: u32) -> Result<u128> {
    let size = q
        .checked_pow(n)
        .ok_or_else(|| Error::Overflow(format!("{q}^{n} exceeds 128 bits")))?;
    if size > ENUMERATION_LIMIT {
        return Err(Error::Capability(format!(
            "F_{q}^{n} has {size} elements, above the enumeration limit 2^26; use the criteria instead"
        )));
    }
    Ok(size)
}

fn coverage(ext: &Extension, q: u128, n: u32, parity: Parity, counts: Vec<u64>, target: Target) -> TraceCoverage {
    let base = &ext.base;
    let mut traces = Vec::new();
    let mut missing = Vec::new();
    for (idx, &c) in counts.iter().enumerate() {
        let label = element_label(base, &base.from_index(idx as u64));
        if c > 0 {
            traces.push(TraceCount { trace: label, count: c });
        } else {
            missing.push(label);
        }
    }
    let covered = match target {
        Target::All => missing.is_empty(),
        Target::Nonzero => counts[1..].iter().all(|&c| c > 0),
    };
    TraceCoverage {
        q,
        n,
        parity,
        total: counts.iter().sum(),
        traces,
        target,
        covered,
        missing,
    }
}

fn odd_primes_u64(m: u128) -> Result<Vec<u64>> {
    Ok(numtheory::factorize(m)?.primes().map(|p| p as u64).collect())
}

/// Exhaustive census of the traces of 2-primitive elements. These are the
/// `g^(2i)` with `gcd(i, (q^n - 1)/2) = 1` for any generator `g`.
pub fn verify_pair(q: u128, n: u32, exec: Execution) -> Result<TraceCoverage> {
    let class = classify_pair(q, n)?;
    check_size(q, n)?;
    let ext = Extension::new(q as u64, n)?;
    let f = &ext.field;
    let half = (f.size() as u128 - 1) / 2;
    let h = f.pow(f.generator(), 2);
    let counts = census(&ext, &h, half, &odd_primes_u64(half)?, exec);
    let target = if n == 2 { Target::Nonzero } else { Target::All };
    Ok(coverage(&ext, q, n, class.parity, counts, target))
}

/// The same census for primitive elements, against all of `F_q`.
pub fn verify_primitive(q: u128, n: u32, exec: Execution) -> Result<TraceCoverage> {
    let class = classify_pair(q, n)?;
    check_size(q, n)?;
    let ext = Extension::new(q as u64, n)?;
    let f = &ext.field;
    let order = f.size() as u128 - 1;
    let counts = census(&ext, f.generator(), order, &odd_primes_u64(order)?, exec);
    Ok(coverage(&ext, q, n, class.parity, counts, Target::All))
}
