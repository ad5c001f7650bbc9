use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::criteria::{self, ClassOutcome, CriterionId, CriterionReport, Parity, SieveCount, Verdict};
use crate::numtheory::{self, odd_prime_powers};
use crate::par::{self, Execution};
use crate::pipeline::verify::{verify_pair, TraceCoverage, ENUMERATION_LIMIT};
use crate::{Error, Result};

/// Degrees for which Table 1 leaves pairs uncovered.
pub const HIGH_DEGREES: [u32; 7] = [5, 7, 11, 13, 17, 19, 23];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanDegree {
    Two,
    Three,
    High,
}

impl fmt::Display for ScanDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanDegree::Two => "2",
            ScanDegree::Three => "3",
            ScanDegree::High => "high",
        })
    }
}

impl FromStr for ScanDegree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "two" => Ok(ScanDegree::Two),
            "3" | "three" => Ok(ScanDegree::Three),
            "high" => Ok(ScanDegree::High),
            _ => Err(Error::Parse(format!("unknown scan degree '{s}' (expected 2, 3 or high)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    /// Criteria only; unsettled pairs stay `Unresolved`.
    CriteriaOnly,
    /// Settle what the criteria leave open by enumeration, where feasible.
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub mode: ScanMode,
    pub exec: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { mode: ScanMode::BruteForce, exec: Execution::Auto }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    ProvedTheoretically,
    VerifiedByBruteForce,
    GenuineException,
    /// Criteria inconclusive and the field too large (or brute force disabled).
    Unresolved,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::ProvedTheoretically => "proved-theoretically",
            Status::VerifiedByBruteForce => "verified-by-brute-force",
            Status::GenuineException => "genuine-exception",
            Status::Unresolved => "unresolved",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub q: u128,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization: Option<String>,
    pub zero: ClassOutcome,
    pub nonzero: ClassOutcome,
    pub trail: Vec<CriterionReport>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<TraceCoverage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScanRecord {
    /// First report of criterion `id` (with an empty sieve if `unsieved`).
    pub fn report(&self, id: CriterionId, unsieved: bool) -> Option<&CriterionReport> {
        self.trail.iter().find(|r| {
            r.criterion == id && (!unsieved || r.sieve.as_ref().map_or(true, |s| s.primes.is_empty()))
        })
    }

    pub fn failed(&self, id: CriterionId, unsieved: bool) -> bool {
        self.report(id, unsieved).is_some_and(|r| r.verdict == Verdict::Inconclusive)
    }

    pub fn settled_theoretically(&self) -> bool {
        self.status == Status::ProvedTheoretically
    }
}

/// `max(ceil(q1))` over the `n = 3` runs `(t, t)`, `8 <= t <= 15`, with one
/// sieving prime fewer, and the bound `(2 sqrt 2 * 2^7)^2` for `t <= 7`.
pub fn n3_search_bound() -> Result<u128> {
    let mut best = 8u128 << 14;
    for t in 8..=15 {
        let r = criteria::t_range_algorithm(3, t, t, SieveCount::OneLess)?;
        let ceil = r.q1.ceil().to_integer().to_u128().ok_or_else(|| Error::Overflow("q1".into()))?;
        best = best.max(ceil);
    }
    Ok(best)
}

/// `(2 * 2^9)^2`: pairs with `t(q) >= 10` are settled by the `n = 2` search.
pub fn n2_search_bound() -> u128 {
    (2u128 << 9).pow(2)
}

/// Pairs visited by a scan, in output order.
pub fn scan_targets(degree: ScanDegree, qmax: u128) -> Result<Vec<(u128, u32)>> {
    let limit = u64::try_from(qmax).map_err(|_| Error::Capability(format!("qmax {qmax} is too large")))?;
    Ok(match degree {
        ScanDegree::Two => odd_prime_powers(limit).into_iter().map(|q| (q as u128, 2)).collect(),
        ScanDegree::Three => odd_prime_powers(limit)
            .into_iter()
            .filter(|q| q % 4 == 1)
            .map(|q| (q as u128, 3))
            .collect(),
        ScanDegree::High => {
            let mut out = Vec::new();
            for n in HIGH_DEGREES {
                let t = criteria::generic_threshold(n)?;
                let pps = odd_prime_powers(limit.min(t as u64));
                out.extend(pps.into_iter().map(|q| q as u128).filter(|q| q % 4 == 1 || n % 2 == 0).map(|q| (q, n)));
            }
            out
        }
    })
}

/// Criteria dispatch plus brute-force fallback for one pair.
pub fn scan_record(q: u128, n: u32, opts: ScanOptions) -> ScanRecord {
    let decision = match criteria::decide(q, n) {
        Ok(d) => d,
        Err(e) => {
            return ScanRecord {
                q,
                n,
                factorization: None,
                zero: ClassOutcome::Inconclusive,
                nonzero: ClassOutcome::Inconclusive,
                trail: Vec::new(),
                status: Status::Unresolved,
                coverage: None,
                error: Some(e.to_string()),
            }
        }
    };
    let mut rec = ScanRecord {
        q,
        n,
        factorization: decision.order.as_ref().map(|f| f.to_string()),
        zero: decision.zero,
        nonzero: decision.nonzero,
        trail: decision.trail,
        status: Status::Unresolved,
        coverage: None,
        error: None,
    };
    if decision.zero.settled() && decision.nonzero.settled() {
        rec.status = Status::ProvedTheoretically;
        return rec;
    }
    let small = q.checked_pow(n).is_some_and(|s| s <= ENUMERATION_LIMIT);
    if opts.mode == ScanMode::BruteForce && small {
        // Already inside a parallel scan over q.
        match verify_pair(q, n, Execution::Sequential) {
            Ok(cov) => {
                rec.status = if cov.covered { Status::VerifiedByBruteForce } else { Status::GenuineException };
                rec.coverage = Some(cov);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
    }
    rec
}

/// In-memory scan.
pub fn scan(degree: ScanDegree, qmax: u128, opts: ScanOptions) -> Result<Vec<ScanRecord>> {
    let targets = scan_targets(degree, qmax)?;
    Ok(par::map(opts.exec, &targets, |&(q, n)| scan_record(q, n, opts)))
}

/// One stage of a scan funnel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelStage {
    pub stage: String,
    pub count: usize,
    pub max_q: Option<u128>,
    /// The `q` values, when few.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<(u128, u32)>,
}

const LIST_LIMIT: usize = 200;

fn stage<'a>(name: &str, recs: impl Iterator<Item = &'a ScanRecord>) -> FunnelStage {
    let hits: Vec<(u128, u32)> = recs.map(|r| (r.q, r.n)).collect();
    FunnelStage {
        stage: name.to_string(),
        count: hits.len(),
        max_q: hits.iter().map(|h| h.0).max(),
        members: if hits.len() <= LIST_LIMIT { hits } else { Vec::new() },
    }
}

/// Stage counts in the order the criteria are applied.
pub fn funnel(degree: ScanDegree, records: &[ScanRecord]) -> Vec<FunnelStage> {
    let all = || records.iter();
    let unsettled = stage("unsettled", all().filter(|r| !r.settled_theoretically()));
    let mut out = vec![stage("pairs", all())];
    match degree {
        ScanDegree::Two => {
            out.push(stage("n2-inconclusive", all().filter(|r| r.failed(CriterionId::N2, false))));
            out.push(unsettled);
        }
        ScanDegree::Three => {
            out.push(stage("n3-inconclusive", all().filter(|r| r.failed(CriterionId::N3, false))));
            out.push(stage("E1-unsieved-inconclusive", all().filter(|r| r.failed(CriterionId::E1, true))));
            out.push(stage("G1-unsieved-inconclusive", all().filter(|r| r.failed(CriterionId::G1, true))));
            out.push(stage("nonzero-unsettled", all().filter(|r| !r.nonzero.settled())));
            out.push(stage("zero-unsettled", all().filter(|r| !r.zero.settled())));
            out.push(unsettled);
        }
        ScanDegree::High => {
            out.push(stage("generic-inconclusive", all().filter(|r| r.failed(CriterionId::Generic, false))));
            out.push(stage("dt-inconclusive", all().filter(|r| r.failed(CriterionId::Dt, false))));
            out.push(unsettled);
        }
    }
    for status in [Status::VerifiedByBruteForce, Status::GenuineException, Status::Unresolved] {
        out.push(stage(&status.to_string(), all().filter(|r| r.status == status)));
    }
    out
}

/// Parity of a scanned pair, for summaries.
pub fn parity_of(rec: &ScanRecord) -> Parity {
    if rec.q % 4 == 3 && rec.n % 2 == 1 {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// `q^n - 1` of a record, refactored (records carry it only as text).
pub fn order_of(rec: &ScanRecord) -> Result<numtheory::Factorization> {
    Ok(numtheory::decompose(rec.q, rec.n)?.order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_parse() {
        assert_eq!("2".parse::<ScanDegree>().unwrap(), ScanDegree::Two);
        assert_eq!("high".parse::<ScanDegree>().unwrap(), ScanDegree::High);
        assert!("4".parse::<ScanDegree>().is_err());
    }

    #[test]
    fn search_bounds() {
        assert_eq!(n3_search_bound().unwrap(), 511_095);
        assert_eq!(n2_search_bound(), 1_048_576);
    }

    #[test]
    fn small_n2_scan() {
        let recs = scan(ScanDegree::Two, 64, ScanOptions::default()).unwrap();
        let exceptions: Vec<u128> =
            recs.iter().filter(|r| r.status == Status::GenuineException).map(|r| r.q).collect();
        assert_eq!(exceptions, vec![3, 5, 7, 9, 11, 13, 31]);
        assert!(recs.iter().all(|r| r.status != Status::Unresolved));
    }

    #[test]
    fn small_n3_scan() {
        let recs = scan(ScanDegree::Three, 200, ScanOptions::default()).unwrap();
        assert!(recs.iter().all(|r| r.q % 4 == 1));
        for r in &recs {
            assert!(matches!(r.status, Status::ProvedTheoretically | Status::VerifiedByBruteForce), "{}", r.q);
        }
        let seq = scan(ScanDegree::Three, 200, ScanOptions { exec: Execution::Sequential, ..Default::default() })
            .unwrap();
        assert_eq!(seq, recs);
    }

    #[test]
    fn high_targets() {
        let t = scan_targets(ScanDegree::High, 100).unwrap();
        assert!(t.iter().all(|&(q, n)| q % 4 == 1 || n % 2 == 0));
        assert!(t.contains(&(5, 5)));
        assert!(!t.contains(&(7, 5)));
        assert!(t.contains(&(25, 11)));
        assert!(!t.contains(&(29, 11)));
    }
}
