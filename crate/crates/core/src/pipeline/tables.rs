use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::criteria::{self, ClassOutcome, CriterionId};
use crate::numtheory::odd_prime_powers;
use crate::par::{self, Execution};
use crate::pipeline::cache::{scan_cached, DEFAULT_CHUNK};
use crate::pipeline::scan::{
    n2_search_bound, n3_search_bound, scan, ScanDegree, ScanMode, ScanOptions, ScanRecord, HIGH_DEGREES,
};
use crate::pipeline::verify::verify_pair;
use crate::{Error, Result};

pub const TABLE1: [(u32, u128); 7] = [(5, 73259), (7, 419), (11, 25), (13, 13), (17, 7), (19, 5), (23, 4)];

pub const TABLE2: [(u128, &[u128]); 8] = [
    (29, &[67, 13]),
    (61, &[97, 13, 3]),
    (81, &[73, 13]),
    (109, &[571, 7]),
    (277, &[193, 19, 7]),
    (289, &[307, 13, 7]),
    (373, &[73, 13]),
    (1369, &[67, 43]),
];

pub const TABLE3_N2: [u128; 101] = [
    3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29, 31, 37, 41, 43, 47, 49, 53, 59, 61, 67, 71, 73, 79, 81, 83, 89, 97,
    101, 103, 109, 113, 121, 125, 127, 131, 137, 139, 149, 151, 157, 169, 173, 181, 191, 197, 199, 211, 229, 239,
    241, 269, 281, 307, 311, 331, 337, 349, 361, 373, 379, 389, 409, 419, 421, 461, 463, 509, 521, 529, 569, 571,
    601, 617, 631, 659, 661, 701, 761, 769, 841, 859, 881, 911, 1009, 1021, 1231, 1289, 1301, 1331, 1429, 1609,
    1741, 1849, 1861, 2029, 2281, 2311, 2729, 3541,
];

pub const TABLE3_N3: [u128; 7] = [5, 9, 13, 25, 37, 49, 121];

pub const TABLE4: [(u128, &[&str]); 7] = [
    (3, &["0"]),
    (5, &["2", "3"]),
    (7, &["1", "2", "5", "6"]),
    (9, &["1", "-1", "i", "-i"]),
    (11, &["1", "2", "3", "4", "7", "8", "9", "10"]),
    (13, &["1", "3", "4", "5", "6", "7", "8", "9", "10", "12"]),
    (
        31,
        &[
            "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "12", "13", "14", "15", "16", "17", "18", "19", "21",
            "22", "23", "24", "25", "26", "27", "28", "29", "30",
        ],
    ),
];

/// Bound on `q` for the `n = 2` brute-force pass that finds the Table 4 rows.
pub const TABLE4_QMAX: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDiff {
    pub row: String,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub id: u8,
    /// Tab-separated, header first.
    pub rendered: String,
    pub diffs: Vec<CellDiff>,
}

impl TableReport {
    pub fn clean(&self) -> bool {
        self.diffs.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TableOptions {
    pub exec: Execution,
    /// Directory for scan caches (Tables 2 and 3).
    pub cache_dir: Option<PathBuf>,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Compare keyed rows cell by cell.
fn diff_rows(expected: &BTreeMap<String, Vec<String>>, actual: &BTreeMap<String, Vec<String>>, cols: &[&str]) -> Vec<CellDiff> {
    let keys: BTreeSet<&String> = expected.keys().chain(actual.keys()).collect();
    let mut out = Vec::new();
    for k in keys {
        let (e, a) = (expected.get(k), actual.get(k));
        for (i, col) in cols.iter().enumerate() {
            let ev = e.map_or("<absent>".to_string(), |r| r[i].clone());
            let av = a.map_or("<absent>".to_string(), |r| r[i].clone());
            if ev != av {
                out.push(CellDiff { row: k.clone(), column: col.to_string(), expected: ev, actual: av });
            }
        }
    }
    out
}

fn scan_for(degree: ScanDegree, qmax: u128, opts: &TableOptions) -> Result<Vec<ScanRecord>> {
    let sopts = ScanOptions { mode: ScanMode::CriteriaOnly, exec: opts.exec };
    match &opts.cache_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("scan-n{degree}-{qmax}.jsonl"));
            Ok(scan_cached(degree, qmax, sopts, &path, DEFAULT_CHUNK)?.records)
        }
        None => scan(degree, qmax, sopts),
    }
}

pub fn table1() -> Result<TableReport> {
    let mut rendered = String::from("n\tq_min\n");
    let mut actual = BTreeMap::new();
    for n in HIGH_DEGREES {
        let t = criteria::generic_threshold(n)?;
        writeln!(rendered, "{n}\t{t}").ok();
        actual.insert(format!("{n:02}"), vec![t.to_string()]);
    }
    let expected = TABLE1.iter().map(|(n, t)| (format!("{n:02}"), vec![t.to_string()])).collect();
    Ok(TableReport { id: 1, rendered, diffs: diff_rows(&expected, &actual, &["q_min"]) })
}

/// Rows of Table 2: `n = 3` prime powers whose zero class needs a sieve for G1.
pub fn table2_rows(records: &[ScanRecord]) -> Vec<(u128, Vec<u128>)> {
    records
        .iter()
        .filter(|r| r.n == 3 && r.failed(CriterionId::G1, true) && r.zero == ClassOutcome::Proved(CriterionId::G1))
        .filter_map(|r| {
            let proving = r.trail.iter().find(|t| t.criterion == CriterionId::G1 && t.proved())?;
            Some((r.q, proving.sieve.as_ref().map(|s| s.primes.clone()).unwrap_or_default()))
        })
        .collect()
}

pub fn table2(opts: &TableOptions) -> Result<TableReport> {
    let records = scan_for(ScanDegree::Three, n3_search_bound()?, opts)?;
    let rows = table2_rows(&records);
    let mut rendered = String::from("q\tsieving_primes\t#\n");
    let mut actual = BTreeMap::new();
    for (q, primes) in &rows {
        writeln!(rendered, "{q}\t{{{}}}\t{}", join(primes), primes.len()).ok();
        actual.insert(format!("{q:07}"), vec![join(primes), primes.len().to_string()]);
    }
    let expected = TABLE2
        .iter()
        .map(|(q, p)| (format!("{q:07}"), vec![join(p), p.len().to_string()]))
        .collect();
    Ok(TableReport { id: 2, rendered, diffs: diff_rows(&expected, &actual, &["sieving_primes", "#"]) })
}

/// Pairs the criteria leave open.
pub fn table3_values(records: &[ScanRecord]) -> Vec<u128> {
    records.iter().filter(|r| !r.settled_theoretically()).map(|r| r.q).collect()
}

pub fn table3(opts: &TableOptions) -> Result<TableReport> {
    let n2 = table3_values(&scan_for(ScanDegree::Two, n2_search_bound(), opts)?);
    let n3 = table3_values(&scan_for(ScanDegree::Three, n3_search_bound()?, opts)?);
    let mut rendered = String::from("n\tq\t#\n");
    let mut actual = BTreeMap::new();
    for (n, vals) in [(2u32, &n2), (3, &n3)] {
        writeln!(rendered, "{n}\t{}\t{}", join(vals), vals.len()).ok();
        actual.insert(n.to_string(), vec![join(vals), vals.len().to_string()]);
    }
    let expected = [(2u32, &TABLE3_N2[..]), (3, &TABLE3_N3[..])]
        .iter()
        .map(|(n, v)| (n.to_string(), vec![join(v), v.len().to_string()]))
        .collect();
    Ok(TableReport { id: 3, rendered, diffs: diff_rows(&expected, &actual, &["q", "#"]) })
}

pub fn table4(opts: &TableOptions) -> Result<TableReport> {
    let qs: Vec<u128> = odd_prime_powers(TABLE4_QMAX).into_iter().map(u128::from).collect();
    let covs = par::map(opts.exec, &qs, |&q| verify_pair(q, 2, Execution::Sequential));
    let mut rendered = String::from("q\ttraces\t#\n");
    let mut actual = BTreeMap::new();
    for cov in covs {
        let cov = cov?;
        if cov.covered {
            continue;
        }
        let set = cov.trace_set();
        writeln!(rendered, "{}\t{}\t{}", cov.q, set.join(","), set.len()).ok();
        actual.insert(format!("{:03}", cov.q), vec![set.join(","), set.len().to_string()]);
    }
    let expected = TABLE4
        .iter()
        .map(|(q, t)| (format!("{q:03}"), vec![t.join(","), t.len().to_string()]))
        .collect();
    Ok(TableReport { id: 4, rendered, diffs: diff_rows(&expected, &actual, &["traces", "#"]) })
}

pub fn reproduce_table(id: u8, opts: &TableOptions) -> Result<TableReport> {
    match id {
        1 => table1(),
        2 => table2(opts),
        3 => table3(opts),
        4 => table4(opts),
        _ => Err(Error::Domain(format!("no table {id} (expected 1 to 4)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_clean() {
        let t = table1().unwrap();
        assert!(t.clean(), "{:?}", t.diffs);
        assert!(t.rendered.contains("7\t419\n"));
    }

    #[test]
    fn table4_clean() {
        let t = table4(&TableOptions::default()).unwrap();
        assert!(t.clean(), "{:?}", t.diffs);
        assert!(t.rendered.contains("13\t1,3,4,5,6,7,8,9,10,12\t10\n"));
    }

    #[test]
    fn table2_rows_from_small_scan() {
        let recs = scan(ScanDegree::Three, 1400, ScanOptions { mode: ScanMode::CriteriaOnly, ..Default::default() })
            .unwrap();
        let rows = table2_rows(&recs);
        let want: Vec<(u128, Vec<u128>)> = TABLE2.iter().map(|(q, p)| (*q, p.to_vec())).collect();
        assert_eq!(rows, want);
    }

    #[test]
    fn diff_reports_cells() {
        let e: BTreeMap<_, _> = [("a".to_string(), vec!["1".to_string()])].into();
        let a: BTreeMap<_, _> = [("b".to_string(), vec!["1".to_string()])].into();
        let d = diff_rows(&e, &a, &["x"]);
        assert_eq!(d.len(), 2);
        assert!(matches!(reproduce_table(5, &TableOptions::default()), Err(Error::Domain(_))));
    }
}
