//! JSONL scan cache. One record per line, in scan order, followed by a
//! summary line. Writes go to `<path>.partial` and are renamed into place
//! once the summary is written, so an interrupted scan leaves a resumable
//! prefix and never a truncated final file.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::par;
use crate::pipeline::scan::{scan_record, scan_targets, ScanDegree, ScanOptions, ScanRecord};
use crate::{Error, Result};

/// Pairs processed between flushes.
pub const DEFAULT_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub degree: ScanDegree,
    pub qmax: u128,
    pub records: usize,
    pub counts: BTreeMap<String, usize>,
    /// SHA-256 over the record lines, each terminated by `\n`.
    pub sha256: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Serialize, Deserialize)]
struct SummaryLine {
    summary: ScanSummary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptLine {
    pub line: usize,
    pub reason: String,
}

/// Contents of a cache file.
#[derive(Debug, Default)]
pub struct Loaded {
    pub records: Vec<ScanRecord>,
    pub summary: Option<ScanSummary>,
    pub corrupt: Vec<CorruptLine>,
}

pub struct CachedScan {
    pub records: Vec<ScanRecord>,
    pub summary: ScanSummary,
    /// Records taken from an earlier (possibly partial) run.
    pub reused: usize,
    pub corrupt: Vec<CorruptLine>,
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Read a cache file, skipping and reporting lines that do not parse.
pub fn load(path: &Path) -> Result<Loaded> {
    let file = File::open(path)?;
    let mut out = Loaded::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with("{\"summary\"") {
            match serde_json::from_str::<SummaryLine>(&line) {
                Ok(s) => out.summary = Some(s.summary),
                Err(e) => out.corrupt.push(CorruptLine { line: i + 1, reason: e.to_string() }),
            }
            continue;
        }
        match serde_json::from_str::<ScanRecord>(&line) {
            Ok(r) => out.records.push(r),
            Err(e) => out.corrupt.push(CorruptLine { line: i + 1, reason: e.to_string() }),
        }
    }
    Ok(out)
}

/// Check a complete cache against its summary hash.
pub fn verify_hash(path: &Path) -> Result<bool> {
    let loaded = load(path)?;
    let summary = loaded.summary.ok_or_else(|| Error::Parse(format!("{} has no summary line", path.display())))?;
    let mut h = Sha256::new();
    for r in &loaded.records {
        h.update(record_line(r)?.as_bytes());
    }
    Ok(loaded.corrupt.is_empty() && hex::encode(h.finalize()) == summary.sha256)
}

fn record_line(r: &ScanRecord) -> Result<String> {
    let mut s = serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn status_counts(records: &[ScanRecord]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.status.to_string()).or_insert(0) += 1;
    }
    counts
}

/// Scan with a cache at `path`. A complete cache for the same degree and
/// bound is returned as is; otherwise records found in `path` or its
/// partial file are reused and the rest computed.
pub fn scan_cached(
    degree: ScanDegree,
    qmax: u128,
    opts: ScanOptions,
    path: &Path,
    chunk: usize,
) -> Result<CachedScan> {
    let partial = partial_path(path);
    let mut corrupt = Vec::new();
    let mut known: HashMap<(u128, u32), ScanRecord> = HashMap::new();
    for p in [path, partial.as_path()] {
        if !p.exists() {
            continue;
        }
        let loaded = load(p)?;
        corrupt.extend(loaded.corrupt.iter().cloned());
        if p == path && loaded.corrupt.is_empty() {
            if let Some(s) = &loaded.summary {
                if s.degree == degree && s.qmax == qmax && s.records == loaded.records.len() {
                    let reused = loaded.records.len();
                    return Ok(CachedScan { records: loaded.records, summary: s.clone(), reused, corrupt });
                }
            }
        }
        for r in loaded.records {
            known.entry((r.q, r.n)).or_insert(r);
        }
    }

    let targets = scan_targets(degree, qmax)?;
    let mut writer = BufWriter::new(File::create(&partial)?);
    let mut hasher = Sha256::new();
    let mut records = Vec::with_capacity(targets.len());
    let mut reused = 0;
    for block in targets.chunks(chunk.max(1)) {
        let todo: Vec<(u128, u32)> = block.iter().copied().filter(|k| !known.contains_key(k)).collect();
        let fresh = par::map(opts.exec, &todo, |&(q, n)| scan_record(q, n, opts));
        let mut fresh = fresh.into_iter();
        for key in block {
            let rec = match known.remove(key) {
                Some(r) => {
                    reused += 1;
                    r
                }
                None => fresh.next().expect("one fresh record per missing pair"),
            };
            let line = record_line(&rec)?;
            hasher.update(line.as_bytes());
            writer.write_all(line.as_bytes())?;
            records.push(rec);
        }
        writer.flush()?;
    }
    let summary = ScanSummary {
        degree,
        qmax,
        records: records.len(),
        counts: status_counts(&records),
        sha256: hex::encode(hasher.finalize()),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    let line = serde_json::to_string(&SummaryLine { summary: summary.clone() }).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(writer, "{line}")?;
    writer.flush()?;
    drop(writer);
    fs::rename(&partial, path)?;
    Ok(CachedScan { records, summary, reused, corrupt })
}
