//! Brute-force verification, table-reproduction scans and their cache.

pub mod cache;
pub mod qr;
pub mod scan;
pub mod tables;
pub mod verify;

pub use cache::{scan_cached, ScanSummary};
pub use qr::{count_qr_exact, QrCount};
pub use scan::{scan, scan_record, ScanDegree, ScanMode, ScanOptions, ScanRecord, Status};
pub use tables::{reproduce_table, TableOptions, TableReport};
pub use verify::{verify_pair, verify_primitive, Target, TraceCoverage};
