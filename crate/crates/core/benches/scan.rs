use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use twoprim::par::Execution;
use twoprim::pipeline::scan::{scan, ScanDegree, ScanMode, ScanOptions};
use twoprim::pipeline::verify_pair;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn census(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_pair");
    g.sample_size(10);
    for (q, n) in [(169u128, 2u32), (27, 4), (121, 3)] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, format!("{q}^{n}")), &(q, n), |b, &(q, n)| {
                b.iter(|| verify_pair(q, n, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn scans(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan");
    g.sample_size(10);
    for (degree, qmax) in [(ScanDegree::Two, 50_000u128), (ScanDegree::Three, 50_000)] {
        for (name, exec) in MODES {
            let opts = ScanOptions { mode: ScanMode::CriteriaOnly, exec };
            g.bench_with_input(BenchmarkId::new(name, format!("n{degree}-{qmax}")), &qmax, |b, &qmax| {
                b.iter(|| scan(degree, qmax, opts).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, census, scans);
criterion_main!(benches);
