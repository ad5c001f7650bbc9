use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twoprim::charsums::{self, MultChar};
use twoprim::criteria::{self, BetaClass, CriterionId, CriterionReport, SieveCount, Verdict};
use twoprim::ffield::{build_field, Extension, FFElem};
use twoprim::numtheory;
use twoprim::par::{self, Execution};
use twoprim::pipeline::cache::{scan_cached, DEFAULT_CHUNK};
use twoprim::pipeline::scan::{funnel, scan, ScanDegree, ScanMode, ScanOptions};
use twoprim::pipeline::{count_qr_exact, reproduce_table, verify_pair, verify_primitive, TableOptions};
use twoprim::{Error, Result};

#[derive(Parser)]
#[command(name = "twoprim", version, about = "2-primitive elements of finite fields with prescribed trace")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Run single-threaded.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factor a positive integer (up to 2^80).
    Factor { t: u128 },
    /// Integer invariants of (q, n).
    Decompose {
        #[arg(long)]
        q: u128,
        #[arg(long)]
        n: u32,
    },
    /// Evaluate a character sum literally.
    Charsum {
        #[command(subcommand)]
        kind: Charsum,
    },
    /// Exact counts by enumeration.
    Count {
        #[command(subcommand)]
        kind: Count,
    },
    /// Run the existence criteria on a pair.
    Check {
        #[arg(long)]
        q: u128,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "any")]
        beta_class: BetaClass,
        /// `auto` runs the full dispatch.
        #[arg(long, default_value = "auto")]
        criterion: String,
        /// Sieving primes for T, Z, E1, G1 and siev4 (omit for the greedy choice).
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u128>>,
        /// `m` for criterion H (default: the radical of q^n - 1).
        #[arg(long)]
        m: Option<u128>,
    },
    /// Enumerate the traces of all 2-primitive elements.
    Verify {
        #[arg(long)]
        q: u128,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Use primitive instead of 2-primitive elements.
        #[arg(long)]
        primitive: bool,
    },
    /// Scan a family of pairs.
    Scan {
        /// 2, 3 or high.
        #[arg(long)]
        n: ScanDegree,
        /// Default: the bound the search itself derives.
        #[arg(long)]
        qmax: Option<u128>,
        /// JSONL cache; without it records stream to stdout.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Skip the brute-force fallback.
        #[arg(long)]
        criteria_only: bool,
    },
    /// Regenerate a table and diff it against the expected data.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        /// Directory for scan caches.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// The t-range search for n = 2 or 3.
    Trange {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        t1: u32,
        #[arg(long)]
        t2: u32,
        #[arg(long, value_enum, default_value_t = Sieving::Max)]
        sieving: Sieving,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sieving {
    Max,
    OneLess,
}

/// A multiplicative character given by its order and index.
#[derive(clap::Args)]
struct CharArgs {
    #[arg(long)]
    order: u128,
    #[arg(long, default_value_t = 1)]
    index: u128,
}

#[derive(clap::Args)]
struct FieldArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
}

#[derive(Subcommand)]
enum Charsum {
    /// g(u) = sum psi(u xi^2) over F_{p^k}, with the closed-form prediction.
    Gauss {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "1")]
        u: String,
    },
    /// sum chi(xi) psi(u xi^r) with its bound.
    Hybrid {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        chi: CharArgs,
        #[arg(long, default_value = "1")]
        u: String,
        #[arg(long, default_value_t = 2)]
        r: u128,
    },
    /// sum_{alpha in F_q} chi(theta + alpha) in F_{q^2}.
    Katz {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        chi: CharArgs,
        /// Coordinates of theta in F_{q^2}.
        #[arg(long)]
        theta: String,
    },
    /// Both sides of the |X_b(chi)|^2 identity.
    A1 {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        chi: CharArgs,
        #[arg(long, default_value = "1")]
        b: String,
    },
}

#[derive(Subcommand)]
enum Count {
    /// Nonzero squares of F_{q^n} with trace beta: enumeration and closed form.
    Msquares {
        #[arg(long)]
        q: u128,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: String,
    },
    /// m-free xi with Tr(xi^2) = beta: enumeration and character sums.
    Nbeta {
        #[arg(long)]
        q: u128,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u128,
        #[arg(long)]
        beta: String,
    },
    /// Q_r for F_{q^2}.
    Qr {
        #[arg(long)]
        q: u128,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        r: Option<u128>,
    },
}

fn complex(z: num_complex::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im, "abs": z.norm() })
}

fn to_json<T: serde::Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Parse(e.to_string()))
}

/// Write to stdout, exiting quietly when the reader has gone away.
fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(s.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

fn print(v: &Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).unwrap_or_default()));
}

fn small(x: u128, what: &str) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::Capability(format!("{what} = {x} is too large")))
}

/// Parse an element of `F_q`, given as comma-separated coordinates.
fn base_elem(q: u128, s: &str) -> Result<FFElem> {
    let (p, e) = numtheory::prime_power(q).ok_or_else(|| Error::Domain(format!("{q} is not a prime power")))?;
    build_field(small(p, "p")?, e)?.parse(s)
}

fn charsum(kind: Charsum) -> Result<Value> {
    Ok(match kind {
        Charsum::Gauss { field, u } => {
            let f = build_field(field.p, field.k)?;
            let u = f.parse(&u)?;
            let g = charsums::gauss_sum(&f, &u)?;
            let predicted = if g.degenerate {
                Value::Null
            } else {
                match charsums::gauss_sign(field.p as u128, field.k, f.is_square(&u)) {
                    Ok(s) => json!({ "epsilon": s.epsilon, "sign": s.sign, "sum_nonzero": s.value.to_string(), "sum_nonzero_approx": s.value.to_f64() }),
                    Err(e) => json!({ "unavailable": e.to_string() }),
                }
            };
            json!({
                "field": f.size(), "u": u.to_string(),
                "value": complex(g.value), "twisted": complex(g.twisted),
                "degenerate": g.degenerate, "predicted": predicted,
            })
        }
        Charsum::Hybrid { field, chi, u, r } => {
            let f = build_field(field.p, field.k)?;
            let c = MultChar::new(f.size() as u128 - 1, chi.order, chi.index)?;
            let rep = charsums::hybrid_sum(&f, &c, &f.parse(&u)?, r)?;
            json!({ "character": to_json(&c)?, "sum": to_json(&rep)?, "within_bound": rep.within_bound() })
        }
        Charsum::Katz { q, chi, theta } => {
            let ext = Extension::new(q, 2)?;
            let c = MultChar::new(ext.field.size() as u128 - 1, chi.order, chi.index)?;
            let rep = charsums::katz_sum(&ext, &ext.field.parse(&theta)?, &c)?;
            json!({ "character": to_json(&c)?, "sum": to_json(&rep)?, "within_bound": rep.within_bound() })
        }
        Charsum::A1 { field, chi, b } => {
            let f = build_field(field.p, field.k)?;
            let c = MultChar::new(f.size() as u128 - 1, chi.order, chi.index)?;
            let a = charsums::a1_identity_check(&f, &c, &f.parse(&b)?)?;
            json!({
                "character": to_json(&c)?, "lhs": a.lhs, "rhs": complex(a.rhs),
                "c_abs": a.c_abs, "c_bound": a.c_bound, "holds": a.holds,
            })
        }
    })
}

fn count(kind: Count) -> Result<Value> {
    Ok(match kind {
        Count::Msquares { q, n, beta } => {
            let beta = base_elem(q, &beta)?;
            to_json(&charsums::count_squares_with_trace(q, n, &beta)?)?
        }
        Count::Nbeta { q, n, m, beta } => {
            let ext = Extension::new(small(q, "q")?, n)?;
            let beta = ext.base.parse(&beta)?;
            let exact = charsums::count_nbeta(&ext, m, &beta)?;
            let via = charsums::count_nbeta_charsum(&ext, m, &beta)?;
            json!({ "q": q, "n": n, "m": m, "beta": beta.to_string(), "exact": exact, "charsum": complex(via) })
        }
        Count::Qr { q, beta, r } => to_json(&count_qr_exact(q, &base_elem(q, &beta)?, r)?)?,
    })
}

fn wants(class: BetaClass, r: &CriterionReport) -> bool {
    class == BetaClass::Any || r.beta_class == BetaClass::Any || r.beta_class == class
}

/// Returns the output and whether every requested class is settled.
fn check(
    q: u128,
    n: u32,
    class: BetaClass,
    criterion: &str,
    primes: Option<Vec<u128>>,
    m: Option<u128>,
) -> Result<(Value, bool)> {
    if criterion == "auto" {
        let d = criteria::decide(q, n)?;
        let trail: Vec<&CriterionReport> = d.trail.iter().filter(|r| wants(class, r)).collect();
        let settled = match class {
            BetaClass::Zero => d.zero.settled(),
            BetaClass::Nonzero => d.nonzero.settled(),
            BetaClass::Any => d.settled(),
        };
        let out = json!({
            "q": q, "n": n, "class": to_json(&d.class)?,
            "order": d.order.as_ref().map(|f| f.to_string()),
            "zero": to_json(&d.zero)?, "nonzero": to_json(&d.nonzero)?,
            "settled": settled, "trail": to_json(&trail)?,
        });
        return Ok((out, settled));
    }
    let id: CriterionId = criterion.parse()?;
    let dec = numtheory::decompose(q, n)?;
    let report = match id {
        CriterionId::H => criteria::thm_h_check(&dec, m.unwrap_or(dec.q0))?,
        CriterionId::N => criteria::thm_n_check(&dec)?,
        CriterionId::N2 => criteria::prop_n2_check(&dec, m)?,
        CriterionId::N3 => criteria::n3_simple_check(&dec)?,
        CriterionId::Dt => criteria::dt_report(&dec)?,
        CriterionId::Generic => criteria::generic_report(q, n)?,
        CriterionId::OddPair => criteria::odd_pair_report(q, n)?,
        id if id.is_sieved() => match primes {
            Some(p) => criteria::sieved_check(&dec, id, &p)?,
            None => criteria::greedy_sieve(&dec, id)?.report,
        },
        other => return Err(Error::Domain(format!("{other} has no standalone check; use --criterion auto"))),
    };
    let proved = report.verdict == Verdict::Proved;
    Ok((to_json(&report)?, proved))
}

fn verify_tsv(cov: &twoprim::pipeline::TraceCoverage) -> String {
    let mut s = String::from("trace\tcount\n");
    for t in &cov.traces {
        s.push_str(&format!("{}\t{}\n", t.trace, t.count));
    }
    s.push_str(&format!("# total\t{}\n# covered\t{}\n# missing\t{}\n", cov.total, cov.covered, cov.missing.join(",")));
    s
}

fn default_qmax(n: ScanDegree) -> Result<u128> {
    use twoprim::pipeline::scan::{n2_search_bound, n3_search_bound};
    match n {
        ScanDegree::Two => Ok(n2_search_bound()),
        ScanDegree::Three => n3_search_bound(),
        ScanDegree::High => Ok(u64::MAX as u128),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Auto };
    match cli.cmd {
        Cmd::Factor { t } => {
            let f = numtheory::factorize(t)?;
            print(&json!({
                "t": t, "factorization": f.to_string(), "factors": to_json(&f.factors)?,
                "radical": f.radical(), "omega": f.omega(), "W": f.w(),
            }));
        }
        Cmd::Decompose { q, n } => print(&to_json(&numtheory::decompose(q, n)?)?),
        Cmd::Charsum { kind } => print(&charsum(kind)?),
        Cmd::Count { kind } => print(&count(kind)?),
        Cmd::Check { q, n, beta_class, criterion, primes, m } => {
            let (out, settled) = check(q, n, beta_class, &criterion.to_lowercase(), primes, m)?;
            print(&out);
            if !settled {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Verify { q, n, format, primitive } => {
            let cov = if primitive { verify_primitive(q, n, exec)? } else { verify_pair(q, n, exec)? };
            match format {
                Format::Json => print(&to_json(&cov)?),
                Format::Tsv => emit(&verify_tsv(&cov)),
            }
        }
        Cmd::Scan { n, qmax, cache, criteria_only } => {
            let qmax = match qmax {
                Some(q) => q,
                None => default_qmax(n)?,
            };
            let mode = if criteria_only { ScanMode::CriteriaOnly } else { ScanMode::BruteForce };
            let opts = ScanOptions { mode, exec };
            match cache {
                Some(path) => {
                    let res = scan_cached(n, qmax, opts, &path, DEFAULT_CHUNK)?;
                    for c in &res.corrupt {
                        eprintln!("{}:{}: skipped corrupt line: {}", path.display(), c.line, c.reason);
                    }
                    print(&json!({
                        "summary": to_json(&res.summary)?, "reused": res.reused,
                        "funnel": to_json(&funnel(n, &res.records))?,
                    }));
                }
                None => {
                    let records = scan(n, qmax, opts)?;
                    for r in &records {
                        emit(&format!("{}\n", serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?));
                    }
                    emit(&format!("{}\n", json!({ "funnel": to_json(&funnel(n, &records))? })));
                }
            }
        }
        Cmd::Table { id, cache_dir } => {
            let t = reproduce_table(id, &TableOptions { exec, cache_dir })?;
            emit(&t.rendered);
            for d in &t.diffs {
                eprintln!("diff row {} column {}: expected {:?}, got {:?}", d.row, d.column, d.expected, d.actual);
            }
            if !t.clean() {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Trange { n, t1, t2, sieving } => {
            let mode = match sieving {
                Sieving::Max => SieveCount::Max,
                Sieving::OneLess => SieveCount::OneLess,
            };
            print(&to_json(&criteria::t_range_algorithm(n, t1, t2, mode)?)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    match par::install(jobs, || run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
