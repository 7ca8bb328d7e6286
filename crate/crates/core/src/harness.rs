//! Batch drivers behind the CLI: certificates, exhaustive sweeps, oracle
//! comparison and seeded random runs.
//!
//! Work is spread over a rayon pool but every result vector is collected in
//! input order, so the emitted CSV and JSON depend only on the inputs.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembler::{
    decompose_sparse, decompose_with, verify_certificate, verify_parts, DecomposeError,
    DecomposeOptions, Decomposition, Method, PassCounters, StageReport, VerifyFailure,
};
use crate::numeral::{Digit, Format, Numeral, NumeralError};
use crate::oracle::{enumerate, OracleError, SearchOutcome, Searcher, DEFAULT_DEPTH_LIMIT};

pub const THREADS_ENV: &str = "PALINSUM_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Numeral(#[from] NumeralError),
    #[error("no decomposition of {n} with at most {limit} palindromes found")]
    DepthExceeded { n: u64, limit: usize },
    #[error("{0} is too large for the optimal search")]
    TooLargeForOracle(String),
    #[error("certificate rejected: {0}")]
    Certificate(#[from] VerifyFailure),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Worker count: the explicit flag, else `PALINSUM_THREADS`, else available parallelism.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.filter(|&t| t > 0)
        .or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .filter(|&t: &usize| t > 0)
        })
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` inside a dedicated rayon pool of `threads` workers.
pub fn with_pool<R, F>(threads: usize, f: F) -> Result<R, HarnessError>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Strategy {
    pub method: Method,
    pub options: DecomposeOptions,
    pub depth_limit: Option<usize>,
}

/// Decomposes with the requested method. `Optimal` needs `n` to fit the oracle table.
pub fn decompose_by(n: &Numeral, strategy: Strategy) -> Result<Decomposition, HarnessError> {
    match strategy.method {
        Method::Construct => Ok(decompose_with(n, strategy.options)?),
        Method::Sparse => Ok(decompose_sparse(n)?),
        Method::Optimal => {
            let base = n.base();
            let value = n
                .to_u64()
                .ok_or_else(|| HarnessError::TooLargeForOracle(n.to_string()))?;
            let table = enumerate(base, value)?;
            let limit = strategy.depth_limit.unwrap_or(DEFAULT_DEPTH_LIMIT);
            match Searcher::new(&table).minimal(value, limit)? {
                SearchOutcome::Found(w) => {
                    let parts = w
                        .into_iter()
                        .map(|p| Numeral::from_u64(p, base))
                        .collect::<Result<Vec<_>, _>>()?;
                    let d = Decomposition::new(
                        n.clone(),
                        parts,
                        Method::Optimal,
                        StageReport::default(),
                    );
                    verify_certificate(&d)?;
                    Ok(d)
                }
                SearchOutcome::ExceedsLimit => Err(HarnessError::DepthExceeded { n: value, limit }),
            }
        }
    }
}

/// The JSON certificate. Field order is the wire order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub base: u64,
    pub n: String,
    pub parts: Vec<String>,
    pub count: usize,
    pub method: Method,
    pub verified: bool,
}

impl Certificate {
    pub fn from_decomposition(d: &Decomposition, format: Format) -> Self {
        Certificate {
            base: d.base,
            n: d.n.render(format),
            parts: d.parts.iter().map(|p| p.render(format)).collect(),
            count: d.count,
            method: d.method,
            verified: verify_certificate(d).is_ok(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Re-verifies from the text fields alone. Each field may be decimal or a digit list.
    pub fn check(&self) -> Result<(), HarnessError> {
        let n = Numeral::parse_auto(&self.n, self.base)?;
        let parts = self
            .parts
            .iter()
            .map(|p| Numeral::parse_auto(p, self.base))
            .collect::<Result<Vec<_>, _>>()?;
        if parts.len() != self.count {
            return Err(VerifyFailure::CountMismatch {
                declared: self.count,
                actual: parts.len(),
            }
            .into());
        }
        verify_parts(&n, &parts)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRecord {
    pub n: u64,
    pub count: usize,
    pub verified: bool,
    pub method: Method,
    pub stage_report: Option<StageReport>,
}

impl SweepRecord {
    pub fn stage0(&self) -> Option<&PassCounters> {
        self.stage_report.as_ref().and_then(StageReport::stage0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationRecord {
    pub n: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub base: u64,
    pub upper: u64,
    pub records: Vec<SweepRecord>,
    pub max_count: usize,
    pub argmax_n: u64,
    pub mean_count: f64,
    pub histogram: BTreeMap<usize, u64>,
    pub violations: Vec<ViolationRecord>,
}

impl SweepReport {
    fn from_records(base: u64, upper: u64, outcomes: Vec<(SweepRecord, Option<String>)>) -> Self {
        let mut records = Vec::with_capacity(outcomes.len());
        let mut violations = Vec::new();
        for (rec, violation) in outcomes {
            if let Some(detail) = violation {
                violations.push(ViolationRecord { n: rec.n, detail });
            }
            records.push(rec);
        }
        let mut max_count = 0;
        let mut argmax_n = 0;
        let mut total = 0u64;
        let mut histogram = BTreeMap::new();
        for r in &records {
            if r.count > max_count {
                max_count = r.count;
                argmax_n = r.n;
            }
            total += r.count as u64;
            *histogram.entry(r.count).or_insert(0) += 1;
        }
        let mean_count = if records.is_empty() {
            0.0
        } else {
            total as f64 / records.len() as f64
        };
        SweepReport {
            base,
            upper,
            records,
            max_count,
            argmax_n,
            mean_count,
            histogram,
            violations,
        }
    }

    pub fn all_verified(&self) -> bool {
        self.violations.is_empty() && self.records.iter().all(|r| r.verified)
    }

    pub fn write_detail_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "base,n,count,verified")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{}", self.base, r.n, r.count, r.verified)?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "base,max_count,argmax_n,mean_count,violations")?;
        writeln!(
            out,
            "{},{},{},{:.6},{}",
            self.base,
            self.max_count,
            self.argmax_n,
            self.mean_count,
            self.violations.len()
        )
    }
}

fn sweep_one(n: u64, base: u64, strategy: Strategy) -> (SweepRecord, Option<String>) {
    let numeral = Numeral::from_u64(n, base).expect("base validated before the sweep");
    match decompose_by(&numeral, strategy) {
        Ok(d) => {
            let verified = verify_certificate(&d).is_ok();
            let rec = SweepRecord {
                n,
                count: d.count,
                verified,
                method: d.method,
                stage_report: Some(d.stage_report),
            };
            let violation = (!verified).then(|| "certificate failed verification".to_string());
            (rec, violation)
        }
        Err(e) => (
            SweepRecord {
                n,
                count: 0,
                verified: false,
                method: strategy.method,
                stage_report: None,
            },
            Some(e.to_string()),
        ),
    }
}

/// Decomposes and verifies every `n` in `0..=upper` on `threads` workers.
pub fn run_sweep(
    base: u64,
    upper: u64,
    threads: usize,
    strategy: Strategy,
) -> Result<SweepReport, HarnessError> {
    crate::numeral::check_base(base)?;
    let outcomes = with_pool(threads, || {
        (0..upper as usize + 1)
            .into_par_iter()
            .with_min_len(256)
            .map(|n| sweep_one(n as u64, base, strategy))
            .collect::<Vec<_>>()
    })?;
    Ok(SweepReport::from_records(base, upper, outcomes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareRow {
    pub n: u64,
    pub construct_count: usize,
    /// `None` when the search exceeded its depth limit.
    pub optimal_count: Option<usize>,
}

impl CompareRow {
    pub fn gap(&self) -> Option<i64> {
        self.optimal_count
            .map(|o| self.construct_count as i64 - o as i64)
    }
}

/// Constructive count against the oracle's minimum for every `n` in `0..=upper`.
pub fn run_compare(
    base: u64,
    upper: u64,
    threads: usize,
    depth_limit: usize,
) -> Result<Vec<CompareRow>, HarnessError> {
    crate::numeral::check_base(base)?;
    let table = enumerate(base, upper)?;
    let rows = with_pool(threads, || {
        (0..upper as usize + 1)
            .into_par_iter()
            .with_min_len(256)
            .map_init(
                || Searcher::new(&table),
                |searcher, n| -> Result<CompareRow, HarnessError> {
                    let n = n as u64;
                    let numeral = Numeral::from_u64(n, base)?;
                    let construct = decompose_with(&numeral, DecomposeOptions::default())?;
                    let optimal = searcher.minimal(n, depth_limit)?.count();
                    Ok(CompareRow {
                        n,
                        construct_count: construct.count,
                        optimal_count: optimal,
                    })
                },
            )
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(rows)
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], mut out: W) -> io::Result<()> {
    writeln!(out, "n,construct_count,optimal_count,gap")?;
    for r in rows {
        let opt = r.optimal_count.map(|o| o.to_string()).unwrap_or_default();
        let gap = r.gap().map(|g| g.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", r.n, r.construct_count, opt, gap)?;
    }
    Ok(())
}

/// `count` numbers of exactly `digits` base-d digits drawn from a seeded ChaCha8 stream.
pub fn random_inputs(
    base: u64,
    digits: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Numeral>, NumeralError> {
    crate::numeral::check_base(base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut ds: Vec<Digit> = (0..digits)
                .map(|_| rng.gen_range(0..base) as Digit)
                .collect();
            if let Some(top) = ds.last_mut() {
                *top = rng.gen_range(1..base) as Digit;
            }
            Numeral::from_digits(base, ds)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TimedDecomposition {
    pub decomposition: Decomposition,
    pub elapsed: Duration,
}

/// Decomposes pre-generated inputs, timing each one.
pub fn run_timed(
    inputs: &[Numeral],
    threads: usize,
    strategy: Strategy,
) -> Result<Vec<TimedDecomposition>, HarnessError> {
    with_pool(threads, || {
        inputs
            .par_iter()
            .map(|n| {
                let start = Instant::now();
                let decomposition = decompose_by(n, strategy)?;
                Ok(TimedDecomposition {
                    decomposition,
                    elapsed: start.elapsed(),
                })
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?
}
