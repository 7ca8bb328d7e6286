use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use palinsum::harness::{
    decompose_by, random_inputs, resolve_threads, run_compare, run_sweep, run_timed,
    write_compare_csv, Certificate, HarnessError, Strategy,
};
use palinsum::oracle::DEFAULT_DEPTH_LIMIT;
use palinsum::{DecomposeOptions, Format, Method, Numeral};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "palinsum",
    version,
    about = "Write natural numbers as sums of base-d palindromes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose numbers and print one JSON certificate per input.
    Decompose(DecomposeArgs),
    /// Re-check JSON certificates.
    Verify(VerifyArgs),
    /// Decompose every n in [0, N] and write detail and summary CSVs.
    Sweep(SweepArgs),
    /// Compare constructive counts against the brute-force minimum on [0, N].
    Compare(CompareArgs),
    /// Decompose seeded random numbers of a fixed digit length.
    Random(RandomArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FormatArg {
    Decimal,
    Digits,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Decimal => Format::Decimal,
            FormatArg::Digits => Format::DigitList,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MethodArg {
    Construct,
    Sparse,
    Optimal,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Construct => Method::Construct,
            MethodArg::Sparse => Method::Sparse,
            MethodArg::Optimal => Method::Optimal,
        }
    }
}

#[derive(Args, Debug)]
struct StrategyArgs {
    #[arg(long, value_enum, default_value = "construct")]
    method: MethodArg,
    /// Return palindromic inputs unchanged instead of running the construction.
    #[arg(long)]
    shortcut: bool,
    /// Depth limit for the optimal search.
    #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
    depth: usize,
}

impl StrategyArgs {
    fn strategy(&self) -> Strategy {
        Strategy {
            method: self.method.into(),
            options: DecomposeOptions {
                shortcut: self.shortcut,
            },
            depth_limit: Some(self.depth),
        }
    }
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, default_value_t = 10)]
    base: u64,
    /// A single number; otherwise numbers are read one per line from --input or stdin.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "decimal")]
    format: FormatArg,
    #[command(flatten)]
    strategy: StrategyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Certificate file, one JSON object per line; stdin when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    base: u64,
    /// Inclusive upper end of the range.
    #[arg(long)]
    upper: u64,
    #[command(flatten)]
    strategy: StrategyArgs,
    /// Detail CSV path; the summary goes next to it as `<stem>.summary.csv`.
    /// Without it the detail goes to stdout and the summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to PALINSUM_THREADS, then to the core count. 0 means automatic.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    base: u64,
    #[arg(long)]
    upper: u64,
    #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to PALINSUM_THREADS, then to the core count. 0 means automatic.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct RandomArgs {
    #[arg(long)]
    base: u64,
    /// Number of base-d digits in every generated input.
    #[arg(long)]
    digits: usize,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "digits")]
    format: FormatArg,
    #[command(flatten)]
    strategy: StrategyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to PALINSUM_THREADS, then to the core count. 0 means automatic.
    #[arg(long)]
    threads: Option<usize>,
}

/// A failure carrying the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }

    fn verify(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_VERIFY,
            error: error.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::verify(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::verify(e)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Numeral(_) | HarnessError::Json(_) => Failure::input(e),
            other => Failure::verify(other),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_lines(path: Option<&Path>) -> anyhow::Result<Vec<String>> {
    let reader: Box<dyn BufRead> = match path {
        Some(p) => Box::new(BufReader::new(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
        )),
        None => Box::new(BufReader::new(io::stdin().lock())),
    };
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    Ok(lines)
}

fn cmd_decompose(args: &DecomposeArgs) -> CmdResult {
    let format: Format = args.format.into();
    let texts = match &args.n {
        Some(n) => vec![n.clone()],
        None => read_lines(args.input.as_deref()).map_err(Failure::input)?,
    };
    let inputs = texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Numeral::parse(t, args.base, format)
                .with_context(|| format!("input line {}: `{t}`", i + 1))
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(Failure::input)?;

    let mut out = open_output(args.out.as_deref())?;
    let mut failed = 0usize;
    for n in &inputs {
        match decompose_by(n, args.strategy.strategy()) {
            Ok(d) => {
                let cert = Certificate::from_decomposition(&d, format);
                if !cert.verified {
                    failed += 1;
                    eprintln!("certificate for {n} failed verification");
                }
                writeln!(out, "{}", cert.to_json())?;
            }
            Err(e) => {
                failed += 1;
                eprintln!("decomposition of {n} failed: {e}");
            }
        }
    }
    out.flush()?;
    if failed > 0 {
        return Err(Failure::verify(anyhow::anyhow!(
            "{failed} of {} inputs did not produce a verified certificate",
            inputs.len()
        )));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let lines = read_lines(args.input.as_deref()).map_err(Failure::input)?;
    let certs = lines
        .iter()
        .enumerate()
        .map(|(i, l)| Certificate::from_json(l).with_context(|| format!("line {}", i + 1)))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(Failure::input)?;
    let mut out = open_output(args.out.as_deref())?;
    let mut failed = 0usize;
    for (i, cert) in certs.iter().enumerate() {
        match cert.check() {
            Ok(()) => writeln!(out, "line {}: ok ({} parts)", i + 1, cert.count)?,
            Err(e) => {
                failed += 1;
                writeln!(out, "line {}: FAILED: {e}", i + 1)?;
            }
        }
    }
    out.flush()?;
    if failed > 0 {
        return Err(Failure::verify(anyhow::anyhow!(
            "{failed} of {} certificates failed",
            certs.len()
        )));
    }
    Ok(())
}

fn summary_path(detail: &Path) -> PathBuf {
    let stem = detail
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    detail.with_file_name(format!("{stem}.summary.csv"))
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let threads = resolve_threads(args.threads);
    let report = run_sweep(args.base, args.upper, threads, args.strategy.strategy())?;
    match &args.out {
        Some(path) => {
            let mut detail = open_output(Some(path))?;
            report.write_detail_csv(&mut detail)?;
            detail.flush()?;
            let mut summary = open_output(Some(&summary_path(path)))?;
            report.write_summary_csv(&mut summary)?;
            summary.flush()?;
        }
        None => {
            let mut detail = open_output(None)?;
            report.write_detail_csv(&mut detail)?;
            detail.flush()?;
            report.write_summary_csv(io::stderr().lock())?;
        }
    }
    for v in &report.violations {
        eprintln!("violation at n = {}: {}", v.n, v.detail);
    }
    if !report.all_verified() {
        return Err(Failure::verify(anyhow::anyhow!(
            "{} violations in base {}",
            report.violations.len(),
            args.base
        )));
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let threads = resolve_threads(args.threads);
    let rows = run_compare(args.base, args.upper, threads, args.depth)?;
    let mut out = open_output(args.out.as_deref())?;
    write_compare_csv(&rows, &mut out)?;
    out.flush()?;
    let bad: Vec<u64> = rows
        .iter()
        .filter(|r| r.gap().is_none_or(|g| g < 0))
        .map(|r| r.n)
        .collect();
    if !bad.is_empty() {
        return Err(Failure::verify(anyhow::anyhow!(
            "{} rows without a nonnegative gap, first at n = {}",
            bad.len(),
            bad[0]
        )));
    }
    Ok(())
}

fn cmd_random(args: &RandomArgs) -> CmdResult {
    let format: Format = args.format.into();
    let inputs =
        random_inputs(args.base, args.digits, args.count, args.seed).map_err(Failure::input)?;
    let threads = resolve_threads(args.threads);
    let runs = run_timed(&inputs, threads, args.strategy.strategy())?;
    let mut out = open_output(args.out.as_deref())?;
    let mut failed = 0usize;
    for (i, run) in runs.iter().enumerate() {
        let cert = Certificate::from_decomposition(&run.decomposition, format);
        if !cert.verified {
            failed += 1;
        }
        writeln!(out, "{}", cert.to_json())?;
        eprintln!(
            "input {i}: {} parts in {:.3} ms",
            cert.count,
            run.elapsed.as_secs_f64() * 1e3
        );
    }
    out.flush()?;
    if let (Some(min), Some(max)) = (
        runs.iter().map(|r| r.elapsed).min(),
        runs.iter().map(|r| r.elapsed).max(),
    ) {
        let total: f64 = runs.iter().map(|r| r.elapsed.as_secs_f64()).sum();
        eprintln!(
            "timing: min {:.3} ms, mean {:.3} ms, max {:.3} ms",
            min.as_secs_f64() * 1e3,
            total / runs.len() as f64 * 1e3,
            max.as_secs_f64() * 1e3
        );
    }
    if failed > 0 {
        return Err(Failure::verify(anyhow::anyhow!(
            "{failed} certificates failed"
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Random(a) => cmd_random(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
