//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.
//!
//! Run alone with `cargo test -p palinsum-cli --test acceptance`.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use palinsum::harness::{
    random_inputs, resolve_threads, run_compare, run_sweep, run_timed, with_pool, Certificate,
    Strategy,
};
use palinsum::oracle::{enumerate, is_palindrome_u64, SearchOutcome, Searcher};
use palinsum::{
    decompose, in_base_case, pass_once, preprocess, sparse_decompose, verify_certificate, Format,
    Method, Numeral,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SWEEP_UPPER: u64 = 100_000;
const BASES: std::ops::RangeInclusive<u64> = 2..=16;
const RANDOM_PER_BASE: usize = 10_000;
const RANDOM_MIN_LEN: usize = 9;
const RANDOM_LEN_SPAN: usize = 64;
const BASE_CASE_LIMIT: usize = 16;
const RATIO_LIMIT: f64 = 7.0;
const ORACLE_UPPER: u64 = 10_000;
const SCALE_DIGITS: usize = 10_000;
const SCALE_COUNT: usize = 10;
const SCALE_SECONDS: f64 = 1.0;
const SEED: u64 = 0x5eed;

fn count_bound(d: u64) -> usize {
    6 * d as usize + 12
}

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// What one input contributes to criteria 1, 3, 4, 5 and 8.
#[derive(Default)]
struct Observed {
    count: usize,
    constructive: bool,
    certificate_ok: bool,
    stage0: Option<(usize, usize)>,
    pass_calls: usize,
    loop_violations: Vec<String>,
    shape_violations: Vec<String>,
    preprocess_violations: Vec<String>,
    preprocess_calls: usize,
}

/// Independent check in machine integers: no `Numeral` arithmetic involved.
fn independent_ok(n: u64, base: u64, parts: &[Numeral]) -> bool {
    let mut total: u64 = 0;
    for p in parts {
        let Some(v) = p.to_u64() else { return false };
        if v == 0 || !is_palindrome_u64(v, base) {
            return false;
        }
        total += v;
    }
    total == n
}

/// Replays the staged reduction directly through `preprocess` / `pass_once`
/// and checks their postconditions on the returned values.
fn trace_reduction(n: &Numeral, obs: &mut Observed) {
    let base = n.base();
    let d = base as usize;
    let top = (base - 1) as u32;
    let l = n.len();
    let pre = match preprocess(n) {
        Ok(p) => p,
        Err(e) => {
            obs.preprocess_violations.push(e.to_string());
            return;
        }
    };
    obs.preprocess_calls += 1;
    let reduced = &pre.reduced;
    let form = reduced.len() == l - 1 && (l - 4..l - 1).all(|j| reduced.digit_at(j) == top);
    let m_floor = Numeral::from_u64(base * (base - 2), base).unwrap();
    let m_ceiling = Numeral::power(base, l - 4).unwrap();
    let m_ok = pre.m >= m_floor && pre.m < m_ceiling;
    let mut rebuilt = reduced.clone();
    for t in &pre.t_parts {
        rebuilt.add_assign(&t.value()).unwrap();
    }
    if !form || !m_ok || &rebuilt != n || pre.t_parts.iter().any(|t| t.low != 0) {
        obs.preprocess_violations
            .push(format!("n = {n}: form {form}, m range {m_ok}"));
    }

    let mut current = pre.reduced.clone();
    let mut k = 0;
    let mut lowered = false;
    while current.len() >= k + 6 {
        let stage = match pass_once(&current, k) {
            Ok(s) => s,
            Err(e) => {
                obs.shape_violations.push(e.to_string());
                return;
            }
        };
        obs.pass_calls += 1;
        if k == 0 && stage.r_part.c == 0 && !lowered {
            current.sub_monomial(1, 0).unwrap();
            lowered = true;
            continue;
        }
        if stage.loop1_count > d - 1 || stage.loop2_count > d {
            obs.loop_violations.push(format!(
                "n = {n}, k = {k}: loops ({}, {})",
                stage.loop1_count, stage.loop2_count
            ));
        }
        let rem = &stage.remainder;
        if rem.len() + 1 != current.len() || (0..=k).any(|j| rem.digit_at(j) != 0) {
            obs.shape_violations
                .push(format!("n = {n}, k = {k}: remainder {rem:?}"));
        }
        if k == 0 {
            obs.stage0 = Some((stage.loop1_count, stage.loop2_count));
        }
        current = stage.remainder;
        k += 1;
    }
}

fn observe(n: &Numeral, machine: Option<u64>) -> Observed {
    let mut obs = Observed::default();
    match decompose(n) {
        Ok(dec) => {
            obs.count = dec.count;
            obs.constructive = dec.method == Method::Construct;
            obs.certificate_ok = verify_certificate(&dec).is_ok()
                && machine.is_none_or(|v| independent_ok(v, n.base(), &dec.parts));
            if let Some(s0) = dec.stage_report.stage0() {
                // The certificate's own counters must agree with the replay below.
                obs.stage0 = Some((s0.loop1, s0.loop2));
            }
        }
        Err(e) => obs.shape_violations.push(e.to_string()),
    }
    if !in_base_case(n) {
        let from_certificate = obs.stage0;
        trace_reduction(n, &mut obs);
        if from_certificate.is_some() && from_certificate != obs.stage0 {
            obs.shape_violations.push(format!(
                "n = {n}: certificate counters disagree with replay"
            ));
        }
    }
    obs
}

#[derive(Default)]
struct BaseTally {
    inputs: usize,
    failures: Vec<String>,
    max_count: usize,
    argmax: String,
    stage0: BTreeMap<(usize, usize), usize>,
    pass_calls: usize,
    preprocess_calls: usize,
    loop_violations: Vec<String>,
    shape_violations: Vec<String>,
    preprocess_violations: Vec<String>,
}

impl BaseTally {
    fn absorb(&mut self, label: String, obs: Observed) {
        self.inputs += 1;
        if !obs.certificate_ok {
            self.failures.push(label.clone());
        }
        if obs.count > self.max_count {
            self.max_count = obs.count;
            self.argmax = label;
        }
        if obs.constructive {
            if let Some(s0) = obs.stage0 {
                *self.stage0.entry(s0).or_insert(0) += 1;
            }
        }
        self.pass_calls += obs.pass_calls;
        self.preprocess_calls += obs.preprocess_calls;
        self.loop_violations.extend(obs.loop_violations);
        self.shape_violations.extend(obs.shape_violations);
        self.preprocess_violations.extend(obs.preprocess_violations);
    }
}

fn sweep_corpus(base: u64) -> BaseTally {
    let observed: Vec<Observed> = (0..SWEEP_UPPER as usize + 1)
        .into_par_iter()
        .map(|n| observe(&Numeral::from_u64(n as u64, base).unwrap(), Some(n as u64)))
        .collect();
    let mut tally = BaseTally::default();
    for (n, obs) in observed.into_iter().enumerate() {
        tally.absorb(n.to_string(), obs);
    }
    tally
}

fn random_corpus(base: u64) -> BaseTally {
    let observed: Vec<(String, Observed)> = (0..RANDOM_PER_BASE)
        .into_par_iter()
        .map(|i| {
            let len = RANDOM_MIN_LEN + i % RANDOM_LEN_SPAN;
            let seed = SEED ^ (base << 32) ^ i as u64;
            let n = random_inputs(base, len, 1, seed).unwrap().remove(0);
            (format!("{n:?}"), observe(&n, None))
        })
        .collect();
    let mut tally = BaseTally::default();
    for (label, obs) in observed {
        tally.absorb(label, obs);
    }
    tally
}

fn first<T: std::fmt::Display>(items: &[T]) -> String {
    items.first().map(|x| x.to_string()).unwrap_or_default()
}

fn lemma_criteria(
    sweep: &BTreeMap<u64, BaseTally>,
    random: &BTreeMap<u64, BaseTally>,
) -> Vec<Outcome> {
    let mut out = Vec::new();
    let all = || sweep.values().chain(random.values());

    // 1. Correctness over the full range.
    let failures: Vec<String> = sweep
        .iter()
        .flat_map(|(d, t)| t.failures.iter().map(move |n| format!("d={d} n={n}")))
        .collect();
    let inputs: usize = sweep.values().map(|t| t.inputs).sum();
    out.push(Outcome {
        name: "C1 correctness sweep d=2..16, n<=1e5",
        pass: failures.is_empty(),
        detail: format!(
            "{inputs} certificates, {} failures {}",
            failures.len(),
            first(&failures)
        )
        .trim_end()
        .to_string(),
    });

    // 2. Count bound, then the ratio clause.
    let over: Vec<String> = sweep
        .iter()
        .filter(|(d, t)| t.max_count > count_bound(**d))
        .map(|(d, t)| format!("d={d}: {} > {}", t.max_count, count_bound(*d)))
        .collect();
    let maxima: Vec<String> = sweep
        .iter()
        .map(|(d, t)| format!("{d}:{}", t.max_count))
        .collect();
    out.push(Outcome {
        name: "C2a max_count(d) <= 6d+12",
        pass: over.is_empty(),
        detail: format!("max counts {} {}", maxima.join(" "), over.join("; ")),
    });
    let ratio_over: Vec<String> = sweep
        .iter()
        .filter(|(d, t)| t.max_count as f64 / **d as f64 > RATIO_LIMIT)
        .map(|(d, t)| {
            format!(
                "d={d}: {}/{d} = {:.2} (n={})",
                t.max_count,
                t.max_count as f64 / *d as f64,
                t.argmax
            )
        })
        .collect();
    out.push(Outcome {
        name: "C2b max_count(d)/d <= 7",
        pass: ratio_over.is_empty(),
        detail: if ratio_over.is_empty() {
            "all bases within ratio".into()
        } else {
            format!("exceeded: {}", ratio_over.join("; "))
        },
    });

    // 3. Loop bounds on every pass.
    let loops: Vec<&String> = all().flat_map(|t| &t.loop_violations).collect();
    let calls: usize = all().map(|t| t.pass_calls).sum();
    out.push(Outcome {
        name: "C3 loop1 <= d-1, loop2 <= d",
        pass: loops.is_empty(),
        detail: format!(
            "{calls} passes, {} violations {}",
            loops.len(),
            first(&loops)
        ),
    });

    // 4. Remainder shape.
    let shapes: Vec<&String> = all().flat_map(|t| &t.shape_violations).collect();
    out.push(Outcome {
        name: "C4 pass remainder one digit shorter, zero at positions <= k",
        pass: shapes.is_empty(),
        detail: format!(
            "{calls} passes, {} violations {}",
            shapes.len(),
            first(&shapes)
        ),
    });

    // 5. Preprocessing form and m range.
    let pre: Vec<&String> = all().flat_map(|t| &t.preprocess_violations).collect();
    let pre_calls: usize = all().map(|t| t.preprocess_calls).sum();
    out.push(Outcome {
        name: "C5 preprocess form, d^2-2d <= m < d^(l-4)",
        pass: pre.is_empty(),
        detail: format!(
            "{pre_calls} calls, {} violations {}",
            pre.len(),
            first(&pre)
        ),
    });

    // 8. Stage-0 exact loop counts on the constructive inputs of criterion 1.
    // Expected: loop1 = d-1; loop2 = d for d = 2 and d-1 for d >= 3. The only
    // tolerated deviation is the documented one: loop2 = d for every d >= 3,
    // which fills all second-loop slots and makes the split unnecessary.
    let mut undocumented = Vec::new();
    let mut documented = 0usize;
    let mut constructive = 0usize;
    for (&d, t) in sweep {
        let d = d as usize;
        let loop2_expected = if d == 2 { 2 } else { d - 1 };
        for (&(l1, l2), &hits) in &t.stage0 {
            constructive += hits;
            if l1 == d - 1 && l2 == loop2_expected {
                continue;
            }
            if l1 == d - 1 && d >= 3 && l2 == d {
                documented += hits;
            } else {
                undocumented.push(format!("d={d}: ({l1},{l2}) x{hits}"));
            }
        }
    }
    out.push(Outcome {
        name: "C8 stage-0 exact loop counts",
        pass: undocumented.is_empty() && constructive > 0,
        detail: format!(
            "{constructive} constructive inputs; {documented} documented counterexamples \
             (loop2 = d, not d-1, for d >= 3); undocumented: {}",
            if undocumented.is_empty() {
                "none".to_string()
            } else {
                undocumented.join("; ")
            }
        ),
    });
    out
}

fn criterion_sparse() -> Outcome {
    let bad: Vec<String> = BASES
        .into_par_iter()
        .flat_map_iter(|d| {
            (0..=SWEEP_UPPER).filter_map(move |v| {
                let n = Numeral::from_u64(v, d).unwrap();
                let parts = sparse_decompose(&n);
                let ok = parts.len() <= 2 * n.nonzero_digit_count() && independent_ok(v, d, &parts);
                (!ok).then(|| format!("d={d} n={v}"))
            })
        })
        .collect();
    Outcome {
        name: "C6 sparse decomposition <= 2 per nonzero digit",
        pass: bad.is_empty(),
        detail: format!("{} violations {}", bad.len(), first(&bad)),
    }
}

fn criterion_base_case() -> Outcome {
    let mut cases: Vec<(u64, u64)> = (0..=257).map(|n| (2, n)).collect();
    cases.extend((0..=6562).map(|n| (3, n)));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    cases.extend((0..10_000).map(|_| (10, rng.gen_range(0..=100_000_001u64))));
    let total = cases.len();
    let bad: Vec<String> = cases
        .into_par_iter()
        .filter_map(|(d, v)| {
            let n = Numeral::from_u64(v, d).unwrap();
            let ok = in_base_case(&n)
                && decompose(&n).is_ok_and(|dec| {
                    dec.method == Method::Sparse
                        && dec.count <= BASE_CASE_LIMIT
                        && independent_ok(v, d, &dec.parts)
                });
            (!ok).then(|| format!("d={d} n={v}"))
        })
        .collect();
    Outcome {
        name: "C7 base case n <= d^8+1 uses <= 16 parts",
        pass: bad.is_empty(),
        detail: format!("{total} inputs, {} violations {}", bad.len(), first(&bad)),
    }
}

fn criterion_oracle(threads: usize) -> Outcome {
    let mut problems = Vec::new();
    let mut rows_checked = 0;
    for d in [2u64, 10] {
        match run_compare(d, ORACLE_UPPER, threads, 8) {
            Ok(rows) => {
                rows_checked += rows.len();
                for r in rows.iter().filter(|r| r.gap().is_none_or(|g| g < 0)) {
                    problems.push(format!("d={d} n={} gap {:?}", r.n, r.gap()));
                }
            }
            Err(e) => problems.push(format!("d={d}: {e}")),
        }
        let table = enumerate(d, ORACLE_UPPER).unwrap();
        let mut searcher = Searcher::new(&table);
        for n in 0..=ORACLE_UPPER {
            match searcher.minimal(n, 8) {
                Ok(SearchOutcome::Found(w)) => {
                    let ok = w.iter().sum::<u64>() == n
                        && w.iter().all(|&p| p > 0 && is_palindrome_u64(p, d));
                    if !ok {
                        problems.push(format!("d={d} n={n}: bad witness {w:?}"));
                    }
                }
                other => problems.push(format!("d={d} n={n}: {other:?}")),
            }
        }
    }
    let table = enumerate(10, 21).unwrap();
    let twenty_one = Searcher::new(&table)
        .minimal(21, 8)
        .ok()
        .and_then(|o| o.count());
    if twenty_one != Some(3) {
        problems.push(format!("minimal_count(21, base 10) = {twenty_one:?}"));
    }
    Outcome {
        name: "C9 oracle dominance and soundness",
        pass: problems.is_empty(),
        detail: format!(
            "{rows_checked} rows, minimal(21) = {twenty_one:?}, {} problems {}",
            problems.len(),
            first(&problems)
        ),
    }
}

fn scale_format(base: u64) -> Format {
    if base <= 10 {
        Format::Decimal
    } else {
        Format::DigitList
    }
}

fn scale_certificates(threads: usize) -> Result<(Vec<String>, Duration), String> {
    let mut lines = Vec::new();
    let mut slowest = Duration::ZERO;
    for base in [2u64, 10, 64] {
        let inputs =
            random_inputs(base, SCALE_DIGITS, SCALE_COUNT, SEED).map_err(|e| e.to_string())?;
        let runs = run_timed(&inputs, threads, Strategy::default()).map_err(|e| e.to_string())?;
        for run in runs {
            slowest = slowest.max(run.elapsed);
            let cert = Certificate::from_decomposition(&run.decomposition, scale_format(base));
            lines.push(cert.to_json());
        }
    }
    Ok((lines, slowest))
}

fn criterion_scale(jsonl: &str, slowest: Duration) -> Outcome {
    let mut problems = Vec::new();
    let certs: Vec<Certificate> = jsonl
        .lines()
        .map(|l| Certificate::from_json(l).unwrap())
        .collect();
    if certs.len() != 3 * SCALE_COUNT {
        problems.push(format!("{} certificates", certs.len()));
    }
    problems.extend(
        certs
            .iter()
            .filter(|c| !c.verified || c.check().is_err())
            .map(|c| format!("base {} certificate rejected", c.base)),
    );
    if slowest.as_secs_f64() >= SCALE_SECONDS {
        problems.push(format!(
            "slowest decomposition {:.3}s",
            slowest.as_secs_f64()
        ));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scale.jsonl");
    std::fs::write(&path, jsonl).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_palinsum"))
        .args(["verify", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    if !status.status.success() {
        problems.push(format!("`palinsum verify` exited with {}", status.status));
    }
    Outcome {
        name: "C10 scale: 10^4-digit inputs in bases 2, 10, 64",
        pass: problems.is_empty(),
        detail: format!(
            "{} certificates, slowest {:.3}s (limit {SCALE_SECONDS}s), {}",
            certs.len(),
            slowest.as_secs_f64(),
            if problems.is_empty() {
                "re-verified by `palinsum verify`".to_string()
            } else {
                problems.join("; ")
            }
        ),
    }
}

fn sweep_csv(threads: usize) -> Vec<u8> {
    let mut buf = Vec::new();
    for d in BASES {
        let report = run_sweep(d, SWEEP_UPPER, threads, Strategy::default()).unwrap();
        report.write_detail_csv(&mut buf).unwrap();
        report.write_summary_csv(&mut buf).unwrap();
    }
    buf
}

fn criterion_determinism(threads: usize, scale_jsonl: &str) -> Outcome {
    let mut problems = Vec::new();
    let reference = sweep_csv(threads);
    for t in [1, 3, threads] {
        if sweep_csv(t) != reference {
            problems.push(format!("sweep CSV differs at {t} threads"));
        }
    }
    for t in [1, threads] {
        match scale_certificates(t) {
            Ok((lines, _)) if lines.join("\n") + "\n" == scale_jsonl => {}
            Ok(_) => problems.push(format!("scale JSON differs at {t} threads")),
            Err(e) => problems.push(e),
        }
    }
    Outcome {
        name: "C11 determinism across runs and thread counts",
        pass: problems.is_empty(),
        detail: format!(
            "sweep CSV {} bytes, scale JSON {} bytes; {}",
            reference.len(),
            scale_jsonl.len(),
            if problems.is_empty() {
                "byte-identical".into()
            } else {
                problems.join("; ")
            }
        ),
    }
}

fn main() {
    let threads = resolve_threads(None);
    let started = Instant::now();
    let mut outcomes = Vec::new();

    let (sweep, random) = with_pool(threads, || {
        let sweep: BTreeMap<u64, BaseTally> = BASES.map(|d| (d, sweep_corpus(d))).collect();
        let random: BTreeMap<u64, BaseTally> = BASES.map(|d| (d, random_corpus(d))).collect();
        (sweep, random)
    })
    .unwrap();
    outcomes.extend(lemma_criteria(&sweep, &random));
    outcomes.push(with_pool(threads, criterion_sparse).unwrap());
    outcomes.push(with_pool(threads, criterion_base_case).unwrap());
    outcomes.push(criterion_oracle(threads));

    // Timed serially so each measurement has a core to itself.
    let scale = scale_certificates(1);
    let scale_jsonl = match &scale {
        Ok((lines, _)) => lines.join("\n") + "\n",
        Err(_) => String::new(),
    };
    outcomes.push(match scale {
        Ok((_, slowest)) => criterion_scale(&scale_jsonl, slowest),
        Err(e) => Outcome {
            name: "C10 scale: 10^4-digit inputs in bases 2, 10, 64",
            pass: false,
            detail: e,
        },
    });
    outcomes.push(criterion_determinism(threads, &scale_jsonl));

    outcomes.sort_by_key(|o| {
        let digits: String = o.name[1..]
            .chars()
            .take_while(char::is_ascii_digit)
            .collect();
        (digits.parse::<u32>().unwrap_or(0), o.name)
    });
    println!();
    for o in &outcomes {
        println!(
            "[{}] {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!(
        "\nacceptance: {} passed, {failed} failed in {:.1}s",
        outcomes.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
