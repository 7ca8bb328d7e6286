//! The full construction: base case, preprocessing, staged passes, the two
//! stage-0 repairs, slot assembly and the sparse tail.
//!
//! Each pass `k` contributes one row to a [`SlotMatrix`]: `d-1` first-loop
//! atoms, `d` second-loop atoms and one digit-clearing atom. Summing a
//! column across all rows puts each stage's spikes at mirrored positions
//! `k` and `h-k`, so the column sum is symmetric; it is a genuine palindrome
//! exactly when the stage-0 entry of the column is nonzero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeral::{Digit, Numeral};
use crate::palindrome::{is_palindrome, sparse_decompose, TwoSpike};
use crate::reduction::{pass_once, preprocess, StageOutput, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Construct,
    Sparse,
    Optimal,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Construct => "construct",
            Method::Sparse => "sparse",
            Method::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "construct" => Ok(Method::Construct),
            "sparse" => Ok(Method::Sparse),
            "optimal" => Ok(Method::Optimal),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyFailure {
    #[error("part {index} is in a different base")]
    BaseMismatch { index: usize },
    #[error("part {index} is zero")]
    ZeroPart { index: usize },
    #[error("part {index} is not a palindrome")]
    NotPalindrome { index: usize },
    #[error("parts do not sum to n")]
    SumMismatch,
    #[error("declared count {declared} but {actual} parts present")]
    CountMismatch { declared: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Reduction(#[from] Violation),
    #[error("stage-0 check failed for n = {n:?}: {detail} (counters {counters:?})")]
    Stage0 {
        n: Numeral,
        detail: String,
        counters: Option<PassCounters>,
    },
    #[error("slot collision at digit position {position}")]
    SlotCollision { position: usize },
    #[error("malformed slot row at stage {stage}: {detail}")]
    SlotRow { stage: usize, detail: String },
    #[error("self-check failed for n = {n:?}: {failure}")]
    SelfCheck { n: Numeral, failure: VerifyFailure },
}

/// Loop counters of one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassCounters {
    pub k: usize,
    pub loop1: usize,
    pub loop2: usize,
    /// Coefficient of the digit-clearing atom.
    pub c: Digit,
}

impl From<&StageOutput> for PassCounters {
    fn from(s: &StageOutput) -> Self {
        PassCounters {
            k: s.k,
            loop1: s.loop1_count,
            loop2: s.loop2_count,
            c: s.r_part.c,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub preprocess_loops: Option<[usize; 4]>,
    pub passes: Vec<PassCounters>,
    pub y_split_applied: bool,
    pub minus_one_applied: bool,
    pub shortcut_applied: bool,
    pub tail_parts: usize,
}

impl StageReport {
    pub fn stage0(&self) -> Option<&PassCounters> {
        self.passes.first()
    }
}

/// A decomposition of `n` into nonzero base-d palindromes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub base: u64,
    pub n: Numeral,
    pub parts: Vec<Numeral>,
    pub method: Method,
    pub count: usize,
    pub stage_report: StageReport,
}

impl Decomposition {
    pub fn new(n: Numeral, parts: Vec<Numeral>, method: Method, stage_report: StageReport) -> Self {
        Decomposition {
            base: n.base(),
            count: parts.len(),
            n,
            parts,
            method,
            stage_report,
        }
    }
}

/// Re-checks a decomposition from scratch: every part a nonzero
/// palindrome in the right base, the count consistent, and the parts summing to `n`.
pub fn verify_certificate(c: &Decomposition) -> Result<(), VerifyFailure> {
    if c.count != c.parts.len() {
        return Err(VerifyFailure::CountMismatch {
            declared: c.count,
            actual: c.parts.len(),
        });
    }
    verify_parts(&c.n, &c.parts)
}

pub fn verify_parts(n: &Numeral, parts: &[Numeral]) -> Result<(), VerifyFailure> {
    let base = n.base();
    let mut acc = Numeral::zero(base).expect("numeral base is valid");
    for (index, p) in parts.iter().enumerate() {
        if p.base() != base {
            return Err(VerifyFailure::BaseMismatch { index });
        }
        if p.is_zero() {
            return Err(VerifyFailure::ZeroPart { index });
        }
        if !is_palindrome(p) {
            return Err(VerifyFailure::NotPalindrome { index });
        }
        acc.add_assign(p).expect("bases checked");
    }
    if &acc != n {
        return Err(VerifyFailure::SumMismatch);
    }
    Ok(())
}

/// Per-stage atoms laid out in fixed slots: `d-1` first-loop slots, `d`
/// second-loop slots and one digit-clearing slot per stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotMatrix {
    pub base: u64,
    /// Length of the stage-0 input.
    pub l0: usize,
    pub s: Vec<Vec<TwoSpike>>,
    pub t: Vec<Vec<TwoSpike>>,
    pub r: Vec<TwoSpike>,
}

impl SlotMatrix {
    pub fn new(base: u64, l0: usize) -> Self {
        SlotMatrix {
            base,
            l0,
            s: Vec::new(),
            t: Vec::new(),
            r: Vec::new(),
        }
    }

    pub fn stages(&self) -> usize {
        self.r.len()
    }

    fn s_slots(&self) -> usize {
        self.base as usize - 1
    }

    fn t_slots(&self) -> usize {
        self.base as usize
    }

    /// Appends the next stage, padding the row with zero atoms at the high slots.
    pub fn push_stage(&mut self, stage: &StageOutput) -> Result<(), DecomposeError> {
        let k = self.stages();
        let row_err = |detail: String| DecomposeError::SlotRow { stage: k, detail };
        if stage.k != k {
            return Err(row_err(format!("expected stage {k}, got {}", stage.k)));
        }
        if stage.stage_length + k != self.l0 {
            return Err(row_err(format!(
                "input length {} does not match l0 - k = {}",
                stage.stage_length,
                self.l0 - k
            )));
        }
        if stage.s_parts.len() > self.s_slots() || stage.t_parts.len() > self.t_slots() {
            return Err(row_err(format!(
                "{} first-loop / {} second-loop atoms overflow the row",
                stage.s_parts.len(),
                stage.t_parts.len()
            )));
        }
        let pad_row = |parts: &[TwoSpike], slots: usize, high: usize| {
            let mut row = parts.to_vec();
            row.resize(slots, TwoSpike::padding(self.base, high, k));
            row
        };
        self.s
            .push(pad_row(&stage.s_parts, self.s_slots(), self.l0 - k - 2));
        self.t
            .push(pad_row(&stage.t_parts, self.t_slots(), self.l0 - k - 3));
        self.r.push(stage.r_part);
        Ok(())
    }

    /// Replaces one full-weight stage-0 second-loop atom by atoms with
    /// coefficients `d-2` and `1` when exactly one stage-0 slot is empty.
    /// Returns whether the split was applied.
    pub fn split_stage0_second_loop(&mut self) -> bool {
        let Some(row) = self.t.first_mut() else {
            return false;
        };
        let empty: Vec<usize> = (0..row.len()).filter(|&j| row[j].is_padding()).collect();
        let top = (self.base - 1) as Digit;
        if self.base < 3 || empty.len() != 1 || row[0].c != top {
            return false;
        }
        row[0].c = top - 1;
        row[empty[0]].c = 1;
        true
    }

    pub fn s_column(&self, j: usize) -> Vec<TwoSpike> {
        self.s.iter().map(|row| row[j]).collect()
    }

    pub fn t_column(&self, j: usize) -> Vec<TwoSpike> {
        self.t.iter().map(|row| row[j]).collect()
    }

    pub fn r_column(&self) -> Vec<TwoSpike> {
        self.r.clone()
    }

    /// All `2d` columns: first-loop slots, then second-loop slots, then the clearing slot.
    pub fn columns(&self) -> Vec<Vec<TwoSpike>> {
        let mut cols: Vec<Vec<TwoSpike>> = (0..self.s_slots()).map(|j| self.s_column(j)).collect();
        cols.extend((0..self.t_slots()).map(|j| self.t_column(j)));
        cols.push(self.r_column());
        cols
    }
}

/// Digit-wise union of the spikes in one column.
pub fn slot_sum(base: u64, column: &[TwoSpike]) -> Result<Numeral, DecomposeError> {
    let live: Vec<&TwoSpike> = column.iter().filter(|s| !s.is_padding()).collect();
    let width = live.iter().map(|s| s.high + 1).max().unwrap_or(0);
    let mut digits: Vec<Digit> = vec![0; width];
    for s in live {
        for position in [s.low, s.high] {
            if digits[position] != 0 {
                return Err(DecomposeError::SlotCollision { position });
            }
            digits[position] = s.c;
        }
    }
    Ok(Numeral::from_digits(base, digits).expect("spike coefficients are digits"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Return `[n]` directly when `n` is already a palindrome.
    pub shortcut: bool,
}

/// Decomposes `n` with the staged construction (default options).
pub fn decompose(n: &Numeral) -> Result<Decomposition, DecomposeError> {
    decompose_with(n, DecomposeOptions::default())
}

/// The per-digit decomposition wrapped as a verified certificate.
pub fn decompose_sparse(n: &Numeral) -> Result<Decomposition, DecomposeError> {
    let parts = sparse_decompose(n);
    let report = StageReport {
        tail_parts: parts.len(),
        ..StageReport::default()
    };
    finish(Decomposition::new(n.clone(), parts, Method::Sparse, report))
}

/// Whether `n <= d^8 + 1`, the range handled by the sparse decomposition alone.
pub fn in_base_case(n: &Numeral) -> bool {
    let mut limit = Numeral::power(n.base(), 8).expect("numeral base is valid");
    limit.add_monomial(1, 0).expect("1 is a digit");
    n <= &limit
}

pub fn decompose_with(
    n: &Numeral,
    opts: DecomposeOptions,
) -> Result<Decomposition, DecomposeError> {
    if opts.shortcut && !n.is_zero() && is_palindrome(n) {
        let report = StageReport {
            shortcut_applied: true,
            ..StageReport::default()
        };
        return finish(Decomposition::new(
            n.clone(),
            vec![n.clone()],
            Method::Construct,
            report,
        ));
    }
    if in_base_case(n) {
        return decompose_sparse(n);
    }

    let base = n.base();
    let mut report = StageReport::default();
    let pre = preprocess(n)?;
    report.preprocess_loops = Some(pre.loop_counts);
    let mut parts: Vec<Numeral> = pre.t_parts.iter().map(TwoSpike::value).collect();

    let mut reduced = pre.reduced;
    let mut stage0 = pass_once(&reduced, 0)?;
    if stage0.r_part.c == 0 {
        if pre.m.is_zero() {
            return Err(DecomposeError::Stage0 {
                n: n.clone(),
                detail: "clearing digit is 0 but m = 0 leaves nothing to lower".into(),
                counters: Some((&stage0).into()),
            });
        }
        reduced
            .sub_monomial(1, 0)
            .expect("reduced value is positive");
        parts.push(Numeral::from_u64(1, base).expect("valid base"));
        report.minus_one_applied = true;
        stage0 = pass_once(&reduced, 0)?;
        if stage0.r_part.c == 0 {
            return Err(DecomposeError::Stage0 {
                n: n.clone(),
                detail: "clearing digit is still 0 after lowering by one".into(),
                counters: Some((&stage0).into()),
            });
        }
    }

    let mut matrix = SlotMatrix::new(base, reduced.len());
    matrix.push_stage(&stage0)?;
    report.passes.push((&stage0).into());
    let mut current = stage0.remainder;
    let mut k = 1;
    while current.len() >= k + 6 {
        let out = pass_once(&current, k)?;
        matrix.push_stage(&out)?;
        report.passes.push((&out).into());
        current = out.remainder;
        k += 1;
    }

    report.y_split_applied = matrix.split_stage0_second_loop();
    let stage0_counters = report.stage0().copied();
    let stage0_err = |detail: &str| DecomposeError::Stage0 {
        n: n.clone(),
        detail: detail.into(),
        counters: stage0_counters,
    };
    if matrix.s[0].iter().any(TwoSpike::is_padding) {
        return Err(stage0_err("first-loop slots are not all filled"));
    }
    if matrix.t[0].iter().any(TwoSpike::is_padding) {
        return Err(stage0_err("second-loop slots are not all filled"));
    }
    if matrix.r[0].is_padding() {
        return Err(stage0_err("clearing slot is empty"));
    }

    for column in matrix.columns() {
        let p = slot_sum(base, &column)?;
        if !p.is_zero() {
            parts.push(p);
        }
    }
    let tail = sparse_decompose(&current);
    report.tail_parts = tail.len();
    parts.extend(tail);

    finish(Decomposition::new(
        n.clone(),
        parts,
        Method::Construct,
        report,
    ))
}

fn finish(d: Decomposition) -> Result<Decomposition, DecomposeError> {
    match verify_certificate(&d) {
        Ok(()) => Ok(d),
        Err(failure) => Err(DecomposeError::SelfCheck { n: d.n, failure }),
    }
}
