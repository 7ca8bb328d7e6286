//! The two subtraction procedures behind the construction.
//!
//! [`pass_once`] takes a number whose lowest `k` digits are zero and strips
//! one leading digit plus digit `k` by subtracting two-spike atoms.
//! [`preprocess`] brings an arbitrary number of length `l >= 8` into the
//! shape `(d-1)(d^{l-2} + d^{l-3} + d^{l-4}) + m` that the first pass needs.
//!
//! Every postcondition is checked on each call and reported as a
//! [`Violation`] carrying the offending input; nothing is assumed.

use std::fmt;

use thiserror::Error;

use crate::numeral::{Digit, Numeral, NumeralError};
use crate::palindrome::TwoSpike;

/// The individual properties checked while reducing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    PassPrecondition,
    FirstLoopBound,
    SecondLoopBound,
    PassRemainderShape,
    PassConservation,
    PreprocessPrecondition,
    PreprocessForm,
    PreprocessRange,
    PreprocessConservation,
    Arithmetic,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::PassPrecondition => "pass-precondition",
            Check::FirstLoopBound => "first-loop-bound",
            Check::SecondLoopBound => "second-loop-bound",
            Check::PassRemainderShape => "pass-remainder-shape",
            Check::PassConservation => "pass-conservation",
            Check::PreprocessPrecondition => "preprocess-precondition",
            Check::PreprocessForm => "preprocess-form",
            Check::PreprocessRange => "preprocess-range",
            Check::PreprocessConservation => "preprocess-conservation",
            Check::Arithmetic => "arithmetic",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{check} violated at stage {stage:?} for n = {n:?}: {detail}")]
pub struct Violation {
    pub check: Check,
    pub n: Numeral,
    pub stage: Option<usize>,
    pub detail: String,
}

impl Violation {
    fn new(check: Check, n: &Numeral, stage: Option<usize>, detail: impl Into<String>) -> Self {
        Violation {
            check,
            n: n.clone(),
            stage,
            detail: detail.into(),
        }
    }
}

/// One pass `N_{L,k} -> N_{L-1,k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutput {
    pub k: usize,
    /// Length `L` of the input.
    pub stage_length: usize,
    /// First-loop atoms `(d-1)(d^{L-2} + d^k)`.
    pub s_parts: Vec<TwoSpike>,
    /// Second-loop atoms `(d-1)(d^{L-3} + d^k)`.
    pub t_parts: Vec<TwoSpike>,
    /// `c(d^{L-4} + d^k)` with `c` the digit at `k` after both loops; padding when `c = 0`.
    pub r_part: TwoSpike,
    pub loop1_count: usize,
    pub loop2_count: usize,
    pub remainder: Numeral,
}

impl StageOutput {
    pub fn parts(&self) -> impl Iterator<Item = &TwoSpike> {
        self.s_parts
            .iter()
            .chain(&self.t_parts)
            .chain(std::iter::once(&self.r_part))
    }
}

fn arith(n: &Numeral, stage: Option<usize>) -> impl Fn(NumeralError) -> Violation + '_ {
    move |e| Violation::new(Check::Arithmetic, n, stage, e.to_string())
}

fn subtract_spike(
    cur: &mut Numeral,
    spike: &TwoSpike,
    input: &Numeral,
    stage: Option<usize>,
) -> Result<(), Violation> {
    cur.sub_monomial(spike.c, spike.low)
        .map_err(arith(input, stage))?;
    cur.sub_monomial(spike.c, spike.high)
        .map_err(arith(input, stage))
}

/// `d^top + c·d^high + c·d^low` as a numeral.
fn threshold(base: u64, top: usize, spike: &TwoSpike) -> Numeral {
    let mut digits = vec![0 as Digit; top + 1];
    digits[top] = 1;
    digits[spike.high] += spike.c;
    digits[spike.low] += spike.c;
    Numeral::from_digits(base, digits).expect("distinct positions hold single digits")
}

/// Returns `true` if `acc` (which is consumed) plus every spike equals `target`.
fn conserves<'a>(
    mut acc: Numeral,
    spikes: impl Iterator<Item = &'a TwoSpike>,
    target: &Numeral,
) -> Result<bool, NumeralError> {
    for s in spikes {
        acc.add_monomial(s.c, s.low)?;
        acc.add_monomial(s.c, s.high)?;
    }
    Ok(&acc == target)
}

/// Runs one inductive pass at stage `k`.
///
/// Requires `n` to have length `L >= k + 6` and zero digits below `k`.
pub fn pass_once(n: &Numeral, k: usize) -> Result<StageOutput, Violation> {
    let stage = Some(k);
    let base = n.base();
    let len = n.len();
    if len < k + 6 {
        return Err(Violation::new(
            Check::PassPrecondition,
            n,
            stage,
            format!("length {len} is below k + 6 = {}", k + 6),
        ));
    }
    if let Some(j) = (0..k).find(|&j| n.digit_at(j) != 0) {
        return Err(Violation::new(
            Check::PassPrecondition,
            n,
            stage,
            format!("digit {j} is nonzero below stage {k}"),
        ));
    }

    let top = (base - 1) as Digit;
    let x = TwoSpike::new(base, top, len - 2, k).expect("k < L - 2");
    let y = TwoSpike::new(base, top, len - 3, k).expect("k < L - 3");
    let first_guard = threshold(base, len - 1, &x);
    let second_guard = Numeral::power(base, len - 1).map_err(arith(n, stage))?;

    let mut cur = n.clone();
    let mut s_parts = Vec::new();
    while cur >= first_guard {
        subtract_spike(&mut cur, &x, n, stage)?;
        s_parts.push(x);
    }
    let mut t_parts = Vec::new();
    while cur >= second_guard {
        subtract_spike(&mut cur, &y, n, stage)?;
        t_parts.push(y);
    }
    let c = cur.digit_at(k);
    let r_part = TwoSpike::new(base, c, len - 4, k).expect("k < L - 4");
    subtract_spike(&mut cur, &r_part, n, stage)?;

    let out = StageOutput {
        k,
        stage_length: len,
        loop1_count: s_parts.len(),
        loop2_count: t_parts.len(),
        s_parts,
        t_parts,
        r_part,
        remainder: cur,
    };
    check_stage(n, &out)?;
    Ok(out)
}

fn check_stage(n: &Numeral, out: &StageOutput) -> Result<(), Violation> {
    let stage = Some(out.k);
    let d = n.base() as usize;
    if out.loop1_count > d - 1 {
        return Err(Violation::new(
            Check::FirstLoopBound,
            n,
            stage,
            format!("first loop ran {} times (bound {})", out.loop1_count, d - 1),
        ));
    }
    if out.loop2_count > d {
        return Err(Violation::new(
            Check::SecondLoopBound,
            n,
            stage,
            format!("second loop ran {} times (bound {d})", out.loop2_count),
        ));
    }
    let rem = &out.remainder;
    if rem.len() + 1 != out.stage_length || (0..=out.k).any(|j| rem.digit_at(j) != 0) {
        return Err(Violation::new(
            Check::PassRemainderShape,
            n,
            stage,
            format!(
                "remainder {rem:?} is not in N_{{{},{}}}",
                out.stage_length - 1,
                out.k + 1
            ),
        ));
    }
    if !conserves(rem.clone(), out.parts(), n).map_err(arith(n, stage))? {
        return Err(Violation::new(
            Check::PassConservation,
            n,
            stage,
            "parts plus remainder do not sum to the input",
        ));
    }
    Ok(())
}

/// Output of [`preprocess`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessOutput {
    /// Palindromic atoms `(d-1)(d^h + 1)` removed by the four loops.
    pub t_parts: Vec<TwoSpike>,
    /// `(d-1)(d^{l-2} + d^{l-3} + d^{l-4}) + m`.
    pub reduced: Numeral,
    /// The part of `reduced` below position `l-4`.
    pub m: Numeral,
    pub loop_counts: [usize; 4],
}

/// Reduces `n` (length `l >= 8`) to the proper starting shape.
pub fn preprocess(n: &Numeral) -> Result<PreprocessOutput, Violation> {
    let base = n.base();
    let l = n.len();
    if l < 8 {
        return Err(Violation::new(
            Check::PreprocessPrecondition,
            n,
            None,
            format!("length {l} is below 8"),
        ));
    }
    let top = (base - 1) as Digit;
    let atoms: Vec<TwoSpike> = (2..=5)
        .map(|drop| TwoSpike::new(base, top, l - drop, 0).expect("l >= 8"))
        .collect();
    let floor = Numeral::power(base, l - 1).map_err(arith(n, None))?;

    let mut cur = n.clone();
    let mut t_parts = Vec::new();
    let mut loop_counts = [0usize; 4];
    for (i, atom) in atoms.iter().enumerate() {
        let guard = if i < 3 {
            threshold(base, l - 1, atom)
        } else {
            floor.clone()
        };
        while cur >= guard {
            subtract_spike(&mut cur, atom, n, None)?;
            t_parts.push(*atom);
            loop_counts[i] += 1;
        }
    }

    let form_ok = cur.len() == l - 1 && (l - 4..l - 1).all(|j| cur.digit_at(j) == top);
    if !form_ok {
        return Err(Violation::new(
            Check::PreprocessForm,
            n,
            None,
            format!("reduced value {cur:?} lacks three leading (d-1) digits"),
        ));
    }
    let m = Numeral::from_digits(base, cur.digits()[..l - 4].to_vec()).map_err(arith(n, None))?;
    let m_floor = Numeral::from_u64(base * (base - 2), base).map_err(arith(n, None))?;
    if m < m_floor {
        return Err(Violation::new(
            Check::PreprocessRange,
            n,
            None,
            format!("m = {m:?} is below d^2 - 2d"),
        ));
    }
    if !conserves(cur.clone(), t_parts.iter(), n).map_err(arith(n, None))? {
        return Err(Violation::new(
            Check::PreprocessConservation,
            n,
            None,
            "parts plus reduced value do not sum to the input",
        ));
    }
    Ok(PreprocessOutput {
        t_parts,
        reduced: cur,
        m,
        loop_counts,
    })
}
