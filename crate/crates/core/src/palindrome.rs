//! Palindromes, two-spike atoms and the sparse (per-digit) decomposition.

use thiserror::Error;

use crate::numeral::{check_base, Digit, Numeral, NumeralError};

/// True iff the canonical digit string reads the same reversed.
///
/// Zero and every single-digit number count as palindromes.
pub fn is_palindrome(n: &Numeral) -> bool {
    let d = n.digits();
    d.iter().eq(d.iter().rev())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpikeError {
    #[error("coefficient {c} is not a digit of base {base}")]
    Coefficient { c: Digit, base: u64 },
    #[error("spike positions must satisfy low < high (got high {high}, low {low})")]
    Positions { high: usize, low: usize },
    #[error(transparent)]
    Numeral(#[from] NumeralError),
}

/// `c·d^high + c·d^low`.
///
/// With `c = 0` the value is zero; such spikes pad the slot matrix and keep
/// their positions so columns stay aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoSpike {
    pub base: u64,
    pub c: Digit,
    pub high: usize,
    pub low: usize,
}

impl TwoSpike {
    pub fn new(base: u64, c: Digit, high: usize, low: usize) -> Result<Self, SpikeError> {
        check_base(base)?;
        if u64::from(c) >= base {
            return Err(SpikeError::Coefficient { c, base });
        }
        if c != 0 && low >= high {
            return Err(SpikeError::Positions { high, low });
        }
        Ok(TwoSpike { base, c, high, low })
    }

    pub fn padding(base: u64, high: usize, low: usize) -> Self {
        TwoSpike {
            base,
            c: 0,
            high,
            low,
        }
    }

    pub fn is_padding(&self) -> bool {
        self.c == 0
    }

    pub fn value(&self) -> Numeral {
        if self.c == 0 {
            return Numeral::zero(self.base).expect("validated base");
        }
        let mut digits = vec![0; self.high + 1];
        digits[self.high] = self.c;
        digits[self.low] = self.c;
        Numeral::from_digits(self.base, digits).expect("validated spike")
    }
}

pub fn two_spike_value(
    base: u64,
    c: Digit,
    high: usize,
    low: usize,
) -> Result<Numeral, SpikeError> {
    Ok(TwoSpike::new(base, c, high, low)?.value())
}

/// The digit map `f(0) = 0`, `f(1) = 1`, `f(x) = d - x + 1` for `2 <= x < d`.
///
/// For every digit `x >= 1` and position `j >= 1`, both `f(x)` and
/// `x·d^j - f(x)` are nonzero palindromes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitMap {
    base: u64,
}

impl DigitMap {
    pub fn new(base: u64) -> Result<Self, NumeralError> {
        Ok(DigitMap {
            base: check_base(base)?,
        })
    }

    pub fn apply(&self, x: Digit) -> Digit {
        match x {
            0 => 0,
            1 => 1,
            _ => {
                debug_assert!(u64::from(x) < self.base);
                (self.base - u64::from(x) + 1) as Digit
            }
        }
    }
}

/// Splits every nonzero digit into at most two palindromes.
///
/// A digit `δ` at position 0 is emitted as itself; at position `j >= 1` it
/// becomes `f(δ)` and `δ·d^j - f(δ)`. Parts are emitted from the low
/// position upward and never include zero.
pub fn sparse_decompose(n: &Numeral) -> Vec<Numeral> {
    let base = n.base();
    let map = DigitMap::new(base).expect("numeral base is valid");
    let mut parts = Vec::with_capacity(2 * n.nonzero_digit_count());
    for (j, &delta) in n.digits().iter().enumerate() {
        if delta == 0 {
            continue;
        }
        if j == 0 {
            parts.push(Numeral::monomial(base, delta, 0).expect("digit below base"));
            continue;
        }
        let small = map.apply(delta);
        let mut big = Numeral::monomial(base, delta, j).expect("digit below base");
        big.sub_monomial(small, 0)
            .expect("delta·d^j exceeds a single digit");
        parts.push(Numeral::monomial(base, small, 0).expect("digit below base"));
        parts.push(big);
    }
    parts
}
