//! Arbitrary-precision natural numbers stored as base-d digit vectors.
//!
//! Digits are kept least-significant first, so `digits[j]` is the coefficient
//! of `d^j`. A [`Numeral`] is always canonical: no high zero digits, every
//! digit below the base, and zero is the empty vector.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest supported base. Every digit fits in a `u32`.
pub const MAX_BASE: u64 = 1 << 32;

/// A single base-d digit.
pub type Digit = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumeralError {
    #[error("base {0} is outside the supported range 2..=2^32")]
    InvalidBase(u64),
    #[error("digit {digit} is out of range for base {base}")]
    DigitOutOfRange { digit: u64, base: u64 },
    #[error("malformed numeral text: {0}")]
    Malformed(String),
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u64, u64),
    #[error("subtraction underflow")]
    Underflow,
}

/// Text formats understood by [`Numeral::parse`] and [`Numeral::render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Format {
    /// Plain ASCII decimal digits.
    #[default]
    Decimal,
    /// `(a,b,c)`: base-d digits, most significant first.
    DigitList,
}

impl FromStr for Format {
    type Err = NumeralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decimal" => Ok(Format::Decimal),
            "digits" | "digit-list" => Ok(Format::DigitList),
            other => Err(NumeralError::Malformed(format!("unknown format `{other}`"))),
        }
    }
}

pub fn check_base(base: u64) -> Result<u64, NumeralError> {
    if (2..=MAX_BASE).contains(&base) {
        Ok(base)
    } else {
        Err(NumeralError::InvalidBase(base))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Numeral {
    base: u64,
    digits: Vec<Digit>,
}

impl Numeral {
    pub fn zero(base: u64) -> Result<Self, NumeralError> {
        Ok(Numeral {
            base: check_base(base)?,
            digits: Vec::new(),
        })
    }

    pub fn from_u64(value: u64, base: u64) -> Result<Self, NumeralError> {
        let mut n = Numeral::zero(base)?;
        let mut v = value;
        while v > 0 {
            n.digits.push((v % base) as Digit);
            v /= base;
        }
        Ok(n)
    }

    /// Builds a numeral from least-significant-first digits, trimming high zeros.
    pub fn from_digits(base: u64, digits: Vec<Digit>) -> Result<Self, NumeralError> {
        check_base(base)?;
        if let Some(&bad) = digits.iter().find(|&&x| u64::from(x) >= base) {
            return Err(NumeralError::DigitOutOfRange {
                digit: bad.into(),
                base,
            });
        }
        let mut n = Numeral { base, digits };
        n.normalize();
        Ok(n)
    }

    /// `c * d^pos`.
    pub fn monomial(base: u64, c: Digit, pos: usize) -> Result<Self, NumeralError> {
        check_base(base)?;
        if u64::from(c) >= base {
            return Err(NumeralError::DigitOutOfRange {
                digit: c.into(),
                base,
            });
        }
        if c == 0 {
            return Numeral::zero(base);
        }
        let mut digits = vec![0; pos + 1];
        digits[pos] = c;
        Ok(Numeral { base, digits })
    }

    /// `d^exp`.
    pub fn power(base: u64, exp: usize) -> Result<Self, NumeralError> {
        Numeral::monomial(base, 1, exp)
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Least-significant-first digits.
    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    /// Number of base-d digits; zero has length 0.
    #[allow(clippy::len_without_is_empty)] // `is_zero` is the emptiness test.
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// `δ_j`, with every position beyond the length reading as 0.
    pub fn digit_at(&self, j: usize) -> Digit {
        self.digits.get(j).copied().unwrap_or(0)
    }

    pub fn nonzero_digit_count(&self) -> usize {
        self.digits.iter().filter(|&&x| x != 0).count()
    }

    /// Value as a machine integer, when it fits.
    pub fn to_u64(&self) -> Option<u64> {
        let mut v: u64 = 0;
        for &x in self.digits.iter().rev() {
            v = v.checked_mul(self.base)?.checked_add(x.into())?;
        }
        Some(v)
    }

    fn normalize(&mut self) {
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
    }

    fn same_base(&self, other: &Numeral) -> Result<(), NumeralError> {
        if self.base == other.base {
            Ok(())
        } else {
            Err(NumeralError::BaseMismatch(self.base, other.base))
        }
    }

    pub fn compare(&self, other: &Numeral) -> Result<Ordering, NumeralError> {
        self.same_base(other)?;
        Ok(cmp_digits(&self.digits, &other.digits))
    }

    pub fn add(&self, other: &Numeral) -> Result<Numeral, NumeralError> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Numeral) -> Result<Numeral, NumeralError> {
        let mut out = self.clone();
        out.sub_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Numeral) -> Result<(), NumeralError> {
        self.same_base(other)?;
        if other.digits.len() > self.digits.len() {
            self.digits.resize(other.digits.len(), 0);
        }
        let mut carry = 0u64;
        for (j, slot) in self.digits.iter_mut().enumerate() {
            let rhs = u64::from(other.digits.get(j).copied().unwrap_or(0));
            if rhs == 0 && carry == 0 && j >= other.digits.len() {
                break;
            }
            let s = u64::from(*slot) + rhs + carry;
            if s >= self.base {
                *slot = (s - self.base) as Digit;
                carry = 1;
            } else {
                *slot = s as Digit;
                carry = 0;
            }
        }
        if carry > 0 {
            self.digits.push(carry as Digit);
        }
        Ok(())
    }

    /// In-place subtraction. On underflow `self` is left unchanged.
    pub fn sub_assign(&mut self, other: &Numeral) -> Result<(), NumeralError> {
        self.same_base(other)?;
        if cmp_digits(&self.digits, &other.digits) == Ordering::Less {
            return Err(NumeralError::Underflow);
        }
        let mut borrow = 0u64;
        for (j, slot) in self.digits.iter_mut().enumerate() {
            let rhs = u64::from(other.digits.get(j).copied().unwrap_or(0)) + borrow;
            if rhs == 0 && j >= other.digits.len() {
                break;
            }
            let lhs = u64::from(*slot);
            if lhs >= rhs {
                *slot = (lhs - rhs) as Digit;
                borrow = 0;
            } else {
                *slot = (lhs + self.base - rhs) as Digit;
                borrow = 1;
            }
        }
        debug_assert_eq!(borrow, 0);
        self.normalize();
        Ok(())
    }

    /// Adds `c * d^pos` in place.
    pub fn add_monomial(&mut self, c: Digit, pos: usize) -> Result<(), NumeralError> {
        if u64::from(c) >= self.base {
            return Err(NumeralError::DigitOutOfRange {
                digit: c.into(),
                base: self.base,
            });
        }
        if c == 0 {
            return Ok(());
        }
        if self.digits.len() <= pos {
            self.digits.resize(pos + 1, 0);
        }
        let mut carry = u64::from(c);
        let mut j = pos;
        while carry > 0 {
            if j == self.digits.len() {
                self.digits.push(0);
            }
            let s = u64::from(self.digits[j]) + carry;
            if s >= self.base {
                self.digits[j] = (s - self.base) as Digit;
                carry = 1;
            } else {
                self.digits[j] = s as Digit;
                carry = 0;
            }
            j += 1;
        }
        Ok(())
    }

    /// Subtracts `c * d^pos` in place. On underflow `self` is left unchanged.
    pub fn sub_monomial(&mut self, c: Digit, pos: usize) -> Result<(), NumeralError> {
        if u64::from(c) >= self.base {
            return Err(NumeralError::DigitOutOfRange {
                digit: c.into(),
                base: self.base,
            });
        }
        if c == 0 {
            return Ok(());
        }
        // Underflow iff every digit at or above pos reads as less than c * d^pos.
        let high_nonzero = self
            .digits
            .get(pos + 1..)
            .is_some_and(|hi| hi.iter().any(|&x| x != 0));
        if !high_nonzero && self.digit_at(pos) < c {
            return Err(NumeralError::Underflow);
        }
        let mut need = u64::from(c);
        let mut j = pos;
        while need > 0 {
            let lhs = u64::from(self.digits[j]);
            if lhs >= need {
                self.digits[j] = (lhs - need) as Digit;
                need = 0;
            } else {
                self.digits[j] = (lhs + self.base - need) as Digit;
                need = 1;
            }
            j += 1;
        }
        self.normalize();
        Ok(())
    }

    /// Sum of a sequence of numerals in one base. An empty sequence sums to zero.
    pub fn sum<'a, I>(base: u64, items: I) -> Result<Numeral, NumeralError>
    where
        I: IntoIterator<Item = &'a Numeral>,
    {
        let mut acc = Numeral::zero(base)?;
        for x in items {
            acc.add_assign(x)?;
        }
        Ok(acc)
    }

    pub fn parse(text: &str, base: u64, format: Format) -> Result<Numeral, NumeralError> {
        check_base(base)?;
        match format {
            Format::Decimal => parse_decimal(text.trim(), base),
            Format::DigitList => parse_digit_list(text.trim(), base),
        }
    }

    /// Parses either format, picking the digit-list reading when the text starts with `(`.
    pub fn parse_auto(text: &str, base: u64) -> Result<Numeral, NumeralError> {
        let format = if text.trim_start().starts_with('(') {
            Format::DigitList
        } else {
            Format::Decimal
        };
        Numeral::parse(text, base, format)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Decimal => render_decimal(self),
            Format::DigitList => {
                let body: Vec<String> = self.digits.iter().rev().map(|x| x.to_string()).collect();
                format!("({})", body.join(","))
            }
        }
    }
}

impl fmt::Debug for Numeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.render(Format::DigitList), self.base)
    }
}

impl fmt::Display for Numeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Format::Decimal))
    }
}

impl PartialOrd for Numeral {
    /// `None` when the bases differ.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other).ok()
    }
}

pub(crate) fn cmp_digits(a: &[Digit], b: &[Digit]) -> Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.iter().rev().cmp(b.iter().rev()))
}

const DEC_CHUNK: usize = 9;
const DEC_CHUNK_VALUE: u64 = 1_000_000_000;

fn parse_decimal(text: &str, base: u64) -> Result<Numeral, NumeralError> {
    if text.is_empty() {
        return Err(NumeralError::Malformed("empty input".into()));
    }
    if let Some(bad) = text.chars().find(|c| !c.is_ascii_digit()) {
        return Err(NumeralError::Malformed(format!(
            "unexpected character `{bad}` in decimal text"
        )));
    }
    let text = text.trim_start_matches('0');
    let mut digits: Vec<Digit> = Vec::new();
    let bytes = text.as_bytes();
    let head = bytes.len() % DEC_CHUNK;
    let mut chunks: Vec<&[u8]> = Vec::with_capacity(bytes.len() / DEC_CHUNK + 1);
    if head > 0 {
        chunks.push(&bytes[..head]);
    }
    chunks.extend(bytes[head..].chunks(DEC_CHUNK));
    for chunk in chunks {
        let scale = 10u64.pow(chunk.len() as u32);
        let value = chunk
            .iter()
            .fold(0u64, |acc, &b| acc * 10 + u64::from(b - b'0'));
        // carry < scale is kept by induction, so digit * scale + carry < base * scale.
        let mut carry = value;
        for slot in digits.iter_mut() {
            let t = u64::from(*slot) * scale + carry;
            *slot = (t % base) as Digit;
            carry = t / base;
        }
        while carry > 0 {
            digits.push((carry % base) as Digit);
            carry /= base;
        }
    }
    Numeral::from_digits(base, digits)
}

fn parse_digit_list(text: &str, base: u64) -> Result<Numeral, NumeralError> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| NumeralError::Malformed(format!("expected `(d,d,...)`, got `{text}`")))?;
    if inner.trim().is_empty() {
        return Numeral::zero(base);
    }
    let mut digits = Vec::new();
    for field in inner.split(',') {
        let field = field.trim();
        let digit: u64 = field
            .parse()
            .map_err(|_| NumeralError::Malformed(format!("bad digit `{field}`")))?;
        if digit >= base {
            return Err(NumeralError::DigitOutOfRange { digit, base });
        }
        digits.push(digit as Digit);
    }
    digits.reverse();
    Numeral::from_digits(base, digits)
}

fn render_decimal(n: &Numeral) -> String {
    if n.is_zero() {
        return "0".into();
    }
    if n.base == 10 {
        return n
            .digits
            .iter()
            .rev()
            .map(|&x| char::from(b'0' + x as u8))
            .collect();
    }
    // Regroup into the widest super-base D = d^g <= 2^32, then peel off
    // nine decimal digits per long division.
    let mut group = 1u32;
    let mut super_base = n.base;
    while super_base
        .checked_mul(n.base)
        .is_some_and(|b| b <= MAX_BASE)
    {
        super_base *= n.base;
        group += 1;
    }
    let mut limbs: Vec<u64> = n
        .digits
        .chunks(group as usize)
        .map(|c| {
            c.iter()
                .rev()
                .fold(0u64, |acc, &x| acc * n.base + u64::from(x))
        })
        .collect();
    let mut chunks: Vec<u64> = Vec::new();
    while !limbs.is_empty() {
        let mut rem = 0u64;
        for limb in limbs.iter_mut().rev() {
            let t = rem * super_base + *limb;
            *limb = t / DEC_CHUNK_VALUE;
            rem = t % DEC_CHUNK_VALUE;
        }
        chunks.push(rem);
        while limbs.last() == Some(&0) {
            limbs.pop();
        }
    }
    let mut out = String::with_capacity(chunks.len() * DEC_CHUNK);
    let mut iter = chunks.iter().rev();
    if let Some(first) = iter.next() {
        out.push_str(&first.to_string());
    }
    for c in iter {
        out.push_str(&format!("{c:09}"));
    }
    out
}
