//! Brute-force ground truth on machine integers.
//!
//! Nothing here touches [`Numeral`](crate::numeral::Numeral) arithmetic or
//! the construction; palindromes are generated by mirroring digit prefixes
//! and checked by reversing `u64` digit strings.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

/// Largest table bound accepted by [`enumerate`].
pub const MAX_TABLE_BOUND: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("table bound {0} exceeds the supported maximum {MAX_TABLE_BOUND}")]
    BoundTooLarge(u64),
    #[error("base {0} is not supported by the oracle")]
    InvalidBase(u64),
    #[error("{n} exceeds the table bound {bound}")]
    OutOfTable { n: u64, bound: u64 },
}

/// Base-d digit-reversal check on a machine integer.
pub fn is_palindrome_u64(n: u64, base: u64) -> bool {
    let mut digits = Vec::new();
    let mut v = n;
    while v > 0 {
        digits.push(v % base);
        v /= base;
    }
    digits.iter().eq(digits.iter().rev())
}

/// Every palindrome `<= bound` in one base, ascending, zero included.
#[derive(Debug, Clone)]
pub struct PalindromeTable {
    base: u64,
    bound: u64,
    values: Vec<u64>,
    members: HashSet<u64>,
}

impl PalindromeTable {
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.contains(&n)
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.len() - 1
    }
}

/// Builds the table by mirroring every prefix of each length.
pub fn enumerate(base: u64, bound: u64) -> Result<PalindromeTable, OracleError> {
    if !(2..=1 << 32).contains(&base) {
        return Err(OracleError::InvalidBase(base));
    }
    if bound > MAX_TABLE_BOUND {
        return Err(OracleError::BoundTooLarge(bound));
    }
    let mut values = vec![0u64];
    'lengths: for len in 1u32.. {
        let half = len.div_ceil(2);
        let lo = base.pow(half - 1);
        let hi = lo * base;
        for prefix in lo..hi {
            let p = mirror(prefix, base, len % 2 == 1);
            if p > bound {
                break 'lengths;
            }
            values.push(p);
        }
    }
    let members = values.iter().copied().collect();
    Ok(PalindromeTable {
        base,
        bound,
        values,
        members,
    })
}

/// Appends the digits of `prefix` in reverse, dropping the middle digit for odd lengths.
fn mirror(prefix: u64, base: u64, odd: bool) -> u64 {
    let mut out = prefix;
    let mut rest = if odd { prefix / base } else { prefix };
    while rest > 0 {
        out = out * base + rest % base;
        rest /= base;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A witness of minimal length: nonzero palindromes in non-increasing order.
    Found(Vec<u64>),
    ExceedsLimit,
}

impl SearchOutcome {
    pub fn count(&self) -> Option<usize> {
        match self {
            SearchOutcome::Found(w) => Some(w.len()),
            SearchOutcome::ExceedsLimit => None,
        }
    }
}

/// Default depth limit for [`Searcher::minimal`].
pub const DEFAULT_DEPTH_LIMIT: usize = 8;

/// Iterative-deepening search for the fewest palindromes summing to `n`.
///
/// Keeps a memo of `(n, t)` results across queries; one searcher per worker.
#[derive(Debug)]
pub struct Searcher<'a> {
    table: &'a PalindromeTable,
    memo: HashMap<(u64, usize), Option<u64>>,
}

impl<'a> Searcher<'a> {
    pub fn new(table: &'a PalindromeTable) -> Self {
        Searcher {
            table,
            memo: HashMap::new(),
        }
    }

    pub fn minimal(&mut self, n: u64, depth_limit: usize) -> Result<SearchOutcome, OracleError> {
        if n > self.table.bound {
            return Err(OracleError::OutOfTable {
                n,
                bound: self.table.bound,
            });
        }
        for t in 0..=depth_limit {
            if self.largest_part(n, t).is_some() {
                return Ok(SearchOutcome::Found(self.witness(n, t)));
            }
        }
        Ok(SearchOutcome::ExceedsLimit)
    }

    /// Largest part of some `t`-part representation of `n`; the largest part
    /// of any such representation is at least `n / t`.
    fn largest_part(&mut self, n: u64, t: usize) -> Option<u64> {
        match t {
            0 => return (n == 0).then_some(0),
            1 => return (n > 0 && self.table.contains(n)).then_some(n),
            _ if n < t as u64 => return None,
            _ => {}
        }
        if let Some(&hit) = self.memo.get(&(n, t)) {
            return hit;
        }
        let table: &'a PalindromeTable = self.table;
        let values = &table.values;
        let floor = n.div_ceil(t as u64);
        let ceiling = n - (t as u64 - 1);
        let start = values.partition_point(|&p| p < floor);
        let end = values.partition_point(|&p| p <= ceiling);
        let mut found = None;
        for &p in values[start..end].iter().rev() {
            if self.largest_part(n - p, t - 1).is_some() {
                found = Some(p);
                break;
            }
        }
        self.memo.insert((n, t), found);
        found
    }

    fn witness(&mut self, mut n: u64, mut t: usize) -> Vec<u64> {
        let mut parts = Vec::with_capacity(t);
        while t > 0 {
            let p = self.largest_part(n, t).expect("representation exists");
            parts.push(p);
            n -= p;
            t -= 1;
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts
    }
}

/// One-shot [`Searcher::minimal`].
pub fn minimal_count(
    table: &PalindromeTable,
    n: u64,
    depth_limit: usize,
) -> Result<SearchOutcome, OracleError> {
    Searcher::new(table).minimal(n, depth_limit)
}
