//! Decomposition of natural numbers into sums of base-d palindromes.
//!
//! Every natural number is a sum of `O(d)` palindromes in base `d`. This crate
//! builds such sums explicitly, for any base `2 <= d <= 2^32` and
//! numbers of any length, and emits certificates that can be checked
//! with nothing but addition and digit reversal.
//!
//! ```
//! use palinsum::{decompose, verify_certificate, Numeral};
//!
//! let n = Numeral::from_u64(123_456_789, 10).unwrap();
//! let d = decompose(&n).unwrap();
//! assert!(verify_certificate(&d).is_ok());
//! assert!(d.count <= 6 * 10 + 12);
//! ```

pub mod assembler;
pub mod harness;
pub mod numeral;
pub mod oracle;
pub mod palindrome;
pub mod reduction;

pub use assembler::{
    decompose, decompose_sparse, decompose_with, in_base_case, slot_sum, verify_certificate,
    verify_parts, DecomposeError, DecomposeOptions, Decomposition, Method, PassCounters,
    SlotMatrix, StageReport, VerifyFailure,
};
pub use harness::{Certificate, HarnessError, Strategy};
pub use numeral::{Digit, Format, Numeral, NumeralError};
pub use oracle::{enumerate, minimal_count, PalindromeTable, SearchOutcome, Searcher};
pub use palindrome::{is_palindrome, sparse_decompose, two_spike_value, DigitMap, TwoSpike};
pub use reduction::{pass_once, preprocess, Check, PreprocessOutput, StageOutput, Violation};
