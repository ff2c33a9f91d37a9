//! Lempel-Ziv complexity of binary coin sequences.
//!
//! The parse scans left to right. A word starting at `i` keeps growing while
//! `S(i, j)` is a member of the vocabulary of the prefix `S(1, j − 1)`; the
//! first `j` for which it is not closes the word. A word still open when the
//! sequence ends is counted too.

use std::collections::BTreeSet;
use std::ops::Range;

use crate::sequence::CoinSequence;

/// Separator printed after each word.
pub const WORD_DOT: char = '·';

/// Every non-empty substring of `bits`.
pub fn vocabulary(bits: &[u8]) -> BTreeSet<Vec<u8>> {
    let mut words = BTreeSet::new();
    for i in 0..bits.len() {
        for j in i..bits.len() {
            words.insert(bits[i..=j].to_vec());
        }
    }
    words
}

/// Whether `word` is in the vocabulary of `prefix`.
fn in_vocabulary(prefix: &[u8], word: &[u8]) -> bool {
    word.len() <= prefix.len() && prefix.windows(word.len()).any(|w| w == word)
}

/// Word boundaries of the parse, as half-open index ranges.
pub fn lz_parse(bits: &[u8]) -> Vec<Range<usize>> {
    let n = bits.len();
    let mut words = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n && in_vocabulary(&bits[..end], &bits[start..=end]) {
            end += 1;
        }
        if end == n {
            words.push(start..n);
            break;
        }
        words.push(start..end + 1);
        start = end + 1;
    }
    words
}

/// Number of words `c(n)` in the parse of the sequence (H = 1, F = 0).
pub fn lz_complexity(seq: &CoinSequence) -> usize {
    lz_parse(&seq.bits()).len()
}

pub fn lz_complexity_bits(bits: &[u8]) -> usize {
    lz_parse(bits).len()
}

/// The parse written out with a dot after every word, e.g. `1·0·1010·`.
pub fn format_parse(seq: &CoinSequence) -> String {
    let bits = seq.to_binary_string();
    let mut out = String::with_capacity(bits.len() * 3);
    for word in lz_parse(&seq.bits()) {
        out.push_str(&bits[word]);
        out.push(WORD_DOT);
    }
    out
}
