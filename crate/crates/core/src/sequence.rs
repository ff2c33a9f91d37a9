//! Coin sequences over the `{H, F}` alphabet.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coin::{fourier_coin, hadamard_coin, Complex2x2};
use crate::error::{Error, Result};

/// Ordered so that `F < H`, which fixes the text tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    F,
    H,
}

impl Symbol {
    pub fn coin(&self) -> Complex2x2 {
        match self {
            Symbol::H => hadamard_coin(),
            Symbol::F => fourier_coin(),
        }
    }

    /// H maps to 1, F to 0.
    pub fn bit(&self) -> u8 {
        match self {
            Symbol::H => 1,
            Symbol::F => 0,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Symbol::H
        } else {
            Symbol::F
        }
    }

    pub fn as_char(&self) -> char {
        match self {
            Symbol::H => 'H',
            Symbol::F => 'F',
        }
    }
}

/// Left-to-right application order: the first symbol is the step-1 coin.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoinSequence {
    symbols: Vec<Symbol>,
}

impl CoinSequence {
    pub const MAX_PACKED_LEN: usize = 64;

    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { symbols })
    }

    /// All-H sequence of length `n`.
    pub fn uniform(symbol: Symbol, n: usize) -> Result<Self> {
        Self::new(vec![symbol; n])
    }

    /// Unpacks `n` symbols from `code`, first-applied coin in the least
    /// significant bit, H = 1.
    pub fn from_code(code: u64, n: usize) -> Result<Self> {
        if n > Self::MAX_PACKED_LEN {
            return Err(Error::SequenceTooLong {
                n,
                max: Self::MAX_PACKED_LEN,
            });
        }
        Self::new((0..n).map(|k| Symbol::from_bit(code >> k & 1 == 1)).collect())
    }

    /// Inverse of [`CoinSequence::from_code`].
    pub fn code(&self) -> Result<u64> {
        if self.len() > Self::MAX_PACKED_LEN {
            return Err(Error::SequenceTooLong {
                n: self.len(),
                max: Self::MAX_PACKED_LEN,
            });
        }
        Ok(self
            .symbols
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, s)| acc | (s.bit() as u64) << k))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// The 0-1 symbolic form used for complexity estimates.
    pub fn bits(&self) -> Vec<u8> {
        self.symbols.iter().map(Symbol::bit).collect()
    }

    pub fn to_binary_string(&self) -> String {
        self.symbols
            .iter()
            .map(|s| if s.bit() == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn prefix(&self, len: usize) -> Result<Self> {
        Self::new(self.symbols[..len.min(self.len())].to_vec())
    }
}

impl FromStr for CoinSequence {
    type Err = Error;

    /// Case-insensitive text over `{H, F}`.
    fn from_str(text: &str) -> Result<Self> {
        let symbols = text
            .chars()
            .enumerate()
            .map(|(index, c)| match c.to_ascii_uppercase() {
                'H' => Ok(Symbol::H),
                'F' => Ok(Symbol::F),
                found => Err(Error::IllegalSymbol { index, found }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }
}

/// Same as `text.parse::<CoinSequence>()`.
pub fn parse_sequence(text: &str) -> Result<CoinSequence> {
    text.parse()
}

impl fmt::Display for CoinSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl Serialize for CoinSequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CoinSequence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// The 20-step sequence used in the experiment as an entanglement enhancer.
pub const OPTIMAL_SEQUENCE_51_0: &str = "FFHFHFHHFFFFFHFHHHHH";
