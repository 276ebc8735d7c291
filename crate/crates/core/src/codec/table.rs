//! Static frequency models over code-point symbols.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dyadic::CodePoint;

use super::CodecError;

/// Count smoothing applied when building a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Counts are the exact occurrence counts of the observed symbols.
    None,
    /// Every code point with rate up to the maximum observed rate gets one
    /// extra count, so symbols unseen at build time stay codable. Only
    /// meaningful for external-table mode.
    AddOne,
}

/// Empirical counts of code-point symbols, with the cumulative layout the
/// range coder consumes. Symbols are kept in canonical (rate, numerator)
/// order so serialized tables are canonical too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    symbols: Vec<CodePoint>,
    counts: Vec<u32>,
    cumulative: Vec<u64>,
    total: u64,
}

/// Add-one smoothing enumerates the whole alphabet up to the observed
/// maximum rate; cap it so a stray high-rate symbol cannot blow the table
/// up to billions of entries.
const MAX_ADD_ONE_RATE: u8 = 24;

impl FrequencyTable {
    /// Builds the empirical table of `symbols`.
    pub fn build(symbols: &[CodePoint], smoothing: Smoothing) -> Result<Self, CodecError> {
        if symbols.is_empty() {
            return Err(CodecError::EmptySymbols);
        }
        let mut counts: BTreeMap<CodePoint, u32> = BTreeMap::new();
        for &s in symbols {
            *counts.entry(s).or_insert(0) += 1;
        }
        if smoothing == Smoothing::AddOne {
            let max_rate = symbols.iter().map(|s| s.rate()).max().unwrap();
            if max_rate > MAX_ADD_ONE_RATE {
                return Err(CodecError::TableTooLarge);
            }
            for rate in 1..=max_rate {
                let mut n = 1u64;
                while n < (1u64 << rate) {
                    *counts.entry(CodePoint::new(n, rate).unwrap()).or_insert(0) += 1;
                    n += 2;
                }
            }
        }
        Self::from_counts(counts.into_iter())
    }

    /// Builds the exact-count table, panicking only on an empty input.
    pub fn from_symbols(symbols: &[CodePoint]) -> Self {
        Self::build(symbols, Smoothing::None).expect("non-empty symbol list")
    }

    fn from_counts(entries: impl Iterator<Item = (CodePoint, u32)>) -> Result<Self, CodecError> {
        let mut symbols = Vec::new();
        let mut counts = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = 0u64;
        for (sym, count) in entries {
            debug_assert!(count >= 1);
            symbols.push(sym);
            counts.push(count);
            cumulative.push(total);
            total += u64::from(count);
        }
        if total > u64::from(u32::MAX) {
            return Err(CodecError::TableTooLarge);
        }
        Ok(Self {
            symbols,
            counts,
            cumulative,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn entries(&self) -> impl Iterator<Item = (CodePoint, u32)> + '_ {
        self.symbols
            .iter()
            .copied()
            .zip(self.counts.iter().copied())
    }

    pub fn count(&self, symbol: CodePoint) -> Option<u32> {
        let idx = self.symbols.binary_search(&symbol).ok()?;
        Some(self.counts[idx])
    }

    /// (cumulative, frequency) of `symbol` for the range coder.
    pub(crate) fn interval(&self, symbol: CodePoint) -> Option<(u64, u64)> {
        let idx = self.symbols.binary_search(&symbol).ok()?;
        Some((self.cumulative[idx], u64::from(self.counts[idx])))
    }

    /// Symbol whose cumulative interval contains the scaled code value.
    pub(crate) fn by_value(&self, dv: u64) -> Option<(CodePoint, u64, u64)> {
        if dv >= self.total {
            return None;
        }
        let idx = self.cumulative.partition_point(|&c| c <= dv) - 1;
        Some((
            self.symbols[idx],
            self.cumulative[idx],
            u64::from(self.counts[idx]),
        ))
    }

    /// Serialized form, as embedded in container headers: a u32 symbol
    /// count, then per symbol its wire form followed by a u32 count, in
    /// canonical order.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.symbols.len() as u32).to_le_bytes());
        for (sym, count) in self.entries() {
            sym.write_wire(out);
            out.extend_from_slice(&count.to_le_bytes());
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_bytes(&mut out);
        out
    }

    /// Parses the serialized form, returning the table and bytes consumed.
    pub fn read_bytes(bytes: &[u8]) -> Result<(Self, usize), CodecError> {
        let n = bytes
            .get(..4)
            .ok_or(CodecError::Truncated)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))? as usize;
        let mut at = 4;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let (sym, used) = CodePoint::read_wire(bytes.get(at..).ok_or(CodecError::Truncated)?)?;
            at += used;
            let count = bytes
                .get(at..at + 4)
                .ok_or(CodecError::Truncated)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))?;
            if count == 0 {
                return Err(CodecError::Corrupt { bit_offset: at * 8 });
            }
            at += 4;
            entries.push((sym, count));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(CodecError::Corrupt { bit_offset: 32 });
        }
        Ok((Self::from_counts(entries.into_iter())?, at))
    }

    /// FNV-1a checksum of the canonical serialization, stored in
    /// external-table containers.
    pub fn checksum(&self) -> u32 {
        let mut hash = 0x811c_9dc5u32;
        for byte in self.to_bytes() {
            hash ^= u32::from(byte);
            hash = hash.wrapping_mul(0x0100_0193);
        }
        hash
    }
}
