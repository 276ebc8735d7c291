//! Lossless coding of code-point sequences.
//!
//! The primary path treats each code point as a symbol from a discrete
//! vocabulary and arithmetic-codes the sequence under a static empirical
//! frequency table ([`ac_encode`] / [`ac_decode`]). The alternative
//! concatenation codec ([`concat_encode`] / [`concat_decode`]) splices the
//! binary fractions directly and transmits the rates separately. The
//! [`container`] module wraps either payload with the prior and table
//! metadata a receiver needs.
//!
//! Coding is strictly sequential per stream (the coder state is a chain);
//! distinct streams share nothing and may run concurrently.

mod bits;
mod concat;
mod container;
mod range;
mod table;

pub use bits::Bitstring;
pub use concat::{concat_decode, concat_encode, decode_bytes, encode_bytes, ByteTable};
pub use container::{
    read_container, write_container, CompressedContainer, TableMode, MAGIC, VERSION,
};
pub use table::{FrequencyTable, Smoothing};

use alloc::vec::Vec;

use crate::dyadic::{CodePoint, DyadicError};
use crate::prior::PriorError;

use range::{RangeDecoder, RangeEncoder};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("cannot build a frequency table from an empty symbol list")]
    EmptySymbols,
    #[error("symbol {numerator}/2^{rate} at index {index} is not in the table")]
    UnknownSymbol {
        index: usize,
        numerator: u64,
        rate: u8,
    },
    #[error("corrupt stream near bit {bit_offset}")]
    Corrupt { bit_offset: usize },
    #[error("stream length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("frequency table exceeds the 32-bit count budget")]
    TableTooLarge,
    #[error("bad container magic")]
    BadMagic,
    #[error("unsupported container version {0}")]
    BadVersion(u8),
    #[error("table checksum mismatch")]
    ChecksumMismatch,
    #[error("container truncated")]
    Truncated,
    #[error("external-table container needs the out-of-band table")]
    MissingExternalTable,
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
    #[error(transparent)]
    Prior(#[from] PriorError),
}

/// Builds the empirical frequency table of `symbols`.
pub fn build_frequency_table(
    symbols: &[CodePoint],
    smoothing: Smoothing,
) -> Result<FrequencyTable, CodecError> {
    FrequencyTable::build(symbols, smoothing)
}

/// Arithmetic-codes `symbols` under the static model `table`.
///
/// The output is byte-granular; its length exceeds the information content
/// of the sequence by at most the coder slack (bounded termination plus a
/// per-symbol truncation loss below 2^-16 bits).
pub fn ac_encode(symbols: &[CodePoint], table: &FrequencyTable) -> Result<Bitstring, CodecError> {
    if symbols.is_empty() {
        return Ok(Bitstring::new());
    }
    let mut enc = RangeEncoder::new();
    for (index, &sym) in symbols.iter().enumerate() {
        let (cum, freq) = table.interval(sym).ok_or(CodecError::UnknownSymbol {
            index,
            numerator: sym.numerator(),
            rate: sym.rate(),
        })?;
        enc.encode(cum, freq, table.total());
    }
    Ok(Bitstring::from_bytes(enc.finish()))
}

/// Decodes exactly `count` symbols from an [`ac_encode`] stream.
pub fn ac_decode(
    bits: &Bitstring,
    table: &FrequencyTable,
    count: usize,
) -> Result<Vec<CodePoint>, CodecError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if table.is_empty() {
        return Err(CodecError::Corrupt { bit_offset: 0 });
    }
    let mut dec = RangeDecoder::new(bits.bytes());
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let dv = dec.decode_value(table.total());
        let (sym, cum, freq) = table.by_value(dv).ok_or(CodecError::Corrupt {
            bit_offset: dec.bit_offset(),
        })?;
        dec.advance(cum, freq, table.total());
        out.push(sym);
    }
    Ok(out)
}

/// Information content of the sequence under the table's empirical
/// probabilities: sum of -log2(count/total) per symbol. This is the ideal
/// entropy-coded size in bits.
pub fn information_content(
    symbols: &[CodePoint],
    table: &FrequencyTable,
) -> Result<f64, CodecError> {
    let total = table.total() as f64;
    let mut h = 0.0;
    for (index, &sym) in symbols.iter().enumerate() {
        let count = table.count(sym).ok_or(CodecError::UnknownSymbol {
            index,
            numerator: sym.numerator(),
            rate: sym.rate(),
        })?;
        h -= libm::log2(f64::from(count) / total);
    }
    Ok(h)
}
