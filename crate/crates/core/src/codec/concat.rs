//! Concatenation codec: binary fractions spliced together directly.
//!
//! Each symbol contributes the bits b1 .. b_{R-1} of its binary fraction to
//! the payload — the terminal bit is always 1 and is never transmitted. The
//! decoder recovers the split positions from a second stream carrying the
//! rate values, entropy-coded under their empirical histogram; that
//! histogram is serialized at the head of the rate stream so the pair of
//! streams is self-contained.

use alloc::vec::Vec;

use crate::dyadic::CodePoint;

use super::bits::Bitstring;
use super::range::{RangeDecoder, RangeEncoder};
use super::CodecError;

/// Cumulative frequency model over small integer symbols (rate values and
/// similar index alphabets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteTable {
    symbols: Vec<u8>,
    counts: Vec<u32>,
    cumulative: Vec<u64>,
    total: u64,
}

impl ByteTable {
    pub fn from_symbols(symbols: &[u8]) -> Self {
        let mut hist = [0u32; 256];
        for &s in symbols {
            hist[usize::from(s)] += 1;
        }
        Self::from_histogram(&hist)
    }

    fn from_histogram(hist: &[u32; 256]) -> Self {
        let mut symbols = Vec::new();
        let mut counts = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = 0u64;
        for (value, &count) in hist.iter().enumerate() {
            if count > 0 {
                symbols.push(value as u8);
                counts.push(count);
                cumulative.push(total);
                total += u64::from(count);
            }
        }
        Self {
            symbols,
            counts,
            cumulative,
            total,
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, symbol: u8) -> Option<u32> {
        let idx = self.symbols.binary_search(&symbol).ok()?;
        Some(self.counts[idx])
    }

    fn interval(&self, symbol: u8) -> Option<(u64, u64)> {
        let idx = self.symbols.binary_search(&symbol).ok()?;
        Some((self.cumulative[idx], u64::from(self.counts[idx])))
    }

    fn by_value(&self, dv: u64) -> Option<(u8, u64, u64)> {
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

    fn write_bytes(&self, out: &mut Vec<u8>) {
        out.push(self.symbols.len() as u8);
        for (i, &s) in self.symbols.iter().enumerate() {
            out.push(s);
            out.extend_from_slice(&self.counts[i].to_le_bytes());
        }
    }

    fn read_bytes(bytes: &[u8]) -> Result<(Self, usize), CodecError> {
        let n = usize::from(*bytes.first().ok_or(CodecError::Truncated)?);
        let mut hist = [0u32; 256];
        let mut at = 1;
        let mut last: Option<u8> = None;
        for _ in 0..n {
            let sym = *bytes.get(at).ok_or(CodecError::Truncated)?;
            if last.is_some_and(|l| l >= sym) {
                return Err(CodecError::Corrupt { bit_offset: at * 8 });
            }
            last = Some(sym);
            let count = bytes
                .get(at + 1..at + 5)
                .ok_or(CodecError::Truncated)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))?;
            if count == 0 {
                return Err(CodecError::Corrupt { bit_offset: at * 8 });
            }
            hist[usize::from(sym)] = count;
            at += 5;
        }
        Ok((Self::from_histogram(&hist), at))
    }
}

/// Entropy-codes a small-integer symbol sequence under `table`.
pub fn encode_bytes(symbols: &[u8], table: &ByteTable) -> Result<Bitstring, CodecError> {
    if symbols.is_empty() {
        return Ok(Bitstring::new());
    }
    let mut enc = RangeEncoder::new();
    for (index, &s) in symbols.iter().enumerate() {
        let (cum, freq) = table.interval(s).ok_or(CodecError::UnknownSymbol {
            index,
            numerator: u64::from(s),
            rate: 0,
        })?;
        enc.encode(cum, freq, table.total());
    }
    Ok(Bitstring::from_bytes(enc.finish()))
}

/// Decodes `count` symbols produced by [`encode_bytes`].
pub fn decode_bytes(
    bits: &Bitstring,
    table: &ByteTable,
    count: usize,
) -> Result<Vec<u8>, CodecError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if table.total() == 0 {
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

/// Splices the binary fractions of `symbols` into (rate stream, payload).
pub fn concat_encode(symbols: &[CodePoint]) -> (Bitstring, Bitstring) {
    let mut payload = Bitstring::new();
    let mut rates = Vec::with_capacity(symbols.len());
    for sym in symbols {
        rates.push(sym.rate());
        let bits = sym.to_bits();
        for &b in &bits[..bits.len() - 1] {
            payload.push_bit(b);
        }
    }
    let table = ByteTable::from_symbols(&rates);
    let mut stream = Vec::new();
    table.write_bytes(&mut stream);
    stream.extend_from_slice(
        encode_bytes(&rates, &table)
            .expect("histogram covers its own symbols")
            .bytes(),
    );
    (Bitstring::from_bytes(stream), payload)
}

/// Inverse of [`concat_encode`].
pub fn concat_decode(
    rate_stream: &Bitstring,
    payload: &Bitstring,
    count: usize,
) -> Result<Vec<CodePoint>, CodecError> {
    let bytes = rate_stream.bytes();
    let (table, used) = ByteTable::read_bytes(bytes)?;
    let coded = Bitstring::from_bytes(bytes[used..].to_vec());
    let rates = decode_bytes(&coded, &table, count)?;

    let needed: usize = rates.iter().map(|&r| r.saturating_sub(1) as usize).sum();
    if needed != payload.bit_len() {
        return Err(CodecError::LengthMismatch {
            expected: needed,
            got: payload.bit_len(),
        });
    }

    let mut out = Vec::with_capacity(count);
    let mut pos = 0;
    for rate in rates {
        let mut numerator = 0u64;
        for _ in 0..rate.saturating_sub(1) {
            numerator = (numerator << 1) | u64::from(payload.get_bit(pos).unwrap());
            pos += 1;
        }
        numerator = (numerator << 1) | 1; // the dropped terminal bit
        out.push(CodePoint::new(numerator, rate)?);
    }
    Ok(out)
}
