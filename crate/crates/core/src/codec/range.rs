//! Byte-oriented range coder with 64-bit integer state.
//!
//! The encoder keeps the active interval as `[low, low + range)` with
//! `range` renormalized into [2^48, 2^56); symbol frequencies use 32-bit
//! precision, so the per-symbol truncation loss is bounded by
//! total/range <= 2^-16 bits. Carries are resolved LZMA-style through a
//! cached byte plus a run of pending 0xFF bytes. Termination rounds `low`
//! up to a multiple of 2^48 inside the final interval, which costs a single
//! byte; the decoder zero-fills reads past the end of the stream.
//!
//! Everything is integer arithmetic: identical inputs produce identical
//! bytes on every platform.

use alloc::vec::Vec;

const LOW_BITS: u32 = 56;
const LOW_MASK: u64 = (1u64 << LOW_BITS) - 1;
const RENORM: u64 = 1u64 << 48;

pub struct RangeEncoder {
    low: u64,
    range: u64,
    cache: u8,
    cache_filled: bool,
    pending_ff: u64,
    out: Vec<u8>,
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: LOW_MASK,
            cache: 0,
            cache_filled: false,
            pending_ff: 0,
            out: Vec::new(),
        }
    }

    fn shift_low(&mut self) {
        let carry = (self.low >> LOW_BITS) as u8;
        let top = ((self.low >> (LOW_BITS - 8)) & 0xff) as u8;
        if carry == 1 || top != 0xff {
            if self.cache_filled {
                self.out.push(self.cache.wrapping_add(carry));
            }
            // A carry with nothing cached would mean the coded value
            // reached 1.0, which the interval invariant rules out. (A
            // pending 0xFF run with no cache is fine: the stream simply
            // starts with 0xFF bytes.)
            debug_assert!(self.cache_filled || carry == 0);
            while self.pending_ff > 0 {
                self.out.push(0xffu8.wrapping_add(carry));
                self.pending_ff -= 1;
            }
            self.cache = top;
            self.cache_filled = true;
        } else {
            self.pending_ff += 1;
        }
        self.low = (self.low << 8) & LOW_MASK;
    }

    /// Narrows the interval to the symbol occupying `[cum, cum + freq)` out
    /// of `total`.
    pub fn encode(&mut self, cum: u64, freq: u64, total: u64) {
        debug_assert!(freq > 0 && cum + freq <= total);
        debug_assert!(total <= u32::MAX as u64 + 1);
        let r = self.range / total;
        self.low += r * cum;
        self.range = r * freq;
        if self.low > LOW_MASK {
            // Carry is resolved on the next shift; keep low in 57 bits.
            debug_assert!(self.low < (1u64 << (LOW_BITS + 1)));
        }
        while self.range < RENORM {
            self.shift_low();
            self.range <<= 8;
        }
    }

    /// Flushes the final interval, emitting the minimal terminating byte.
    pub fn finish(mut self) -> Vec<u8> {
        // Round low up to a multiple of 2^48 inside [low, low + range);
        // everything below that multiple is zero, which matches the
        // decoder's zero-fill past the end of the stream.
        let v = (self.low + (RENORM - 1)) & !(RENORM - 1);
        debug_assert!(v - self.low < self.range);
        self.low = v;
        self.shift_low();
        self.shift_low();
        self.out
    }
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

pub struct RangeDecoder<'a> {
    code: u64,
    range: u64,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        let mut d = Self {
            code: 0,
            range: LOW_MASK,
            bytes,
            pos: 0,
        };
        for _ in 0..7 {
            d.code = (d.code << 8) | u64::from(d.next_byte());
        }
        d
    }

    fn next_byte(&mut self) -> u8 {
        let b = self.bytes.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// Bit position of the decode cursor, for error reports.
    pub fn bit_offset(&self) -> usize {
        self.pos.min(self.bytes.len()) * 8
    }

    /// The scaled code value identifying the next symbol; the caller maps
    /// it to the symbol whose cumulative range contains it. Values >= total
    /// indicate a corrupt stream.
    pub fn decode_value(&self, total: u64) -> u64 {
        self.code / (self.range / total)
    }

    /// Consumes the symbol occupying `[cum, cum + freq)` out of `total`.
    pub fn advance(&mut self, cum: u64, freq: u64, total: u64) {
        let r = self.range / total;
        self.code -= r * cum;
        self.range = r * freq;
        while self.range < RENORM {
            self.code = ((self.code << 8) | u64::from(self.next_byte())) & LOW_MASK;
            self.range <<= 8;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn uniform_pair_roundtrip() {
        // Two equiprobable symbols: the stream is about one bit per symbol.
        let syms: Vec<u64> = (0..1000).map(|i| (i * 7 + i / 3) % 2).collect();
        let mut enc = RangeEncoder::new();
        for &s in &syms {
            enc.encode(s, 1, 2);
        }
        let bytes = enc.finish();
        assert!(bytes.len() * 8 >= 1000);
        assert!(bytes.len() * 8 <= 1032);

        let mut dec = RangeDecoder::new(&bytes);
        for &s in &syms {
            let dv = dec.decode_value(2);
            assert_eq!(dv, s);
            dec.advance(dv, 1, 2);
        }
    }

    #[test]
    fn degenerate_alphabet_costs_only_termination() {
        let mut enc = RangeEncoder::new();
        for _ in 0..10_000 {
            enc.encode(0, 1, 1);
        }
        let bytes = enc.finish();
        assert!(bytes.len() * 8 <= 32, "got {} bits", bytes.len() * 8);
    }

    #[test]
    fn skewed_roundtrip_with_carry_pressure() {
        // 255:1 skew produces long runs of 0xFF in the encoder state.
        let counts = [255u64, 1];
        let cums = [0u64, 255];
        let total = 256u64;
        let syms: Vec<usize> = (0..50_000).map(|i| usize::from(i % 97 == 0)).collect();
        let mut enc = RangeEncoder::new();
        for &s in &syms {
            enc.encode(cums[s], counts[s], total);
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes);
        for &s in &syms {
            let dv = dec.decode_value(total);
            let sym = usize::from(dv >= 255);
            assert_eq!(sym, s);
            dec.advance(cums[sym], counts[sym], total);
        }
    }
}
