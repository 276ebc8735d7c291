//! Bit-granular byte buffers shared by the codecs.

use alloc::vec::Vec;

/// A bit sequence stored MSB-first in a byte vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bitstring {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl Bitstring {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps whole bytes (bit length = 8 * byte count).
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_len = bytes.len() * 8;
        Self { bytes, bit_len }
    }

    /// Wraps bytes with an explicit bit length; the tail padding must be
    /// within the final byte.
    pub fn from_bytes_with_len(bytes: Vec<u8>, bit_len: usize) -> Option<Self> {
        if bit_len > bytes.len() * 8 || bytes.len() * 8 - bit_len >= 8 {
            return None;
        }
        Some(Self { bytes, bit_len })
    }

    pub fn push_bit(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        if self.bit_len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        let byte = self.bytes.last_mut().unwrap();
        *byte |= bit << (7 - (self.bit_len % 8));
        self.bit_len += 1;
    }

    pub fn get_bit(&self, idx: usize) -> Option<u8> {
        if idx >= self.bit_len {
            return None;
        }
        Some((self.bytes[idx / 8] >> (7 - idx % 8)) & 1)
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}
