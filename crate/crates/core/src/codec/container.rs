//! The compressed container: everything a receiver needs to reconstruct the
//! quantized vector.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic    "VBQ1"                        4 bytes
//! version  u8 = 1
//! mode     u8 (0 header-table, 1 external-table)
//! K        u64
//! prior    tag byte + variant payload (see prior module)
//! table    header-table mode: serialized frequency table
//!          external-table mode: u32 table checksum
//! bits     u64 payload bit length
//! payload  ceil(bits / 8) bytes, zero padded
//! ```

use alloc::vec::Vec;

use crate::dyadic::CodePoint;
use crate::prior::PriorModel;

use super::bits::Bitstring;
use super::table::FrequencyTable;
use super::{ac_decode, ac_encode, CodecError};

pub const MAGIC: [u8; 4] = *b"VBQ1";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    /// The frequency table travels in the header and counts toward the
    /// total bitrate.
    HeaderTable,
    /// Only a checksum travels; the receiver already holds the table
    /// (e.g. estimated on training data).
    ExternalTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedContainer {
    pub mode: TableMode,
    pub prior: PriorModel,
    pub k: u64,
    /// Present in header-table mode.
    pub table: Option<FrequencyTable>,
    /// Present in external-table mode.
    pub table_checksum: Option<u32>,
    pub payload: Bitstring,
    /// Serialized size of everything before the payload bytes.
    pub header_bytes: usize,
}

impl CompressedContainer {
    /// Bits the sender is accountable for: header plus payload. In
    /// header-table mode this includes the table serialization.
    pub fn total_bits(&self) -> u64 {
        self.header_bytes as u64 * 8 + self.payload.bit_len() as u64
    }

    /// Decodes the payload back into code points. External-table mode
    /// requires the out-of-band table, which is verified against the stored
    /// checksum.
    pub fn decode_symbols(
        &self,
        external: Option<&FrequencyTable>,
    ) -> Result<Vec<CodePoint>, CodecError> {
        let table = match self.mode {
            TableMode::HeaderTable => self.table.as_ref().expect("present by construction"),
            TableMode::ExternalTable => {
                let t = external.ok_or(CodecError::MissingExternalTable)?;
                if t.checksum() != self.table_checksum.expect("present by construction") {
                    return Err(CodecError::ChecksumMismatch);
                }
                t
            }
        };
        ac_decode(&self.payload, table, self.k as usize)
    }
}

/// Encodes `symbols` under `table` and assembles the container bytes.
pub fn write_container(
    prior: &PriorModel,
    symbols: &[CodePoint],
    table: &FrequencyTable,
    mode: TableMode,
) -> Result<Vec<u8>, CodecError> {
    let payload = ac_encode(symbols, table)?;
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(match mode {
        TableMode::HeaderTable => 0,
        TableMode::ExternalTable => 1,
    });
    out.extend_from_slice(&(symbols.len() as u64).to_le_bytes());
    prior.write_bytes(&mut out);
    match mode {
        TableMode::HeaderTable => table.write_bytes(&mut out),
        TableMode::ExternalTable => out.extend_from_slice(&table.checksum().to_le_bytes()),
    }
    out.extend_from_slice(&(payload.bit_len() as u64).to_le_bytes());
    out.extend_from_slice(payload.bytes());
    Ok(out)
}

/// Parses container bytes. Magic, version, checksum, and truncation
/// problems are reported as distinct errors.
pub fn read_container(bytes: &[u8]) -> Result<CompressedContainer, CodecError> {
    let magic = bytes.get(..4).ok_or(CodecError::Truncated)?;
    if magic != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let version = *bytes.get(4).ok_or(CodecError::Truncated)?;
    if version != VERSION {
        return Err(CodecError::BadVersion(version));
    }
    let mode = match *bytes.get(5).ok_or(CodecError::Truncated)? {
        0 => TableMode::HeaderTable,
        1 => TableMode::ExternalTable,
        _ => return Err(CodecError::Corrupt { bit_offset: 40 }),
    };
    let k = bytes
        .get(6..14)
        .ok_or(CodecError::Truncated)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))?;
    let (prior, prior_len) = PriorModel::read_bytes(&bytes[14..])?;
    let mut at = 14 + prior_len;

    let (table, table_checksum) = match mode {
        TableMode::HeaderTable => {
            let (t, used) = FrequencyTable::read_bytes(&bytes[at..])?;
            at += used;
            (Some(t), None)
        }
        TableMode::ExternalTable => {
            let sum = bytes
                .get(at..at + 4)
                .ok_or(CodecError::Truncated)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))?;
            at += 4;
            (None, Some(sum))
        }
    };

    let bit_len = bytes
        .get(at..at + 8)
        .ok_or(CodecError::Truncated)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))? as usize;
    at += 8;
    let header_bytes = at;
    let payload_bytes = bit_len.div_ceil(8);
    let payload = bytes
        .get(at..at + payload_bytes)
        .ok_or(CodecError::Truncated)?;
    let payload = Bitstring::from_bytes_with_len(payload.to_vec(), bit_len)
        .ok_or(CodecError::Corrupt { bit_offset: at * 8 })?;

    Ok(CompressedContainer {
        mode,
        prior,
        k,
        table,
        table_checksum,
        payload,
        header_bytes,
    })
}
