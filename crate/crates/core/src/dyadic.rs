//! Exact arithmetic on dyadic quantile code points.
//!
//! A code point is a quantile of the form n / 2^R with 1 <= R <= 60 and odd
//! numerator n (canonical form: the terminal bit of the binary fraction is
//! always 1). All arithmetic is integer arithmetic on (n, R); the only
//! float operations are the one-time conversions of a quantile target via
//! multiplication by 2^r and floor/ceil, which are bit-exact across
//! platforms.

use alloc::vec::Vec;

/// Hard cap on code-point rates, matching the prior module's quantile clamp.
pub const MAX_RATE: u8 = 60;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DyadicError {
    #[error("empty bit sequence")]
    EmptyBits,
    #[error("non-canonical representation: trailing zero bit")]
    TrailingZero,
    #[error("numerator {numerator} invalid at rate {rate}")]
    InvalidNumerator { numerator: u64, rate: u8 },
    #[error("rate {0} outside 1..={MAX_RATE}")]
    RateOutOfRange(u8),
    #[error("empty interval [{lo}, {hi})")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("no code point of rate <= {MAX_RATE} inside the interval")]
    IntervalTooNarrow,
}

/// A dyadic quantile n / 2^R in canonical form (n odd, 1 <= n < 2^R).
///
/// The comparison order is (rate, numerator) — the canonical serialization
/// order for frequency-table headers — not numeric order of the quantile
/// values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodePoint {
    rate: u8,
    numerator: u64,
}

impl Ord for CodePoint {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.rate
            .cmp(&other.rate)
            .then(self.numerator.cmp(&other.numerator))
    }
}

impl PartialOrd for CodePoint {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl CodePoint {
    /// The coarsest code point, 1/2.
    pub const HALF: CodePoint = CodePoint {
        rate: 1,
        numerator: 1,
    };

    pub fn new(numerator: u64, rate: u8) -> Result<Self, DyadicError> {
        if rate == 0 || rate > MAX_RATE {
            return Err(DyadicError::RateOutOfRange(rate));
        }
        if numerator.is_multiple_of(2) || numerator >= (1u64 << rate) {
            return Err(DyadicError::InvalidNumerator { numerator, rate });
        }
        Ok(CodePoint { rate, numerator })
    }

    /// Canonicalizes n / 2^r by stripping trailing zero bits.
    pub fn canonical(numerator: u64, rate: u8) -> Result<Self, DyadicError> {
        if numerator == 0 {
            return Err(DyadicError::InvalidNumerator { numerator, rate });
        }
        let tz = numerator.trailing_zeros().min(rate as u32 - 1) as u8;
        Self::new(numerator >> tz, rate - tz)
    }

    /// Builds a code point from the binary fraction 0.b1 b2 ... bR.
    pub fn from_bits(bits: &[u8]) -> Result<Self, DyadicError> {
        if bits.is_empty() {
            return Err(DyadicError::EmptyBits);
        }
        if *bits.last().unwrap() != 1 {
            return Err(DyadicError::TrailingZero);
        }
        if bits.len() > MAX_RATE as usize {
            return Err(DyadicError::RateOutOfRange(bits.len() as u8));
        }
        let mut n = 0u64;
        for &b in bits {
            debug_assert!(b <= 1);
            n = (n << 1) | u64::from(b);
        }
        Self::new(n, bits.len() as u8)
    }

    /// The binary fraction digits b1 ... bR, most significant first.
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.rate)
            .rev()
            .map(|k| ((self.numerator >> k) & 1) as u8)
            .collect()
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    /// Bitlength of the binary fraction, including the terminal 1.
    pub fn rate(&self) -> u8 {
        self.rate
    }

    /// The quantile value n / 2^R.
    pub fn value(&self) -> f64 {
        self.numerator as f64 / (1u64 << self.rate) as f64
    }

    /// Wire form used in container headers: the rate as one byte, then the
    /// numerator as a minimal big-endian sequence of ceil(R/8) bytes.
    pub fn write_wire(&self, out: &mut Vec<u8>) {
        out.push(self.rate);
        let nbytes = (self.rate as usize).div_ceil(8);
        let be = self.numerator.to_be_bytes();
        out.extend_from_slice(&be[8 - nbytes..]);
    }

    /// Parses the wire form, returning the code point and bytes consumed.
    pub fn read_wire(bytes: &[u8]) -> Result<(Self, usize), DyadicError> {
        let &rate = bytes.first().ok_or(DyadicError::EmptyBits)?;
        if rate == 0 || rate > MAX_RATE {
            return Err(DyadicError::RateOutOfRange(rate));
        }
        let nbytes = (rate as usize).div_ceil(8);
        let payload = bytes.get(1..1 + nbytes).ok_or(DyadicError::EmptyBits)?;
        let mut be = [0u8; 8];
        be[8 - nbytes..].copy_from_slice(payload);
        let numerator = u64::from_be_bytes(be);
        Ok((Self::new(numerator, rate)?, 1 + nbytes))
    }
}

/// A grid value at some rate r, possibly one of the interval boundaries 0 or
/// 1, which are not code points and must be rejected by callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridValue {
    Zero,
    One,
    Point(CodePoint),
}

impl GridValue {
    pub fn point(self) -> Option<CodePoint> {
        match self {
            GridValue::Point(cp) => Some(cp),
            _ => None,
        }
    }
}

/// The two rate-r grid values enclosing `target`: left = 2^-r floor(2^r t),
/// right = 2^-r ceil(2^r t). Non-boundary values come back canonicalized
/// (rate <= r).
pub fn neighbors_at_rate(target: f64, r: u8) -> (GridValue, GridValue) {
    debug_assert!(target > 0.0 && target < 1.0);
    debug_assert!((1..=MAX_RATE).contains(&r));
    let scale = (1u64 << r) as f64;
    let scaled = target * scale;
    let lo = libm::floor(scaled) as u64;
    let hi = libm::ceil(scaled) as u64;
    let left = if lo == 0 {
        GridValue::Zero
    } else {
        GridValue::Point(CodePoint::canonical(lo, r).unwrap())
    };
    let right = if hi >= (1u64 << r) {
        GridValue::One
    } else {
        GridValue::Point(CodePoint::canonical(hi, r).unwrap())
    };
    (left, right)
}

/// The code point in [lo, hi) with minimal canonical rate; ties broken
/// toward the smaller quantile value.
pub fn shortest_in_interval(lo: f64, hi: f64) -> Result<CodePoint, DyadicError> {
    if lo.is_nan() || hi.is_nan() || lo >= hi || lo < 0.0 || hi > 1.0 {
        return Err(DyadicError::EmptyInterval { lo, hi });
    }
    for rate in 1..=MAX_RATE {
        let scale = (1u64 << rate) as f64;
        // Smallest numerator with n/2^rate >= lo. The product only seeds the
        // search; the loop settles the boundary with exact grid-value
        // comparisons (n/2^rate is exact for rates up to 53).
        let seed = libm::ceil(lo * scale) as i64 - 2;
        let mut n = seed.max(1) as u64;
        while (n as f64) / scale < lo {
            n += 1;
        }
        // Only odd numerators have canonical rate equal to `rate`; an even
        // numerator was already visited (and rejected) at a coarser rate.
        if n.is_multiple_of(2) {
            n += 1;
        }
        if n < (1u64 << rate) && (n as f64) / scale < hi {
            return CodePoint::new(n, rate);
        }
    }
    Err(DyadicError::IntervalTooNarrow)
}
