//! Quantized LCP lengths of the form `2^a * b`.
//!
//! With budget `f`, a length `l` is stored as `a = max(0, floor(log2(l / f)))`
//! and `b = floor(l / 2^a)`. The decoded value is the largest grid point not
//! exceeding `l`, it is exact below `f`, it undershoots by at most `l / f`
//! otherwise, and `b < 2f` so the pair needs only
//! `log log l + log 2f` bits.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("LCP length {len} exceeds the representable maximum {max}")]
    OutOfRange { len: usize, max: usize },
    #[error("cannot compare an exact LCP value with an approximate one")]
    MixedModes,
    #[error("invalid codec budget f = {0}")]
    InvalidBudget(usize),
}

/// An LCP length, exact or on the `2^a * b` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LcpValue {
    Exact(usize),
    Approx { a: u8, b: usize },
}

impl LcpValue {
    #[inline]
    pub fn decode(self) -> usize {
        match self {
            LcpValue::Exact(l) => l,
            LcpValue::Approx { a, b } => b << a,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, LcpValue::Exact(_))
    }

    /// Orders two values of the same mode by decoded length.
    pub fn compare(self, other: LcpValue) -> Result<Ordering, CodecError> {
        match (self, other) {
            (LcpValue::Exact(x), LcpValue::Exact(y)) => Ok(x.cmp(&y)),
            (LcpValue::Approx { .. }, LcpValue::Approx { .. }) => Ok(self.decode().cmp(&other.decode())),
            _ => Err(CodecError::MixedModes),
        }
    }

    /// The smaller of two values; both must share a mode.
    #[inline]
    pub fn min(self, other: LcpValue) -> LcpValue {
        debug_assert_eq!(self.is_exact(), other.is_exact());
        if other.decode() < self.decode() {
            other
        } else {
            self
        }
    }
}

/// Budget `f` and largest representable length, fixed for a trie's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecConfig {
    f: usize,
    max_len: usize,
}

impl CodecConfig {
    pub const DEFAULT_MAX_LEN: usize = 1 << 40;

    pub fn new(f: usize, max_len: usize) -> Result<Self, CodecError> {
        if f == 0 {
            return Err(CodecError::InvalidBudget(f));
        }
        Ok(Self { f, max_len })
    }

    /// `f = ceil(log2 n_max)`, the largest comparison count a zip-trie of at
    /// most `n_max` keys is expected to perform.
    pub fn for_capacity(n_max: u64) -> Self {
        let f = (n_max.max(2) - 1).ilog2() as usize + 1;
        Self {
            f,
            max_len: Self::DEFAULT_MAX_LEN,
        }
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn encode(&self, len: usize) -> Result<LcpValue, CodecError> {
        if len > self.max_len {
            return Err(CodecError::OutOfRange { len, max: self.max_len });
        }
        Ok(self.quantize(len))
    }

    /// Unchecked [`CodecConfig::encode`].
    #[inline]
    pub fn quantize(&self, len: usize) -> LcpValue {
        // floor(log2(l / f)) == floor(log2(floor(l / f))) for l >= f
        let a = if len < self.f { 0 } else { (len / self.f).ilog2() };
        LcpValue::Approx {
            a: a as u8,
            b: len >> a,
        }
    }

    /// Bits of the fixed-width `b` field: `ceil(log2(2f))`.
    pub fn mantissa_bits(&self) -> u32 {
        ceil_log2(2 * self.f)
    }

    /// Bits of the fixed-width `a` field, enough for any length up to `max_len`.
    pub fn exponent_bits(&self) -> u32 {
        match self.quantize(self.max_len) {
            LcpValue::Approx { a, .. } => bit_length(a as usize),
            LcpValue::Exact(_) => unreachable!(),
        }
    }

    /// Bits actually needed by one encoded value: the significant bits of `a`
    /// plus the fixed mantissa field.
    pub fn packed_width(&self, value: LcpValue) -> u32 {
        match value {
            LcpValue::Approx { a, .. } => bit_length(a as usize) + self.mantissa_bits(),
            LcpValue::Exact(l) => bit_length(l),
        }
    }

    /// Physical layout: `a` in the high field, `b` in the low field.
    pub fn pack(&self, value: LcpValue) -> u64 {
        match value {
            LcpValue::Approx { a, b } => ((a as u64) << self.mantissa_bits()) | b as u64,
            LcpValue::Exact(l) => l as u64,
        }
    }

    pub fn unpack(&self, word: u64) -> LcpValue {
        let mb = self.mantissa_bits();
        LcpValue::Approx {
            a: (word >> mb) as u8,
            b: (word & ((1u64 << mb) - 1)) as usize,
        }
    }
}

/// How a trie stores its LCP metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetadataCodec {
    /// Exact lengths (the memory-intensive variant).
    Exact,
    /// Lengths quantized to the `2^a * b` grid.
    Approx(CodecConfig),
}

impl MetadataCodec {
    #[inline]
    pub fn quantize(&self, len: usize) -> LcpValue {
        match self {
            MetadataCodec::Exact => LcpValue::Exact(len),
            MetadataCodec::Approx(cfg) => cfg.quantize(len),
        }
    }

    pub fn zero(&self) -> LcpValue {
        self.quantize(0)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MetadataCodec::Exact)
    }
}

pub fn encode(len: usize, cfg: &CodecConfig) -> Result<LcpValue, CodecError> {
    cfg.encode(len)
}

pub fn decode(value: LcpValue) -> usize {
    value.decode()
}

fn bit_length(x: usize) -> u32 {
    usize::BITS - x.leading_zeros()
}

fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        (x - 1).ilog2() + 1
    }
}
