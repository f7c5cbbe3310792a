//! Packed string keys.
//!
//! A [`PackedKey`] stores `alpha` characters per machine word with the first
//! character in the most significant bits, so that comparing words as unsigned
//! integers agrees with lexicographic order and `msb(a ^ b)` locates the first
//! differing character.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::ledger::CostLedger;

/// Default machine word width in bits.
pub const DEFAULT_WORD_BITS: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("invalid alphabet: {bits_per_char} bits per char on {word_bits}-bit words")]
    InvalidAlphabet { bits_per_char: u32, word_bits: u32 },
    #[error("character code {code} at offset {offset} does not fit in {bits} bits")]
    CodeOutOfRange { code: u8, offset: usize, bits: u32 },
    #[error("symbol {symbol:?} at offset {offset} is not part of the {encoding} alphabet")]
    UnknownSymbol {
        symbol: char,
        offset: usize,
        encoding: &'static str,
    },
}

/// Character width and word width of a packing.
///
/// Character codes are bytes, so `bits_per_char` is at most 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    bits_per_char: u32,
    word_bits: u32,
}

impl Alphabet {
    pub fn new(bits_per_char: u32, word_bits: u32) -> Result<Self, KeyError> {
        if bits_per_char == 0 || bits_per_char > 8 || !(1..=64).contains(&word_bits) || bits_per_char > word_bits {
            return Err(KeyError::InvalidAlphabet {
                bits_per_char,
                word_bits,
            });
        }
        Ok(Self {
            bits_per_char,
            word_bits,
        })
    }

    /// 8-bit characters on 64-bit words.
    pub fn bytes() -> Self {
        Self::new(8, DEFAULT_WORD_BITS).unwrap()
    }

    /// 2-bit nucleotides on 64-bit words.
    pub fn dna() -> Self {
        Self::new(2, DEFAULT_WORD_BITS).unwrap()
    }

    pub fn bits_per_char(&self) -> u32 {
        self.bits_per_char
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    /// Characters per word.
    pub fn alpha(&self) -> usize {
        (self.word_bits / self.bits_per_char) as usize
    }

    pub fn max_code(&self) -> u8 {
        ((1u16 << self.bits_per_char) - 1) as u8
    }

    fn char_mask(&self) -> u64 {
        (1u64 << self.bits_per_char) - 1
    }

    /// Bit shift of character slot `slot` (0 = leftmost) inside a word.
    #[inline]
    fn shift(&self, slot: usize) -> u32 {
        self.word_bits - (slot as u32 + 1) * self.bits_per_char
    }

    /// Number of words needed for `chars` characters.
    #[inline]
    pub fn words_for(&self, chars: usize) -> usize {
        chars.div_ceil(self.alpha())
    }
}

/// Maps raw text symbols to character codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextEncoding {
    /// Every byte is its own code.
    Bytes,
    /// `A, C, G, T` (either case) map to `0, 1, 2, 3`.
    Dna,
}

impl TextEncoding {
    pub fn alphabet(self, word_bits: u32) -> Alphabet {
        match self {
            TextEncoding::Bytes => Alphabet::new(8, word_bits).unwrap(),
            TextEncoding::Dna => Alphabet::new(2, word_bits).unwrap(),
        }
    }

    pub fn encode(self, text: &[u8]) -> Result<Vec<u8>, KeyError> {
        match self {
            TextEncoding::Bytes => Ok(text.to_vec()),
            TextEncoding::Dna => text
                .iter()
                .enumerate()
                .map(|(offset, &sym)| match sym {
                    b'A' | b'a' => Ok(0),
                    b'C' | b'c' => Ok(1),
                    b'G' | b'g' => Ok(2),
                    b'T' | b't' => Ok(3),
                    _ => Err(KeyError::UnknownSymbol {
                        symbol: sym as char,
                        offset,
                        encoding: "DNA",
                    }),
                })
                .collect(),
        }
    }

    pub fn decode(self, codes: &[u8]) -> Vec<u8> {
        match self {
            TextEncoding::Bytes => codes.to_vec(),
            TextEncoding::Dna => codes.iter().map(|&c| b"ACGT"[(c & 3) as usize]).collect(),
        }
    }
}

/// A string packed `alpha` characters per word, first character highest.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PackedKey {
    words: Vec<u64>,
    char_len: usize,
    alphabet: Alphabet,
}

impl PackedKey {
    /// Packs a sequence of character codes.
    pub fn pack(codes: &[u8], alphabet: Alphabet) -> Result<Self, KeyError> {
        let alpha = alphabet.alpha();
        let max = alphabet.max_code();
        let mut words = vec![0u64; alphabet.words_for(codes.len())];
        for (i, &c) in codes.iter().enumerate() {
            if c > max {
                return Err(KeyError::CodeOutOfRange {
                    code: c,
                    offset: i,
                    bits: alphabet.bits_per_char,
                });
            }
            words[i / alpha] |= (c as u64) << alphabet.shift(i % alpha);
        }
        Ok(Self {
            words,
            char_len: codes.len(),
            alphabet,
        })
    }

    /// Packs raw text through `encoding`.
    pub fn from_text(text: &[u8], encoding: TextEncoding, word_bits: u32) -> Result<Self, KeyError> {
        Self::pack(&encoding.encode(text)?, encoding.alphabet(word_bits))
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Self {
            words: Vec::new(),
            char_len: 0,
            alphabet,
        }
    }

    pub fn unpack(&self) -> Vec<u8> {
        (0..self.char_len).map(|i| self.code_at(i)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.char_len
    }

    pub fn is_empty(&self) -> bool {
        self.char_len == 0
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Code of character `i`; `i` must be in range.
    #[inline]
    pub fn code_at(&self, i: usize) -> u8 {
        debug_assert!(i < self.char_len);
        let alpha = self.alphabet.alpha();
        ((self.words[i / alpha] >> self.alphabet.shift(i % alpha)) & self.alphabet.char_mask()) as u8
    }

    /// Character at `i`, or `None` once the key is exhausted.
    #[inline]
    pub fn char_at(&self, i: usize) -> Option<u8> {
        (i < self.char_len).then(|| self.code_at(i))
    }

    /// Copy of the first `len` characters.
    pub fn prefix(&self, len: usize) -> PackedKey {
        let len = len.min(self.char_len);
        let alpha = self.alphabet.alpha();
        let nwords = self.alphabet.words_for(len);
        let mut words = self.words[..nwords].to_vec();
        let used = len % alpha;
        if used != 0 {
            let keep = used as u32 * self.alphabet.bits_per_char;
            let mask = !0u64 << (self.alphabet.word_bits - keep);
            let width_mask = word_mask(self.alphabet.word_bits);
            *words.last_mut().unwrap() &= mask & width_mask;
        }
        PackedKey {
            words,
            char_len: len,
            alphabet: self.alphabet,
        }
    }

    /// True when `prefix` is a prefix of `self`.
    pub fn starts_with(&self, prefix: &PackedKey) -> bool {
        prefix.len() <= self.len() && lcp_from(self, prefix, 0, &mut CostLedger::default()) == prefix.len()
    }
}

impl fmt::Debug for PackedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes = self.unpack();
        if self.alphabet.bits_per_char == 8 {
            write!(f, "PackedKey({:?})", String::from_utf8_lossy(&codes))
        } else {
            write!(f, "PackedKey({:?})", codes)
        }
    }
}

impl Ord for PackedKey {
    /// Word-integer order over the shared words, then length.
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.alphabet, other.alphabet);
        for (a, b) in self.words.iter().zip(&other.words) {
            match a.cmp(b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.char_len.cmp(&other.char_len)
    }
}

impl PartialOrd for PackedKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn word_mask(word_bits: u32) -> u64 {
    if word_bits == 64 {
        !0
    } else {
        (1u64 << word_bits) - 1
    }
}

/// Index (from the top, 0-based) of the most significant set bit of a
/// `word_bits`-wide word. The zero word yields `word_bits`.
#[inline]
pub fn msb(word: u64, word_bits: u32) -> u32 {
    if word == 0 {
        word_bits
    } else {
        word_bits - 1 - word.ilog2()
    }
}

/// Index of the first nonzero word, or `words.len()` if all are zero.
pub fn msw_linear(words: &[u64]) -> usize {
    words.iter().position(|&w| w != 0).unwrap_or(words.len())
}

/// XOR of word `i` of both keys with the characters before `start` masked off.
#[inline]
pub(crate) fn masked_xor(a: &PackedKey, b: &PackedKey, word: usize, start: usize) -> u64 {
    let alphabet = a.alphabet;
    let alpha = alphabet.alpha();
    let mut x = a.words[word] ^ b.words[word];
    let first = word * alpha;
    if start > first {
        let skip = ((start - first) as u32) * alphabet.bits_per_char;
        x &= word_mask(alphabet.word_bits).checked_shr(skip).unwrap_or(0);
    }
    x
}

/// Absolute LCP length of `a` and `b`, resuming at `start`.
///
/// Charges one unit of `words_examined` (and sequential work/span) per word
/// XOR-ed. `a[..start]` must equal `b[..start]`.
pub fn lcp_from(a: &PackedKey, b: &PackedKey, start: usize, ledger: &mut CostLedger) -> usize {
    let (lcp, words) = lcp_scan(a, b, start);
    ledger.charge_sequential_words(words);
    lcp
}

/// Returns `(lcp, words_scanned)`.
pub(crate) fn lcp_scan(a: &PackedKey, b: &PackedKey, start: usize) -> (usize, u64) {
    debug_assert_eq!(a.alphabet, b.alphabet);
    let min_len = a.char_len.min(b.char_len);
    assert!(start <= min_len, "lcp_from: start {start} beyond key length {min_len}");
    if start == min_len {
        return (min_len, 0);
    }
    let alphabet = a.alphabet;
    let alpha = alphabet.alpha();
    let last_word = (min_len - 1) / alpha;
    let mut scanned = 0u64;
    for w in start / alpha..=last_word {
        scanned += 1;
        let x = masked_xor(a, b, w, start);
        if x != 0 {
            let bit = msb(x, alphabet.word_bits);
            let pos = w * alpha + (bit / alphabet.bits_per_char) as usize;
            return (pos.min(min_len), scanned);
        }
    }
    (min_len, scanned)
}

/// Compares the characters at `pos`, where an exhausted key sorts first.
#[inline]
pub fn compare_at(a: &PackedKey, b: &PackedKey, pos: usize) -> Ordering {
    a.char_at(pos).cmp(&b.char_at(pos))
}
