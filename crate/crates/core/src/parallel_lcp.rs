//! Chunked parallel LCP computation under a simulated PRAM/PEM cost model.
//!
//! A parallel LCP oracle round compares a window of words in one unit of
//! span and one unit of work per word. The two chunk schedules decide how
//! many words each round is given:
//!
//! * [`ChunkPolicy::Fixed`] always hands out `ceil(K / f)` words, `K` being the
//!   search key's length in words; each search does `O(f + A)` rounds.
//! * [`ChunkPolicy::Adaptive`] starts every comparison at half the previous
//!   window and doubles after each window that matched completely, so work
//!   tracks the LCP rather than the key length.
//!
//! Items handed to the oracle are packed words, not characters.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::bookend::{k_compare, BookendState, CompareOutcome, LcpOracle, SequentialLcp};
use crate::lcp_codec::{LcpValue, MetadataCodec};
use crate::ledger::CostLedger;
use crate::packed_key::{masked_xor, msb, PackedKey};

/// Below this many words per worker a window is scanned on the calling thread.
const MIN_WORDS_PER_WORKER: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChunkPolicy {
    /// Sequential word scan, no oracle rounds.
    None,
    Fixed,
    Adaptive,
}

impl std::str::FromStr for ChunkPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ChunkPolicy::None),
            "fixed" => Ok(ChunkPolicy::Fixed),
            "adaptive" => Ok(ChunkPolicy::Adaptive),
            other => Err(format!("unknown chunk policy {other:?}")),
        }
    }
}

/// Outcome of one oracle round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowResult {
    /// Absolute LCP if the window decided it, otherwise the window's end.
    pub lcp: usize,
    /// The window matched and neither key ended inside it, so the
    /// comparison is still undecided.
    pub all_equal: bool,
}

/// Scans words `[first_word, end_word)` of both keys, masking characters
/// before `start`. Returns `(first mismatch position, words touched)`.
fn scan_words(
    a: &PackedKey,
    b: &PackedKey,
    start: usize,
    first_word: usize,
    end_word: usize,
    workers: usize,
) -> (Option<usize>, u64) {
    let touched = end_word.saturating_sub(first_word) as u64;
    if first_word >= end_word {
        return (None, 0);
    }
    let alphabet = a.alphabet();
    let alpha = alphabet.alpha();
    let locate = |w: usize| -> Option<usize> {
        let x = masked_xor(a, b, w, start);
        (x != 0).then(|| w * alpha + (msb(x, alphabet.word_bits()) / alphabet.bits_per_char()) as usize)
    };
    let n = end_word - first_word;
    if workers <= 1 || n < 2 * MIN_WORDS_PER_WORKER {
        return ((first_word..end_word).find_map(locate), touched);
    }
    let per = n.div_ceil(workers);
    let hit = (0..workers)
        .into_par_iter()
        .filter_map(|k| {
            let lo = first_word + k * per;
            let hi = (lo + per).min(end_word);
            (lo..hi).find_map(locate)
        })
        .min();
    (hit, touched)
}

/// One parallel LCP round over characters `[start, limit)`.
///
/// `a[..start]` must equal `b[..start]`. Charges one span unit and the
/// number of words touched as work.
pub fn parallel_lcp_oracle(
    a: &PackedKey,
    b: &PackedKey,
    start: usize,
    limit: usize,
    ledger: &mut CostLedger,
) -> WindowResult {
    parallel_lcp_oracle_with(a, b, start, limit, 1, ledger)
}

/// [`parallel_lcp_oracle`] with the window split among `workers` threads.
pub fn parallel_lcp_oracle_with(
    a: &PackedKey,
    b: &PackedKey,
    start: usize,
    limit: usize,
    workers: usize,
    ledger: &mut CostLedger,
) -> WindowResult {
    let min_len = a.len().min(b.len());
    let end = limit.min(min_len);
    let alpha = a.alphabet().alpha();
    if start >= end {
        ledger.charge_oracle_round(0);
        return if start >= min_len {
            WindowResult {
                lcp: min_len,
                all_equal: false,
            }
        } else {
            WindowResult {
                lcp: start,
                all_equal: true,
            }
        };
    }
    let (hit, touched) = scan_words(a, b, start, start / alpha, end.div_ceil(alpha), workers);
    ledger.charge_oracle_round(touched);
    match hit {
        Some(p) if p < end => WindowResult {
            lcp: p,
            all_equal: false,
        },
        _ if end == min_len => WindowResult {
            lcp: min_len,
            all_equal: false,
        },
        _ => WindowResult {
            lcp: end,
            all_equal: true,
        },
    }
}

/// Window-size state carried across the comparisons of one search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkSchedule {
    policy: ChunkPolicy,
    f: usize,
    /// Fixed window, in words.
    chunk_words: usize,
    /// Adaptive window, in words.
    delta: usize,
    started: bool,
}

impl ChunkSchedule {
    /// Schedule for searching a key of `key_chars` characters.
    pub fn new(policy: ChunkPolicy, f: usize, key_chars: usize, alpha: usize) -> Self {
        let key_words = key_chars.div_ceil(alpha);
        Self {
            policy,
            f: f.max(1),
            chunk_words: key_words.div_ceil(f.max(1)).max(1),
            delta: 1,
            started: false,
        }
    }

    pub fn policy(&self) -> ChunkPolicy {
        self.policy
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn chunk_words(&self) -> usize {
        self.chunk_words
    }

    /// Current adaptive window in words.
    pub fn delta(&self) -> usize {
        self.delta
    }
}

/// LCP oracle that feeds windows to [`parallel_lcp_oracle`] according to a
/// [`ChunkSchedule`]; with [`ChunkPolicy::None`] it falls back to the
/// sequential scan.
#[derive(Debug, Clone)]
pub struct ChunkedLcp {
    pub schedule: ChunkSchedule,
    pub workers: usize,
}

impl ChunkedLcp {
    pub fn new(schedule: ChunkSchedule) -> Self {
        Self { schedule, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

impl LcpOracle for ChunkedLcp {
    fn lcp(&mut self, x: &PackedKey, v: &PackedKey, start: usize, ledger: &mut CostLedger) -> usize {
        let alpha = x.alphabet().alpha();
        let sched = &mut self.schedule;
        let mut word = start / alpha;
        match sched.policy {
            ChunkPolicy::None => SequentialLcp.lcp(x, v, start, ledger),
            ChunkPolicy::Fixed => loop {
                let limit = (word + sched.chunk_words) * alpha;
                let r = parallel_lcp_oracle_with(x, v, start.max(word * alpha), limit, self.workers, ledger);
                if !r.all_equal {
                    return r.lcp;
                }
                word += sched.chunk_words;
            },
            ChunkPolicy::Adaptive => {
                if sched.started {
                    sched.delta = (sched.delta / 2).max(1);
                }
                sched.started = true;
                loop {
                    let limit = (word + sched.delta) * alpha;
                    let r = parallel_lcp_oracle_with(x, v, start.max(word * alpha), limit, self.workers, ledger);
                    if !r.all_equal {
                        return r.lcp;
                    }
                    word += sched.delta;
                    sched.delta *= 2;
                }
            }
        }
    }
}

/// [`k_compare`] whose character scan runs through a chunked oracle.
pub fn k_compare_chunked(
    x: &PackedKey,
    v: &PackedKey,
    v_lcp: LcpValue,
    state: &BookendState,
    codec: &MetadataCodec,
    oracle: &mut ChunkedLcp,
    ledger: &mut CostLedger,
) -> CompareOutcome {
    k_compare(x, v, v_lcp, state, codec, oracle, ledger)
}

/// Constant span charged by [`msw_sqrt`]: group flags, MSW of the flags,
/// MSW inside the winning group.
pub const MSW_SQRT_SPAN: u64 = 3;

/// First nonzero position among `flags` by all-pairs elimination: position
/// `j` survives iff it is set and no earlier position is set. Returns the
/// survivor (or `flags.len()`) and the number of pairs examined.
fn all_pairs_msw(flags: &[bool]) -> (usize, u64) {
    let n = flags.len();
    let pairs = (n * n.saturating_sub(1) / 2) as u64;
    let survivor = (0..n).find(|&j| flags[j] && !(0..j).any(|i| flags[i])).unwrap_or(n);
    (survivor, pairs)
}

/// Most significant (first nonzero) word by two-level square-root
/// decomposition. Same answer as [`crate::packed_key::msw_linear`].
pub fn msw_sqrt(words: &[u64], ledger: &mut CostLedger) -> usize {
    let m = words.len();
    ledger.span_units += MSW_SQRT_SPAN;
    if m == 0 {
        return 0;
    }
    let mut g = m.isqrt();
    if g * g < m {
        g += 1;
    }
    let flags: Vec<bool> = words.chunks(g).map(|c| c.iter().any(|&w| w != 0)).collect();
    let (group, pairs_outer) = all_pairs_msw(&flags);
    ledger.work_units += m as u64 + pairs_outer;
    if group == flags.len() {
        return m;
    }
    let lo = group * g;
    let hi = (lo + g).min(m);
    let inner: Vec<bool> = words[lo..hi].iter().map(|&w| w != 0).collect();
    let (idx, pairs_inner) = all_pairs_msw(&inner);
    ledger.work_units += pairs_inner;
    lo + idx
}

/// Constant I/O span of [`pem_lcp`]: the block-flag round and one block fetch.
pub const PEM_LCP_IO_SPAN: u64 = 2;

/// LCP by blocks of `block_words` words: flag every block holding a nonzero
/// XOR word, pick the first flagged block, fetch it and take its MSB.
pub fn pem_lcp(a: &PackedKey, b: &PackedKey, start: usize, block_words: usize, ledger: &mut CostLedger) -> usize {
    let block = block_words.max(1);
    let min_len = a.len().min(b.len());
    assert!(start <= min_len, "pem_lcp: start {start} beyond key length {min_len}");
    ledger.io_span += PEM_LCP_IO_SPAN;
    if start == min_len {
        ledger.io_work += 1;
        return min_len;
    }
    let alphabet = a.alphabet();
    let alpha = alphabet.alpha();
    let first = start / alpha;
    let end = min_len.div_ceil(alpha);
    let xors: Vec<u64> = (first..end).map(|w| masked_xor(a, b, w, start)).collect();
    let block_flags: Vec<u64> = xors.chunks(block).map(|c| c.iter().any(|&w| w != 0) as u64).collect();
    ledger.io_work += block_flags.len() as u64 + 1;
    // block selection runs in internal memory
    let hit_block = msw_sqrt(&block_flags, &mut CostLedger::default());
    if hit_block == block_flags.len() {
        return min_len;
    }
    let base = hit_block * block;
    let in_block = &xors[base..(base + block).min(xors.len())];
    let w = in_block.iter().position(|&x| x != 0).unwrap();
    let pos = (first + base + w) * alpha + (msb(in_block[w], alphabet.word_bits()) / alphabet.bits_per_char()) as usize;
    pos.min(min_len)
}

/// Orders `x` against `v` by a full parallel comparison from scratch.
pub fn compare_parallel(x: &PackedKey, v: &PackedKey, ledger: &mut CostLedger) -> Ordering {
    let r = parallel_lcp_oracle(x, v, 0, usize::MAX, ledger);
    crate::packed_key::compare_at(x, v, r.lcp)
}
