//! Bookend comparisons.
//!
//! A search for `x` keeps the LCP of `x` with the closer of its two bookends,
//! the tightest predecessor and successor among the keys traversed so far.
//! Each node stores its own LCP with the same two bookends, so most
//! comparisons are decided by comparing two integers; characters are only
//! scanned when the two lengths tie, and then only from that common offset.

use std::cmp::Ordering;

use crate::lcp_codec::{LcpValue, MetadataCodec};
use crate::ledger::CostLedger;
use crate::packed_key::{compare_at, lcp_from, PackedKey};

/// Which bookend `x` shares its longer prefix with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Pred,
    Succ,
}

/// Running bookend state of one search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BookendState {
    pub side: Side,
    /// Exact LCP of `x` with the bookend on `side`.
    pub lcp_exact: usize,
    /// `lcp_exact` on the metadata grid; equal to it in exact mode.
    pub lcp_stored: LcpValue,
}

impl BookendState {
    /// Both bookends are at infinity and share nothing with `x`.
    pub fn start(codec: &MetadataCodec) -> Self {
        Self {
            side: Side::Succ,
            lcp_exact: 0,
            lcp_stored: codec.zero(),
        }
    }

    pub fn with(side: Side, lcp_exact: usize, codec: &MetadataCodec) -> Self {
        Self {
            side,
            lcp_exact,
            lcp_stored: codec.quantize(lcp_exact),
        }
    }
}

/// Result of comparing `x` against a node key `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompareOutcome {
    /// `x` versus `v`.
    pub ordering: Ordering,
    /// LCP of `x` and `v` in the trie's metadata representation.
    pub lcp: LcpValue,
    /// The exact LCP when it is known (always in exact mode).
    pub lcp_exact: Option<usize>,
    /// Characters compared, including the deciding one.
    pub chars_examined: usize,
}

/// Computes the LCP of two keys that agree on `start` characters.
pub trait LcpOracle {
    fn lcp(&mut self, x: &PackedKey, v: &PackedKey, start: usize, ledger: &mut CostLedger) -> usize;
}

/// Word-at-a-time XOR/MSB scan.
#[derive(Debug, Default, Clone, Copy)]
pub struct SequentialLcp;

impl LcpOracle for SequentialLcp {
    #[inline]
    fn lcp(&mut self, x: &PackedKey, v: &PackedKey, start: usize, ledger: &mut CostLedger) -> usize {
        lcp_from(x, v, start, ledger)
    }
}

/// Compares `x` with `v` given `v`'s stored LCP with the bookend on
/// `state.side`.
///
/// The case split compares `state.lcp_stored` with `v_lcp`; in approximate
/// mode both live on the same grid, and an equal grid value `d` means both
/// keys agree with the bookend, hence with each other, on `decode(d)`
/// characters, which is where the scan resumes.
pub fn k_compare<O: LcpOracle>(
    x: &PackedKey,
    v: &PackedKey,
    v_lcp: LcpValue,
    state: &BookendState,
    codec: &MetadataCodec,
    oracle: &mut O,
    ledger: &mut CostLedger,
) -> CompareOutcome {
    ledger.comparisons += 1;
    let (toward, away) = match state.side {
        // x precedes its successor bookend; so does v
        Side::Succ => (Ordering::Greater, Ordering::Less),
        Side::Pred => (Ordering::Less, Ordering::Greater),
    };
    let ours = state.lcp_stored.decode();
    let theirs = v_lcp.decode();
    match ours.cmp(&theirs) {
        // v leaves the bookend before x does
        Ordering::Greater => CompareOutcome {
            ordering: toward,
            lcp: v_lcp,
            lcp_exact: v_lcp.is_exact().then_some(theirs),
            chars_examined: 0,
        },
        Ordering::Less => CompareOutcome {
            ordering: away,
            lcp: state.lcp_stored,
            lcp_exact: Some(state.lcp_exact),
            chars_examined: 0,
        },
        Ordering::Equal => {
            let start = ours;
            let l = oracle.lcp(x, v, start, ledger);
            let ordering = compare_at(x, v, l);
            CompareOutcome {
                ordering,
                lcp: codec.quantize(l),
                lcp_exact: Some(l),
                chars_examined: l - start + 1,
            }
        }
    }
}

/// Makes the node just compared the new bookend when it shares at least as
/// long a prefix with `x` as the current one.
pub fn advance_state(state: &BookendState, outcome: &CompareOutcome) -> BookendState {
    let l = outcome.lcp_exact.unwrap_or_else(|| outcome.lcp.decode());
    if l < state.lcp_exact {
        return *state;
    }
    BookendState {
        side: if outcome.ordering == Ordering::Greater {
            Side::Pred
        } else {
            Side::Succ
        },
        lcp_exact: l,
        lcp_stored: outcome.lcp,
    }
}
