//! Reference implementations used to check the tries.
//!
//! Nothing here uses packed words or stored LCPs: keys are plain code
//! vectors compared one character at a time.

use std::collections::HashMap;

use thiserror::Error;

use crate::lcp_codec::{LcpValue, MetadataCodec};
use crate::zip_trie::{NodeId, ZipTrie};

/// Characters shared by `a` and `b` before they differ.
pub fn naive_lcp(a: &[u8], b: &[u8]) -> usize {
    let mut i = 0;
    while i < a.len() && i < b.len() && a[i] == b[i] {
        i += 1;
    }
    i
}

/// Sorted-vector dictionary.
#[derive(Debug, Clone, Default)]
pub struct OracleDict {
    keys: Vec<Vec<u8>>,
}

impl OracleDict {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys<I: IntoIterator<Item = Vec<u8>>>(keys: I) -> Self {
        let mut keys: Vec<Vec<u8>> = keys.into_iter().collect();
        keys.sort();
        keys.dedup();
        Self { keys }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[Vec<u8>] {
        &self.keys
    }

    pub fn insert(&mut self, key: &[u8]) -> bool {
        match self.keys.binary_search_by(|k| k.as_slice().cmp(key)) {
            Ok(_) => false,
            Err(i) => {
                self.keys.insert(i, key.to_vec());
                true
            }
        }
    }

    pub fn delete(&mut self, key: &[u8]) -> bool {
        match self.keys.binary_search_by(|k| k.as_slice().cmp(key)) {
            Ok(i) => {
                self.keys.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn contains(&self, key: &[u8]) -> bool {
        self.keys.binary_search_by(|k| k.as_slice().cmp(key)).is_ok()
    }

    /// Largest key strictly below `x`.
    pub fn pred(&self, x: &[u8]) -> Option<&[u8]> {
        let i = self.keys.partition_point(|k| k.as_slice() < x);
        i.checked_sub(1).map(|i| self.keys[i].as_slice())
    }

    /// Smallest key strictly above `x`.
    pub fn succ(&self, x: &[u8]) -> Option<&[u8]> {
        let i = self.keys.partition_point(|k| k.as_slice() <= x);
        self.keys.get(i).map(Vec::as_slice)
    }

    pub fn prefix(&self, p: &[u8]) -> Vec<&[u8]> {
        let i = self.keys.partition_point(|k| k.as_slice() < p);
        self.keys[i..]
            .iter()
            .take_while(|k| k.starts_with(p))
            .map(Vec::as_slice)
            .collect()
    }

    pub fn range(&self, lo: &[u8], hi: &[u8]) -> Vec<&[u8]> {
        self.keys
            .iter()
            .filter(|k| k.as_slice() >= lo && k.as_slice() <= hi)
            .map(Vec::as_slice)
            .collect()
    }

    /// Largest LCP of `x` with any stored key; attained at a neighbor.
    pub fn max_lcp(&self, x: &[u8]) -> usize {
        let i = self.keys.partition_point(|k| k.as_slice() < x);
        let below = i.checked_sub(1).map_or(0, |j| naive_lcp(x, &self.keys[j]));
        let above = self.keys.get(i).map_or(0, |k| naive_lcp(x, k));
        below.max(above)
    }
}

/// Predecessor and successor by one pass over unsorted keys.
pub fn linear_pred_succ<'a>(keys: &'a [Vec<u8>], x: &[u8]) -> (Option<&'a [u8]>, Option<&'a [u8]>) {
    let mut pred: Option<&[u8]> = None;
    let mut succ: Option<&[u8]> = None;
    for k in keys {
        let k = k.as_slice();
        if k < x && pred.is_none_or(|p| k > p) {
            pred = Some(k);
        }
        if k > x && succ.is_none_or(|s| k < s) {
            succ = Some(k);
        }
    }
    (pred, succ)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditReport {
    pub nodes: usize,
    /// Largest `true - decoded` gap seen.
    pub max_undershoot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {node}: {field} stores {stored:?}, expected {expected:?} (true LCP {true_lcp})")]
pub struct AuditError {
    pub node: NodeId,
    pub field: &'static str,
    pub stored: LcpValue,
    pub expected: LcpValue,
    pub true_lcp: usize,
}

/// Recomputes every node's bookend LCPs from its ancestors and compares
/// them with the stored values.
///
/// Exact tries must match exactly. Approximate tries must hold the grid
/// value of the true LCP, which in particular undershoots by at most
/// `lcp / f`.
pub fn ancestor_audit(trie: &ZipTrie) -> Result<AuditReport, AuditError> {
    let codec = trie.config().codec;
    let views = trie.bookend_snapshot();
    let text: HashMap<NodeId, Vec<u8>> = views.keys().map(|&id| (id, trie.node(id).key().unpack())).collect();
    let mut max_undershoot = 0;
    for (&id, view) in &views {
        let own = &text[&id];
        for (field, stored, anc) in [
            ("lcp_pred", view.lcp_pred, view.pred_ancestor),
            ("lcp_succ", view.lcp_succ, view.succ_ancestor),
        ] {
            let true_lcp = anc.map_or(0, |a| naive_lcp(own, &text[&a]));
            let expected = codec.quantize(true_lcp);
            let decoded = stored.decode();
            let bad = stored != expected
                || decoded > true_lcp
                || match codec {
                    MetadataCodec::Exact => false,
                    MetadataCodec::Approx(cfg) => (true_lcp - decoded) * cfg.f() > true_lcp,
                };
            if bad {
                return Err(AuditError {
                    node: id,
                    field,
                    stored,
                    expected,
                    true_lcp,
                });
            }
            max_undershoot = max_undershoot.max(true_lcp - decoded);
        }
    }
    Ok(AuditReport {
        nodes: views.len(),
        max_undershoot,
    })
}
