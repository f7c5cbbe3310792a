//! Static string B-tree with range-tree branching.
//!
//! Every node holds a sorted run of keys `k_0 < ... < k_{n-1}` (all keys for a
//! leaf; the first and last key of each child for an internal node) with
//!
//! * `l_i = lcp(k_{i-1}, k_i)`,
//! * `c_i = k_i[l_i]`, the character where `k_i` leaves `k_{i-1}`,
//! * `n_i`, the first `j > i` with `l_j <= l_i` (or `n`).
//!
//! Branching finds the node key sharing the longest prefix with the query
//! using only these arrays, then does a single [`k_compare`] and one scan
//! of `l` to find the successor slot.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bookend::{k_compare, BookendState, LcpOracle, Side};
use crate::lcp_codec::{LcpValue, MetadataCodec};
use crate::ledger::CostLedger;
use crate::packed_key::PackedKey;
use crate::parallel_lcp::{ChunkPolicy, ChunkSchedule, ChunkedLcp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("keys not strictly increasing at index {0}")]
    Unsorted(usize),
    #[error("block capacity must be at least 4, got {0}")]
    BlockTooSmall(usize),
    #[error("fanout must be at least 2, got {0}")]
    FanoutTooSmall(usize),
}

/// Perfect binary tree of marks over `leaves` slots.
#[derive(Debug, Clone)]
pub struct RangeTree {
    leaves: usize,
    marks: Vec<bool>,
}

impl RangeTree {
    pub fn new(slots: usize) -> Self {
        let leaves = slots.max(1).next_power_of_two();
        Self {
            leaves,
            marks: vec![false; 2 * leaves],
        }
    }

    pub fn levels(&self) -> usize {
        self.leaves.trailing_zeros() as usize + 1
    }

    /// Marks the inclusive range `[s, e]`; returns the number of marks set.
    pub fn mark(&mut self, s: usize, e: usize) -> usize {
        let (mut l, mut r) = (s + self.leaves, e + self.leaves);
        self.marks[l] = true;
        self.marks[r] = true;
        let mut set = if l == r { 1 } else { 2 };
        while l / 2 != r / 2 {
            if l % 2 == 0 {
                self.marks[l + 1] = true;
                set += 1;
            }
            if r % 2 == 1 {
                self.marks[r - 1] = true;
                set += 1;
            }
            l /= 2;
            r /= 2;
        }
        set
    }

    /// Whether slot `i` or any of its ancestors is marked.
    pub fn covered(&self, i: usize) -> bool {
        let mut v = i + self.leaves;
        while v >= 1 {
            if self.marks[v] {
                return true;
            }
            v /= 2;
        }
        false
    }
}

/// Slots covered by the half-open `ranges`, computed with a [`RangeTree`].
pub fn range_tree_eliminate(ranges: &[(usize, usize)], slots: usize) -> Vec<bool> {
    let mut tree = RangeTree::new(slots);
    for &(s, e) in ranges {
        if s < e {
            tree.mark(s, e - 1);
        }
    }
    (0..slots).map(|i| tree.covered(i)).collect()
}

/// Slots covered by the half-open `ranges`, computed directly.
pub fn naive_union(ranges: &[(usize, usize)], slots: usize) -> Vec<bool> {
    let mut out = vec![false; slots];
    for &(s, e) in ranges {
        for slot in out.iter_mut().take(e.min(slots)).skip(s) {
            *slot = true;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    key: u32,
    child: u32,
    first: bool,
    last: bool,
}

#[derive(Debug, Clone)]
enum NodeKind {
    /// Keys `start..start + n` of the sorted store.
    Leaf {
        start: usize,
    },
    Internal {
        entries: Vec<Entry>,
    },
}

#[derive(Debug, Clone)]
pub struct SbtNode {
    keys: Vec<u32>,
    lcp: Vec<usize>,
    chars: Vec<Option<u8>>,
    next: Vec<usize>,
    kind: NodeKind,
}

impl SbtNode {
    fn new(keys: Vec<u32>, store: &[PackedKey], kind: NodeKind) -> Self {
        let n = keys.len();
        let k = |i: usize| &store[keys[i] as usize];
        let mut lcp = vec![0; n];
        let mut chars = vec![None; n];
        for i in 1..n {
            lcp[i] = crate::packed_key::lcp_scan(k(i - 1), k(i), 0).0;
            chars[i] = k(i).char_at(lcp[i]);
        }
        // n_i by a stack of indices with strictly increasing l
        let mut next = vec![n; n];
        let mut stack: Vec<usize> = Vec::new();
        for j in 0..n {
            while let Some(&i) = stack.last() {
                if lcp[j] <= lcp[i] {
                    next[i] = j;
                    stack.pop();
                } else {
                    break;
                }
            }
            stack.push(j);
        }
        Self {
            keys,
            lcp,
            chars,
            next,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    /// Indices into the tree's sorted key store.
    pub fn key_ids(&self) -> &[u32] {
        &self.keys
    }

    pub fn lcp_arr(&self) -> &[usize] {
        &self.lcp
    }

    /// `c_i`; `None` is the end-of-string sentinel.
    pub fn char_arr(&self) -> &[Option<u8>] {
        &self.chars
    }

    pub fn next_arr(&self) -> &[usize] {
        &self.next
    }

    /// `lcp(k_i, k_j)` as a range minimum of `l`; `None` when `i == j`.
    fn lcp_between(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (i.min(j), i.max(j));
        self.lcp[lo + 1..=hi].iter().copied().min()
    }
}

/// Work and span of one branching step, excluding the comparison with `k_w`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchStats {
    pub work: u64,
    pub span: u64,
}

/// Outcome of [`StringBTree::branch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    /// First slot whose key is `>= x`, or the node length.
    pub slot: usize,
    /// Slot sharing the longest prefix with `x`.
    pub w: usize,
    pub ordering: Ordering,
    pub lcp: usize,
    pub stats: BranchStats,
}

/// Answer of [`StringBTree::search`].
#[derive(Debug, Clone)]
pub struct SbtSearch<'a> {
    pub found: bool,
    /// Rank of the first key `>= x`.
    pub position: usize,
    pub pred: Option<&'a PackedKey>,
    pub succ: Option<&'a PackedKey>,
    pub nodes_visited: usize,
    /// Largest LCP of `x` with a key compared on the way down.
    pub lcp: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeStats {
    pub height: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub keys: usize,
    /// Mean node length over `block`.
    pub fill: f64,
}

impl TreeStats {
    pub const CSV_HEADER: &'static str = "height,nodes,leaves,keys,fill";

    pub fn csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{:.4}\n",
            Self::CSV_HEADER,
            self.height,
            self.nodes,
            self.leaves,
            self.keys,
            self.fill
        )
    }
}

#[derive(Debug, Clone)]
pub struct StringBTree {
    store: Vec<PackedKey>,
    nodes: Vec<SbtNode>,
    root: Option<usize>,
    height: usize,
    block: usize,
    fanout: usize,
    policy: ChunkPolicy,
    workers: usize,
}

impl StringBTree {
    /// Default fanout for block capacity `block`: two boundary keys per
    /// child keep internal nodes within one block.
    pub fn default_fanout(block: usize) -> usize {
        (block / 2).max(2)
    }

    /// Bulk-loads strictly increasing `keys`: leaves of `block` keys, then
    /// levels of `fanout` children until one node remains.
    pub fn build(keys: Vec<PackedKey>, block: usize, fanout: usize) -> Result<Self, BuildError> {
        if block < 4 {
            return Err(BuildError::BlockTooSmall(block));
        }
        if fanout < 2 {
            return Err(BuildError::FanoutTooSmall(fanout));
        }
        if let Some(i) = keys.windows(2).position(|w| w[0] >= w[1]) {
            return Err(BuildError::Unsorted(i + 1));
        }
        let mut tree = Self {
            store: keys,
            nodes: Vec::new(),
            root: None,
            height: 0,
            block,
            fanout,
            policy: ChunkPolicy::None,
            workers: 1,
        };
        if tree.store.is_empty() {
            return Ok(tree);
        }
        // (node index, first key, last key) per node of the current level
        let mut level: Vec<(u32, u32, u32)> = Vec::new();
        for start in (0..tree.store.len()).step_by(block) {
            let end = (start + block).min(tree.store.len());
            let ids = (start as u32..end as u32).collect();
            let node = SbtNode::new(ids, &tree.store, NodeKind::Leaf { start });
            tree.nodes.push(node);
            level.push(((tree.nodes.len() - 1) as u32, start as u32, (end - 1) as u32));
        }
        tree.height = 1;
        while level.len() > 1 {
            let mut up = Vec::new();
            for group in level.chunks(fanout) {
                let mut entries = Vec::new();
                for &(child, first, last) in group {
                    entries.push(Entry {
                        key: first,
                        child,
                        first: true,
                        last: first == last,
                    });
                    if first != last {
                        entries.push(Entry {
                            key: last,
                            child,
                            first: false,
                            last: true,
                        });
                    }
                }
                let ids = entries.iter().map(|e| e.key).collect();
                let node = SbtNode::new(ids, &tree.store, NodeKind::Internal { entries });
                tree.nodes.push(node);
                up.push(((tree.nodes.len() - 1) as u32, group[0].1, group[group.len() - 1].2));
            }
            level = up;
            tree.height += 1;
        }
        tree.root = Some(level[0].0 as usize);
        Ok(tree)
    }

    pub fn with_policy(mut self, policy: ChunkPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn keys(&self) -> &[PackedKey] {
        &self.store
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn root(&self) -> Option<&SbtNode> {
        self.root.map(|r| &self.nodes[r])
    }

    pub fn nodes(&self) -> &[SbtNode] {
        &self.nodes
    }

    pub fn stats(&self) -> TreeStats {
        let leaves = self.nodes.iter().filter(|n| n.is_leaf()).count();
        let filled: usize = self.nodes.iter().map(SbtNode::len).sum();
        TreeStats {
            height: self.height,
            nodes: self.nodes.len(),
            leaves,
            keys: self.store.len(),
            fill: if self.nodes.is_empty() {
                0.0
            } else {
                filled as f64 / (self.nodes.len() * self.block) as f64
            },
        }
    }

    fn key(&self, node: &SbtNode, i: usize) -> &PackedKey {
        &self.store[node.keys[i] as usize]
    }

    /// Comparison budget for the fixed chunk schedule: one comparison per level.
    fn schedule_f(&self) -> usize {
        self.height.max(1)
    }

    /// Successor slot of `x` in `node`.
    ///
    /// `state` is the bookend state on arrival, whose bookends must be
    /// `k_0` (`Side::Pred`) and `k_{n-1}` (`Side::Succ`); `None` means no
    /// bookend is known yet.
    pub fn branch<O: LcpOracle>(
        &self,
        node: &SbtNode,
        x: &PackedKey,
        state: Option<&BookendState>,
        oracle: &mut O,
        ledger: &mut CostLedger,
    ) -> Branch {
        let n = node.len();
        let mut stats = BranchStats::default();

        // step 1: candidates, elimination and the last survivor
        let mut candidate = vec![true; n];
        for (i, c) in candidate.iter_mut().enumerate().skip(1) {
            *c = node.chars[i] <= x.char_at(node.lcp[i]);
        }
        stats.work += n.saturating_sub(1) as u64;
        let mut ranges = RangeTree::new(n);
        let checks = ranges.levels() as u64;
        for u in (1..n).filter(|&u| !candidate[u]) {
            stats.work += ranges.mark(u, node.next[u] - 1) as u64;
        }
        let mut w = 0;
        for i in (0..n).filter(|&i| candidate[i]) {
            stats.work += checks;
            if !ranges.covered(i) {
                w = i;
            }
        }
        stats.work += n as u64;
        stats.span += 4;

        // step 2
        let codec = MetadataCodec::Exact;
        let (state, v_lcp) = match state {
            Some(s) => {
                let towards = match s.side {
                    Side::Pred => node.lcp_between(0, w),
                    Side::Succ => node.lcp_between(w, n - 1),
                };
                let len = self.key(node, w).len();
                (*s, LcpValue::Exact(towards.unwrap_or(len)))
            }
            None => (BookendState::start(&codec), codec.zero()),
        };
        let out = k_compare(x, self.key(node, w), v_lcp, &state, &codec, oracle, ledger);
        let l = out.lcp.decode();

        // step 3
        let slot = match out.ordering {
            Ordering::Equal => w,
            Ordering::Less => {
                let mut y = w;
                while y > 0 && node.lcp[y] >= l {
                    y -= 1;
                }
                y
            }
            Ordering::Greater => (w + 1..n).find(|&i| node.lcp[i] <= l).unwrap_or(n),
        };
        stats.work += n as u64;
        stats.span += 1;

        ledger.work_units += stats.work;
        ledger.span_units += stats.span;
        Branch {
            slot,
            w,
            ordering: out.ordering,
            lcp: l,
            stats,
        }
    }

    /// Successor slot by comparing `x` with each key in turn.
    pub fn naive_branch(&self, node: &SbtNode, x: &PackedKey) -> usize {
        let x = x.unpack();
        (0..node.len())
            .find(|&i| self.key(node, i).unpack() >= x)
            .unwrap_or(node.len())
    }

    fn oracle_for(&self, x: &PackedKey, policy: ChunkPolicy) -> ChunkedLcp {
        let schedule = ChunkSchedule::new(policy, self.schedule_f(), x.len(), x.alphabet().alpha());
        ChunkedLcp::new(schedule).with_workers(self.workers)
    }

    pub fn search(&self, x: &PackedKey, ledger: &mut CostLedger) -> SbtSearch<'_> {
        self.search_with(x, self.policy, ledger)
    }

    /// Root-to-leaf descent. Charges one block per node plus the blocks
    /// read by the comparison at that node.
    pub fn search_with(&self, x: &PackedKey, policy: ChunkPolicy, ledger: &mut CostLedger) -> SbtSearch<'_> {
        let mut oracle = self.oracle_for(x, policy);
        let mut state: Option<BookendState> = None;
        let mut cur = self.root;
        let mut visited = 0;
        let mut best = 0;
        let (found, position) = loop {
            let Some(id) = cur else {
                break (false, 0);
            };
            let node = &self.nodes[id];
            visited += 1;
            let before = ledger.words_examined;
            let br = self.branch(node, x, state.as_ref(), &mut oracle, ledger);
            let words = (ledger.words_examined - before) as usize;
            ledger.io_work += 1 + words.div_ceil(self.block) as u64;
            ledger.io_span += 1 + u64::from(words > 0);
            best = best.max(br.lcp);

            let hit = br.ordering == Ordering::Equal;
            match &node.kind {
                NodeKind::Leaf { start } => break (hit, start + br.slot),
                NodeKind::Internal { entries } => {
                    if br.slot == node.len() {
                        break (false, node.keys[node.len() - 1] as usize + 1);
                    }
                    let e = entries[br.slot];
                    if hit || e.first {
                        break (hit, e.key as usize);
                    }
                    // x lies strictly inside child e.child, between slots y-1 and y
                    let (y, l) = (br.slot, br.lcp);
                    let to_first = node.lcp_between(br.w, y - 1).map_or(l, |m| m.min(l));
                    let to_last = node.lcp_between(br.w, y).map_or(l, |m| m.min(l));
                    let codec = MetadataCodec::Exact;
                    state = Some(if to_first >= to_last {
                        BookendState::with(Side::Pred, to_first, &codec)
                    } else {
                        BookendState::with(Side::Succ, to_last, &codec)
                    });
                    cur = Some(e.child as usize);
                }
            }
        };
        SbtSearch {
            found,
            position,
            pred: position.checked_sub(1).map(|i| &self.store[i]),
            succ: self.store.get(position + usize::from(found)),
            nodes_visited: visited,
            lcp: best,
        }
    }

    /// Keys starting with `prefix`, in order.
    pub fn prefix_search(&self, prefix: &PackedKey, ledger: &mut CostLedger) -> &[PackedKey] {
        let start = self.search(prefix, ledger).position;
        let end = start + self.store[start..].iter().take_while(|k| k.starts_with(prefix)).count();
        self.charge_scan(end - start, ledger);
        &self.store[start..end]
    }

    /// Keys in `[lo, hi]`, in order; empty when `lo > hi`.
    pub fn range_query(&self, lo: &PackedKey, hi: &PackedKey, ledger: &mut CostLedger) -> &[PackedKey] {
        if lo > hi {
            return &[];
        }
        let start = self.search(lo, ledger).position;
        let hit = self.search(hi, ledger);
        let end = hit.position + usize::from(hit.found);
        self.charge_scan(end - start, ledger);
        &self.store[start..end]
    }

    fn charge_scan(&self, m: usize, ledger: &mut CostLedger) {
        ledger.io_work += m.div_ceil(self.block) as u64;
        ledger.io_span += 1;
    }

    /// Node arrays as text, one node per line, for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(
                out,
                "{i} leaf={} keys={:?} l={:?} n={:?}",
                n.is_leaf(),
                n.keys,
                n.lcp,
                n.next
            )
            .unwrap();
        }
        out
    }
}
