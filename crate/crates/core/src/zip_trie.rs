//! Zip-tries: zip-zip trees over packed strings with bookend LCP metadata.
//!
//! Every node stores the LCP of its key with its immediate predecessor and
//! successor ancestors. Searches run [`k_compare`] at each node, so a whole
//! descent examines `O(l / alpha + depth)` words where `l` is the LCP of the
//! query with the stored keys.
//!
//! Insertion unzips the search path below the new node into `P` (keys
//! smaller than `x`) and `Q` (larger); deletion zips the two spines back.
//! Only nodes of `P`, `Q` and `x` itself ever change metadata:
//!
//! * insert: `P` nodes take `lcp_succ := lcp(v, x)` and `Q` nodes take
//!   `lcp_pred := lcp(v, x)`, both already produced by the descent;
//! * delete: a `P` node whose new successor ancestor is `q` takes
//!   `lcp_succ := min(lcp(v, x), lcp(x, q))`, symmetrically for `Q`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bookend::{advance_state, k_compare, BookendState, Side};
use crate::lcp_codec::{CodecConfig, LcpValue, MetadataCodec};
use crate::ledger::CostLedger;
use crate::packed_key::{Alphabet, KeyError, PackedKey};
use crate::parallel_lcp::{ChunkPolicy, ChunkSchedule, ChunkedLcp};

pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum TrieError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Key(#[from] KeyError),
}

/// Zip-zip rank: geometric `r1`, uniform tiebreak `r2`, ordered
/// lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank {
    pub r1: u8,
    pub r2: u32,
}

impl Rank {
    pub fn new(r1: u8, r2: u32) -> Self {
        Self { r1, r2 }
    }

    /// Draws `r1 ~ Geometric(1/2)` (starting at 0) and `r2 ~ U[0, r2_range)`.
    pub fn draw<R: RngCore>(rng: &mut R, r2_range: u64) -> Self {
        let r1 = rng.next_u64().trailing_zeros().min(u8::MAX as u32) as u8;
        let r2 = rng.gen_range(0..r2_range.clamp(1, 1 << 32)) as u32;
        Self { r1, r2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSource {
    /// Ranks come from one seeded stream in insertion order.
    Sequential,
    /// Each key's rank is a function of the key and the seed, so any
    /// sequence of updates reaching the same key set yields the same trie.
    KeyHashed,
}

/// Fixed parameters of a trie.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrieConfig {
    pub codec: MetadataCodec,
    pub policy: ChunkPolicy,
    /// Budget for the fixed chunk schedule; defaults to the codec's `f`.
    pub chunk_f: Option<usize>,
    pub seed: u64,
    pub r2_range: u64,
    pub rank_source: RankSource,
    /// Threads splitting each parallel oracle window.
    pub workers: usize,
}

impl TrieConfig {
    /// Exact LCP metadata (MI-ZT).
    pub fn exact() -> Self {
        Self {
            codec: MetadataCodec::Exact,
            ..Self::approx()
        }
    }

    /// Quantized LCP metadata (ZT) with `f = ceil(log2 2^32)`.
    pub fn approx() -> Self {
        Self {
            codec: MetadataCodec::Approx(CodecConfig::for_capacity(1 << 32)),
            policy: ChunkPolicy::None,
            chunk_f: None,
            seed: 0,
            r2_range: 1 << 32,
            rank_source: RankSource::Sequential,
            workers: 1,
        }
    }

    pub fn with_policy(mut self, policy: ChunkPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rank_source(mut self, source: RankSource) -> Self {
        self.rank_source = source;
        self
    }

    pub fn with_codec(mut self, codec: MetadataCodec) -> Self {
        self.codec = codec;
        self
    }

    /// `f` used by the fixed chunk schedule.
    pub fn schedule_f(&self) -> usize {
        self.chunk_f.unwrap_or(match self.codec {
            MetadataCodec::Approx(cfg) => cfg.f(),
            MetadataCodec::Exact => CodecConfig::for_capacity(1 << 32).f(),
        })
    }
}

impl Default for TrieConfig {
    fn default() -> Self {
        Self::approx()
    }
}

#[derive(Debug, Clone)]
pub struct ZipNode {
    key: PackedKey,
    rank: Rank,
    left: Option<NodeId>,
    right: Option<NodeId>,
    lcp_pred: LcpValue,
    lcp_succ: LcpValue,
}

impl ZipNode {
    pub fn key(&self) -> &PackedKey {
        &self.key
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn left(&self) -> Option<NodeId> {
        self.left
    }

    pub fn right(&self) -> Option<NodeId> {
        self.right
    }

    /// LCP with the immediate predecessor ancestor (0 when there is none).
    pub fn lcp_pred(&self) -> LcpValue {
        self.lcp_pred
    }

    /// LCP with the immediate successor ancestor (0 when there is none).
    pub fn lcp_succ(&self) -> LcpValue {
        self.lcp_succ
    }

    fn lcp_toward(&self, side: Side) -> LcpValue {
        match side {
            Side::Pred => self.lcp_pred,
            Side::Succ => self.lcp_succ,
        }
    }
}

/// One node visited by a descent.
#[derive(Debug, Clone, Copy)]
struct Step {
    id: NodeId,
    /// Query versus this node's key.
    ordering: Ordering,
    /// LCP of the query with this node's key, in metadata form.
    lcp: LcpValue,
}

struct Descent {
    path: Vec<Step>,
    found: bool,
    state: BookendState,
}

/// Answer of [`ZipTrie::search`].
#[derive(Debug, Clone)]
pub struct SearchResult<'a> {
    pub found: bool,
    pub state: BookendState,
    pub pred: Option<&'a PackedKey>,
    pub succ: Option<&'a PackedKey>,
    pub nodes_visited: usize,
}

/// Nodes touched by one update: the target and the unzipped/zipped
/// spines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateTrace {
    pub applied: bool,
    pub target: Option<NodeId>,
    /// Nodes with keys smaller than the target.
    pub lower: Vec<NodeId>,
    /// Nodes with keys larger than the target.
    pub upper: Vec<NodeId>,
}

/// A node as seen from its ancestors; used by stability checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BookendView {
    pub rank: Rank,
    pub lcp_pred: LcpValue,
    pub lcp_succ: LcpValue,
    pub pred_ancestor: Option<NodeId>,
    pub succ_ancestor: Option<NodeId>,
}

/// Preorder record of a node, for shape and metadata equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub key: PackedKey,
    pub rank: Rank,
    pub lcp_pred: LcpValue,
    pub lcp_succ: LcpValue,
    pub has_left: bool,
    pub has_right: bool,
}

#[derive(Debug, Clone)]
pub struct ZipTrie {
    nodes: Vec<Option<ZipNode>>,
    free: Vec<NodeId>,
    root: Option<NodeId>,
    len: usize,
    config: TrieConfig,
    rng: ChaCha8Rng,
}

impl ZipTrie {
    pub fn new(config: TrieConfig) -> Self {
        Self {
            nodes: Vec::new(),
            free: Vec::new(),
            root: None,
            len: 0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
        }
    }

    pub fn config(&self) -> &TrieConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ZipNode {
        self.nodes[id as usize].as_ref().expect("dangling node id")
    }

    fn node_mut(&mut self, id: NodeId) -> &mut ZipNode {
        self.nodes[id as usize].as_mut().expect("dangling node id")
    }

    fn alloc(&mut self, node: ZipNode) -> NodeId {
        match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = Some(node);
                id
            }
            None => {
                self.nodes.push(Some(node));
                (self.nodes.len() - 1) as NodeId
            }
        }
    }

    fn oracle_for(&self, x: &PackedKey) -> ChunkedLcp {
        let schedule = ChunkSchedule::new(
            self.config.policy,
            self.config.schedule_f(),
            x.len(),
            x.alphabet().alpha(),
        );
        ChunkedLcp::new(schedule).with_workers(self.config.workers)
    }

    /// Rank the next inserted `key` would receive.
    pub fn draw_rank(&mut self, key: &PackedKey) -> Rank {
        match self.config.rank_source {
            RankSource::Sequential => Rank::draw(&mut self.rng, self.config.r2_range),
            RankSource::KeyHashed => {
                let mut h = splitmix(self.config.seed ^ key.len() as u64);
                for &w in key.words() {
                    h = splitmix(h ^ w);
                }
                Rank::draw(&mut ChaCha8Rng::seed_from_u64(h), self.config.r2_range)
            }
        }
    }

    fn descend(&self, x: &PackedKey, ledger: &mut CostLedger) -> Descent {
        let codec = self.config.codec;
        let mut oracle = self.oracle_for(x);
        let mut state = BookendState::start(&codec);
        let mut path = Vec::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            let node = self.node(id);
            let out = k_compare(
                x,
                &node.key,
                node.lcp_toward(state.side),
                &state,
                &codec,
                &mut oracle,
                ledger,
            );
            path.push(Step {
                id,
                ordering: out.ordering,
                lcp: out.lcp,
            });
            state = advance_state(&state, &out);
            cur = match out.ordering {
                Ordering::Equal => {
                    return Descent {
                        path,
                        found: true,
                        state,
                    }
                }
                Ordering::Less => node.left,
                Ordering::Greater => node.right,
            };
        }
        Descent {
            path,
            found: false,
            state,
        }
    }

    fn extreme(&self, mut id: NodeId, rightmost: bool) -> NodeId {
        loop {
            let n = self.node(id);
            match if rightmost { n.right } else { n.left } {
                Some(c) => id = c,
                None => return id,
            }
        }
    }

    /// Membership plus predecessor and successor of `x`.
    pub fn search(&self, x: &PackedKey, ledger: &mut CostLedger) -> SearchResult<'_> {
        let d = self.descend(x, ledger);
        let last_with = |ord: Ordering| d.path.iter().rev().find(|s| s.ordering == ord).map(|s| s.id);
        let mut pred = last_with(Ordering::Greater);
        let mut succ = last_with(Ordering::Less);
        if d.found {
            let hit = self.node(d.path.last().unwrap().id);
            if let Some(l) = hit.left {
                pred = Some(self.extreme(l, true));
            }
            if let Some(r) = hit.right {
                succ = Some(self.extreme(r, false));
            }
        }
        SearchResult {
            found: d.found,
            state: d.state,
            pred: pred.map(|id| &self.node(id).key),
            succ: succ.map(|id| &self.node(id).key),
            nodes_visited: d.path.len(),
        }
    }

    pub fn contains(&self, x: &PackedKey) -> bool {
        self.search(x, &mut CostLedger::default()).found
    }

    pub fn insert(&mut self, key: PackedKey) -> bool {
        self.insert_with(key, None, &mut CostLedger::default()).applied
    }

    /// Inserts `key` with `rank`, or a freshly drawn rank when `None`.
    /// Duplicates are rejected.
    pub fn insert_with(&mut self, key: PackedKey, rank: Option<Rank>, ledger: &mut CostLedger) -> UpdateTrace {
        let d = self.descend(&key, ledger);
        if d.found {
            return UpdateTrace::default();
        }
        let rank = match rank {
            Some(r) => r,
            None => self.draw_rank(&key),
        };
        let path = d.path;
        // x goes above the first node it outranks; equal ranks favor the smaller key
        let idx = path
            .iter()
            .position(|s| {
                let r = self.node(s.id).rank;
                !(r > rank || (r == rank && s.ordering == Ordering::Greater))
            })
            .unwrap_or(path.len());

        let zero = self.config.codec.zero();
        let above = &path[..idx];
        let lcp_pred = above
            .iter()
            .rev()
            .find(|s| s.ordering == Ordering::Greater)
            .map_or(zero, |s| s.lcp);
        let lcp_succ = above
            .iter()
            .rev()
            .find(|s| s.ordering == Ordering::Less)
            .map_or(zero, |s| s.lcp);

        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for s in &path[idx..] {
            if s.ordering == Ordering::Greater {
                self.node_mut(s.id).lcp_succ = s.lcp;
                lower.push(s.id);
            } else {
                self.node_mut(s.id).lcp_pred = s.lcp;
                upper.push(s.id);
            }
        }
        for w in lower.windows(2) {
            self.node_mut(w[0]).right = Some(w[1]);
        }
        if let Some(&last) = lower.last() {
            self.node_mut(last).right = None;
        }
        for w in upper.windows(2) {
            self.node_mut(w[0]).left = Some(w[1]);
        }
        if let Some(&last) = upper.last() {
            self.node_mut(last).left = None;
        }

        let id = self.alloc(ZipNode {
            key,
            rank,
            left: lower.first().copied(),
            right: upper.first().copied(),
            lcp_pred,
            lcp_succ,
        });
        match idx.checked_sub(1).map(|i| path[i]) {
            None => self.root = Some(id),
            Some(parent) if parent.ordering == Ordering::Less => self.node_mut(parent.id).left = Some(id),
            Some(parent) => self.node_mut(parent.id).right = Some(id),
        }
        self.len += 1;
        UpdateTrace {
            applied: true,
            target: Some(id),
            lower,
            upper,
        }
    }

    pub fn delete(&mut self, key: &PackedKey) -> bool {
        self.delete_with(key, &mut CostLedger::default()).applied
    }

    pub fn delete_with(&mut self, key: &PackedKey, ledger: &mut CostLedger) -> UpdateTrace {
        let d = self.descend(key, ledger);
        if !d.found {
            return UpdateTrace::default();
        }
        let xid = d.path.last().unwrap().id;
        let parent = d.path.len().checked_sub(2).map(|i| d.path[i]);
        let (x_left, x_right, x_lcp_pred, x_lcp_succ) = {
            let x = self.node(xid);
            (x.left, x.right, x.lcp_pred, x.lcp_succ)
        };

        // right spine of the left child, left spine of the right child
        let mut lower = Vec::new();
        let mut cur = x_left;
        while let Some(id) = cur {
            lower.push(id);
            cur = self.node(id).right;
        }
        let mut upper = Vec::new();
        let mut cur = x_right;
        while let Some(id) = cur {
            upper.push(id);
            cur = self.node(id).left;
        }
        // lcp(v, x) for every spine node, before anything is overwritten
        let lower_lcp: Vec<LcpValue> = lower.iter().map(|&id| self.node(id).lcp_succ).collect();
        let upper_lcp: Vec<LcpValue> = upper.iter().map(|&id| self.node(id).lcp_pred).collect();

        #[derive(Clone, Copy)]
        enum Slot {
            Root,
            Left(NodeId),
            Right(NodeId),
        }
        let mut slot = match parent {
            None => Slot::Root,
            Some(p) if p.ordering == Ordering::Less => Slot::Left(p.id),
            Some(p) => Slot::Right(p.id),
        };
        let link = |trie: &mut Self, slot: Slot, child: Option<NodeId>| match slot {
            Slot::Root => trie.root = child,
            Slot::Left(id) => trie.node_mut(id).left = child,
            Slot::Right(id) => trie.node_mut(id).right = child,
        };

        let (mut i, mut j) = (0, 0);
        let mut last_lower: Option<usize> = None;
        let mut last_upper: Option<usize> = None;
        loop {
            let take_lower = match (lower.get(i), upper.get(j)) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(&p), Some(&q)) => self.node(p).rank >= self.node(q).rank,
            };
            if take_lower {
                let id = lower[i];
                let via = last_upper.map_or(x_lcp_succ, |k| upper_lcp[k]);
                self.node_mut(id).lcp_succ = lower_lcp[i].min(via);
                link(self, slot, Some(id));
                slot = Slot::Right(id);
                last_lower = Some(i);
                i += 1;
            } else {
                let id = upper[j];
                let via = last_lower.map_or(x_lcp_pred, |k| lower_lcp[k]);
                self.node_mut(id).lcp_pred = upper_lcp[j].min(via);
                link(self, slot, Some(id));
                slot = Slot::Left(id);
                last_upper = Some(j);
                j += 1;
            }
        }
        link(self, slot, None);

        self.nodes[xid as usize] = None;
        self.free.push(xid);
        self.len -= 1;
        UpdateTrace {
            applied: true,
            target: Some(xid),
            lower,
            upper,
        }
    }

    /// In-order stack positioned at the smallest key `>= lo`.
    fn lower_bound_stack(&self, lo: &PackedKey, ledger: &mut CostLedger) -> Vec<NodeId> {
        let codec = self.config.codec;
        let mut oracle = self.oracle_for(lo);
        let mut state = BookendState::start(&codec);
        let mut stack = Vec::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            let node = self.node(id);
            let out = k_compare(
                lo,
                &node.key,
                node.lcp_toward(state.side),
                &state,
                &codec,
                &mut oracle,
                ledger,
            );
            state = advance_state(&state, &out);
            match out.ordering {
                Ordering::Equal => {
                    stack.push(id);
                    break;
                }
                Ordering::Less => {
                    stack.push(id);
                    cur = node.left;
                }
                Ordering::Greater => cur = node.right,
            }
        }
        stack
    }

    fn walk_from<'a>(&'a self, stack: Vec<NodeId>) -> InOrder<'a> {
        InOrder { trie: self, stack }
    }

    /// All keys starting with `prefix`, in order.
    pub fn prefix_search(&self, prefix: &PackedKey, ledger: &mut CostLedger) -> Vec<&PackedKey> {
        let stack = self.lower_bound_stack(prefix, ledger);
        self.walk_from(stack).take_while(|k| k.starts_with(prefix)).collect()
    }

    /// All keys in `[lo, hi]`, in order; empty when `lo > hi`.
    pub fn range_query(&self, lo: &PackedKey, hi: &PackedKey, ledger: &mut CostLedger) -> Vec<&PackedKey> {
        if lo > hi {
            return Vec::new();
        }
        let stack = self.lower_bound_stack(lo, ledger);
        self.walk_from(stack).take_while(|k| *k <= hi).collect()
    }

    /// Keys in order.
    pub fn iter(&self) -> InOrder<'_> {
        let mut stack = Vec::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            stack.push(id);
            cur = self.node(id).left;
        }
        self.walk_from(stack)
    }

    /// Depth of every node, the root having depth 1.
    pub fn node_depths(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len);
        let mut stack: Vec<(NodeId, usize)> = self.root.map(|r| (r, 1)).into_iter().collect();
        while let Some((id, depth)) = stack.pop() {
            out.push(depth);
            let n = self.node(id);
            stack.extend(n.left.map(|c| (c, depth + 1)));
            stack.extend(n.right.map(|c| (c, depth + 1)));
        }
        out
    }

    pub fn mean_depth(&self) -> f64 {
        let d = self.node_depths();
        if d.is_empty() {
            0.0
        } else {
            d.iter().sum::<usize>() as f64 / d.len() as f64
        }
    }

    pub fn height(&self) -> usize {
        self.node_depths().into_iter().max().unwrap_or(0)
    }

    /// Preorder records: equal vectors mean identical shape, keys, ranks and
    /// metadata.
    pub fn canonical(&self) -> Vec<NodeRecord> {
        let mut out = Vec::with_capacity(self.len);
        let mut stack: Vec<NodeId> = self.root.into_iter().collect();
        while let Some(id) = stack.pop() {
            let n = self.node(id);
            out.push(NodeRecord {
                key: n.key.clone(),
                rank: n.rank,
                lcp_pred: n.lcp_pred,
                lcp_succ: n.lcp_succ,
                has_left: n.left.is_some(),
                has_right: n.right.is_some(),
            });
            stack.extend(n.right);
            stack.extend(n.left);
        }
        out
    }

    /// Every node's rank, metadata and immediate pred/succ ancestors.
    pub fn bookend_snapshot(&self) -> HashMap<NodeId, BookendView> {
        let mut out = HashMap::with_capacity(self.len);
        let mut stack: Vec<(NodeId, Option<NodeId>, Option<NodeId>)> =
            self.root.map(|r| (r, None, None)).into_iter().collect();
        while let Some((id, pred, succ)) = stack.pop() {
            let n = self.node(id);
            out.insert(
                id,
                BookendView {
                    rank: n.rank,
                    lcp_pred: n.lcp_pred,
                    lcp_succ: n.lcp_succ,
                    pred_ancestor: pred,
                    succ_ancestor: succ,
                },
            );
            stack.extend(n.left.map(|c| (c, pred, Some(id))));
            stack.extend(n.right.map(|c| (c, Some(id), succ)));
        }
        out
    }

    /// Checks BST order and rank heap order (ties: smaller key above).
    pub fn validate(&self) -> Result<(), String> {
        let mut count = 0;
        let mut stack: Vec<(NodeId, Option<NodeId>, Option<NodeId>)> =
            self.root.map(|r| (r, None, None)).into_iter().collect();
        while let Some((id, lo, hi)) = stack.pop() {
            count += 1;
            let n = self.node(id);
            if lo.is_some_and(|l| self.node(l).key >= n.key) || hi.is_some_and(|h| self.node(h).key <= n.key) {
                return Err(format!("search order violated at {:?}", n.key));
            }
            if let Some(c) = n.left {
                if self.node(c).rank >= n.rank {
                    return Err(format!("heap order violated at left child of {:?}", n.key));
                }
                stack.push((c, lo, Some(id)));
            }
            if let Some(c) = n.right {
                if self.node(c).rank > n.rank {
                    return Err(format!("heap order violated at right child of {:?}", n.key));
                }
                stack.push((c, Some(id), hi));
            }
        }
        if count != self.len {
            return Err(format!("reachable nodes {count} != len {}", self.len));
        }
        Ok(())
    }

    /// Overwrites a node's metadata. Exists so audits can be shown to catch
    /// corrupted tries.
    #[doc(hidden)]
    pub fn overwrite_metadata(&mut self, id: NodeId, lcp_pred: LcpValue, lcp_succ: LcpValue) {
        let n = self.node_mut(id);
        n.lcp_pred = lcp_pred;
        n.lcp_succ = lcp_succ;
    }

    /// `(r1, r2, key)` triples, one per line, in key order, after an
    /// `#alphabet <bits_per_char> <word_bits>` header. Keys are hex-encoded
    /// character codes.
    pub fn write_triples(&self) -> String {
        let mut out = String::new();
        let alphabet = self.iter().next().map_or(Alphabet::bytes(), |k| k.alphabet());
        writeln!(out, "#alphabet {} {}", alphabet.bits_per_char(), alphabet.word_bits()).unwrap();
        let mut stack = Vec::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            stack.push(id);
            cur = self.node(id).left;
        }
        while let Some(id) = stack.pop() {
            let n = self.node(id);
            writeln!(out, "{}\t{}\t{}", n.rank.r1, n.rank.r2, hex::encode(n.key.unpack())).unwrap();
            let mut cur = n.right;
            while let Some(c) = cur {
                stack.push(c);
                cur = self.node(c).left;
            }
        }
        out
    }

    /// Rebuilds a trie from [`ZipTrie::write_triples`] output.
    pub fn read_triples(config: TrieConfig, text: &str) -> Result<Self, TrieError> {
        let mut trie = Self::new(config);
        let mut alphabet = Alphabet::bytes();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| TrieError::Parse { line: line_no, message };
            if let Some(rest) = line.strip_prefix("#alphabet") {
                let nums: Vec<u32> = rest
                    .split_whitespace()
                    .map(|t| t.parse::<u32>().map_err(|e| err(e.to_string())))
                    .collect::<Result<_, _>>()?;
                let [bits, word] = nums[..] else {
                    return Err(err("expected `#alphabet <bits> <word_bits>`".into()));
                };
                alphabet = Alphabet::new(bits, word)?;
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [r1, r2, key] = fields[..] else {
                return Err(err(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            let r1 = r1.parse::<u8>().map_err(|e| err(format!("r1: {e}")))?;
            let r2 = r2.parse::<u32>().map_err(|e| err(format!("r2: {e}")))?;
            let codes = hex::decode(key).map_err(|e| err(format!("key: {e}")))?;
            let key = PackedKey::pack(&codes, alphabet)?;
            if !trie
                .insert_with(key, Some(Rank::new(r1, r2)), &mut CostLedger::default())
                .applied
            {
                return Err(err("duplicate key".into()));
            }
        }
        Ok(trie)
    }
}

/// In-order iterator over keys.
pub struct InOrder<'a> {
    trie: &'a ZipTrie,
    stack: Vec<NodeId>,
}

impl<'a> Iterator for InOrder<'a> {
    type Item = &'a PackedKey;

    fn next(&mut self) -> Option<Self::Item> {
        let id = self.stack.pop()?;
        let n = self.trie.node(id);
        let mut cur = n.right;
        while let Some(c) = cur {
            self.stack.push(c);
            cur = self.trie.node(c).left;
        }
        Some(&n.key)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
