//! String dictionaries built on bookend (LCP-reusing) comparisons.
//!
//! * [`zip_trie`]: a zip-zip tree over packed strings that stores, per node,
//!   the LCP with its nearest predecessor and successor ancestors, exactly or
//!   on a compact `2^a * b` grid ([`lcp_codec`]).
//! * [`parallel_lcp`]: chunked parallel LCP schedules and block/word MSW
//!   primitives, instrumented with a work/span/I-O [`CostLedger`].
//! * [`string_btree`]: a static string B-tree whose branching step runs the
//!   range-tree elimination algorithm.
//! * [`oracle`]: a brute-force dictionary and metadata auditor used as ground
//!   truth in tests.

pub mod bookend;
pub mod lcp_codec;
pub mod ledger;
pub mod oracle;
pub mod packed_key;
pub mod parallel_lcp;
pub mod string_btree;
pub mod zip_trie;

pub use bookend::{advance_state, k_compare, BookendState, CompareOutcome, Side};
pub use lcp_codec::{CodecConfig, LcpValue, MetadataCodec};
pub use ledger::CostLedger;
pub use packed_key::{Alphabet, PackedKey, TextEncoding};
pub use parallel_lcp::{ChunkPolicy, ChunkSchedule};
pub use string_btree::StringBTree;
pub use zip_trie::{Rank, TrieConfig, ZipTrie};
