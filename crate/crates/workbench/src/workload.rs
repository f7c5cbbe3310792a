//! Workload execution and per-operation CSV rows.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use ziptrie::lcp_codec::{CodecConfig, MetadataCodec};
use ziptrie::oracle::OracleDict;
use ziptrie::string_btree::{BuildError, StringBTree};
use ziptrie::{Alphabet, ChunkPolicy, CostLedger, PackedKey, TrieConfig, ZipTrie};

use crate::corpus::Corpus;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("unknown structure `{0}` (expected zt, mi-zt, zt-fixed, zt-adaptive or sbt)")]
    UnknownStructure(String),
    #[error("invalid op mix: {0}")]
    BadMix(String),
    #[error("the string B-tree is static; {0} is not supported")]
    Unsupported(Op),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Search,
    Insert,
    Delete,
    Prefix,
    Range,
}

impl Op {
    pub const ALL: [Op; 5] = [Op::Search, Op::Insert, Op::Delete, Op::Prefix, Op::Range];

    pub fn name(self) -> &'static str {
        match self {
            Op::Search => "search",
            Op::Insert => "insert",
            Op::Delete => "delete",
            Op::Prefix => "prefix",
            Op::Range => "range",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    ZipTrie,
    BTree,
}

/// Which structure to run and how it is parameterized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureConfig {
    pub kind: StructureKind,
    pub exact: bool,
    pub policy: ChunkPolicy,
    /// Codec and fixed-chunk budget; `None` picks the structure default.
    pub f: Option<usize>,
    pub block: usize,
    pub fanout: Option<usize>,
    pub seed: u64,
}

impl StructureConfig {
    pub fn preset(name: &str) -> Result<Self, WorkloadError> {
        let base = Self {
            kind: StructureKind::ZipTrie,
            exact: false,
            policy: ChunkPolicy::None,
            f: None,
            block: 16,
            fanout: None,
            seed: 0,
        };
        Ok(match name.to_ascii_lowercase().as_str() {
            "zt" => base,
            "mi-zt" => Self { exact: true, ..base },
            "zt-fixed" => Self {
                policy: ChunkPolicy::Fixed,
                ..base
            },
            "zt-adaptive" => Self {
                policy: ChunkPolicy::Adaptive,
                ..base
            },
            "sbt" => Self {
                kind: StructureKind::BTree,
                exact: true,
                ..base
            },
            other => return Err(WorkloadError::UnknownStructure(other.to_string())),
        })
    }

    /// Name used in the `structure` CSV column.
    pub fn label(&self) -> String {
        let base = match (self.kind, self.exact) {
            (StructureKind::BTree, _) => "sbt",
            (StructureKind::ZipTrie, true) => "mi-zt",
            (StructureKind::ZipTrie, false) => "zt",
        };
        match self.policy {
            ChunkPolicy::None => base.to_string(),
            ChunkPolicy::Fixed => format!("{base}-fixed"),
            ChunkPolicy::Adaptive => format!("{base}-adaptive"),
        }
    }

    pub fn trie_config(&self) -> TrieConfig {
        let mut cfg = if self.exact {
            TrieConfig::exact()
        } else {
            TrieConfig::approx()
        };
        if let Some(f) = self.f {
            if !self.exact {
                cfg.codec = MetadataCodec::Approx(CodecConfig::new(f.max(1), CodecConfig::DEFAULT_MAX_LEN).unwrap());
            }
            cfg.chunk_f = Some(f.max(1));
        }
        cfg.with_policy(self.policy).with_seed(self.seed)
    }
}

/// Result of a search, normalized across structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchAnswer {
    pub found: bool,
    pub pred: Option<PackedKey>,
    pub succ: Option<PackedKey>,
    pub nodes_visited: usize,
}

pub enum Structure {
    Zip(Box<ZipTrie>),
    BTree(StringBTree),
}

impl Structure {
    /// Builds over sorted distinct `keys`.
    pub fn build(cfg: &StructureConfig, keys: &[PackedKey]) -> Result<Self, WorkloadError> {
        Ok(match cfg.kind {
            StructureKind::ZipTrie => {
                let mut t = ZipTrie::new(cfg.trie_config());
                for k in keys {
                    t.insert(k.clone());
                }
                Structure::Zip(Box::new(t))
            }
            StructureKind::BTree => {
                let fanout = cfg.fanout.unwrap_or(StringBTree::default_fanout(cfg.block));
                Structure::BTree(StringBTree::build(keys.to_vec(), cfg.block, fanout)?.with_policy(cfg.policy))
            }
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Structure::Zip(t) => t.len(),
            Structure::BTree(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn search(&self, x: &PackedKey, ledger: &mut CostLedger) -> SearchAnswer {
        match self {
            Structure::Zip(t) => {
                let r = t.search(x, ledger);
                SearchAnswer {
                    found: r.found,
                    pred: r.pred.cloned(),
                    succ: r.succ.cloned(),
                    nodes_visited: r.nodes_visited,
                }
            }
            Structure::BTree(t) => {
                let r = t.search(x, ledger);
                SearchAnswer {
                    found: r.found,
                    pred: r.pred.cloned(),
                    succ: r.succ.cloned(),
                    nodes_visited: r.nodes_visited,
                }
            }
        }
    }

    pub fn insert(&mut self, x: PackedKey, ledger: &mut CostLedger) -> Result<bool, WorkloadError> {
        match self {
            Structure::Zip(t) => Ok(t.insert_with(x, None, ledger).applied),
            Structure::BTree(_) => Err(WorkloadError::Unsupported(Op::Insert)),
        }
    }

    pub fn delete(&mut self, x: &PackedKey, ledger: &mut CostLedger) -> Result<bool, WorkloadError> {
        match self {
            Structure::Zip(t) => Ok(t.delete_with(x, ledger).applied),
            Structure::BTree(_) => Err(WorkloadError::Unsupported(Op::Delete)),
        }
    }

    pub fn prefix(&self, p: &PackedKey, ledger: &mut CostLedger) -> Vec<PackedKey> {
        match self {
            Structure::Zip(t) => t.prefix_search(p, ledger).into_iter().cloned().collect(),
            Structure::BTree(t) => t.prefix_search(p, ledger).to_vec(),
        }
    }

    pub fn range(&self, lo: &PackedKey, hi: &PackedKey, ledger: &mut CostLedger) -> Vec<PackedKey> {
        match self {
            Structure::Zip(t) => t.range_query(lo, hi, ledger).into_iter().cloned().collect(),
            Structure::BTree(t) => t.range_query(lo, hi, ledger).to_vec(),
        }
    }
}

/// Operation proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpMix {
    weights: [f64; 5],
}

impl OpMix {
    pub fn new(search: f64, insert: f64, delete: f64, prefix: f64, range: f64) -> Result<Self, WorkloadError> {
        let weights = [search, insert, delete, prefix, range];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(WorkloadError::BadMix("proportions must be non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(WorkloadError::BadMix(format!("proportions sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn searches() -> Self {
        Self {
            weights: [1.0, 0.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn weight(&self, op: Op) -> f64 {
        self.weights[op as usize]
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Op {
        let mut u: f64 = rng.gen();
        for op in Op::ALL {
            u -= self.weight(op);
            if u < 0.0 {
                return op;
            }
        }
        Op::ALL
            .into_iter()
            .rev()
            .find(|&op| self.weight(op) > 0.0)
            .unwrap_or(Op::Search)
    }
}

impl FromStr for OpMix {
    type Err = WorkloadError;

    /// `search=0.6,insert=0.2,delete=0.2`; unnamed ops get 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut w = [0.0; 5];
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| WorkloadError::BadMix(format!("expected op=weight, got `{part}`")))?;
            let op = Op::ALL
                .into_iter()
                .find(|op| op.name() == name.trim())
                .ok_or_else(|| WorkloadError::BadMix(format!("unknown op `{name}`")))?;
            w[op as usize] = value
                .trim()
                .parse()
                .map_err(|_| WorkloadError::BadMix(format!("bad weight `{value}`")))?;
        }
        Self::new(w[0], w[1], w[2], w[3], w[4])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub mix: OpMix,
    pub ops: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub oracle_check: bool,
}

impl WorkloadSpec {
    pub fn new(mix: OpMix, ops: usize, seed: u64) -> Self {
        Self {
            mix,
            ops,
            seed,
            repetitions: 1,
            oracle_check: false,
        }
    }
}

/// One executed operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub structure: String,
    pub op: Op,
    /// Longest LCP of the operand with the stored keys before the operation.
    pub lcp: usize,
    /// Stored keys before the operation.
    pub n: usize,
    pub wall_ns: u64,
    pub ledger: CostLedger,
    pub nodes_visited: usize,
}

pub const CSV_HEADER: [&str; 11] = [
    "structure",
    "op",
    "lcp",
    "n",
    "wall_ns",
    "words_examined",
    "comparisons",
    "span_units",
    "work_units",
    "io_work",
    "io_span",
];

impl Row {
    pub fn record(&self) -> [String; 11] {
        let l = &self.ledger;
        [
            self.structure.clone(),
            self.op.to_string(),
            self.lcp.to_string(),
            self.n.to_string(),
            self.wall_ns.to_string(),
            l.words_examined.to_string(),
            l.comparisons.to_string(),
            l.span_units.to_string(),
            l.work_units.to_string(),
            l.io_work.to_string(),
            l.io_span.to_string(),
        ]
    }
}

pub fn write_csv<W: io::Write>(rows: &[Row], out: W) -> Result<(), WorkloadError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<Row>,
    pub divergences: usize,
}

/// Per-(structure, op, LCP bucket) means; bucket `b` holds `2^(b-1) <= l < 2^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub structure: String,
    pub op: Op,
    pub lcp_bucket: u32,
    pub count: usize,
    pub mean_n: f64,
    pub mean_words: f64,
    pub mean_comparisons: f64,
    pub mean_io_work: f64,
}

pub fn lcp_bucket(l: usize) -> u32 {
    usize::BITS - l.leading_zeros()
}

pub fn aggregate(rows: &[Row]) -> Vec<Summary> {
    let mut groups: BTreeMap<(String, Op, u32), Vec<&Row>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.structure.clone(), r.op, lcp_bucket(r.lcp)))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((structure, op, lcp_bucket), rs)| {
            let mean = |f: &dyn Fn(&Row) -> u64| rs.iter().map(|r| f(r) as f64).sum::<f64>() / rs.len() as f64;
            Summary {
                structure,
                op,
                lcp_bucket,
                count: rs.len(),
                mean_n: mean(&|r| r.n as u64),
                mean_words: mean(&|r| r.ledger.words_examined),
                mean_comparisons: mean(&|r| r.ledger.comparisons),
                mean_io_work: mean(&|r| r.ledger.io_work),
            }
        })
        .collect()
}

/// Operand generator: mutations of stored keys so LCPs are non-trivial.
struct Operands {
    pool: Vec<Vec<u8>>,
    alphabet: Alphabet,
}

impl Operands {
    fn symbol(&self, rng: &mut ChaCha8Rng) -> u8 {
        if let Some(k) = self.pool.get(rng.gen_range(0..self.pool.len().max(1))) {
            if !k.is_empty() {
                return k[rng.gen_range(0..k.len())];
            }
        }
        rng.gen_range(0..=self.alphabet.max_code())
    }

    fn base(&self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        if self.pool.is_empty() {
            Vec::new()
        } else {
            self.pool[rng.gen_range(0..self.pool.len())].clone()
        }
    }

    fn mutated(&self, rng: &mut ChaCha8Rng) -> PackedKey {
        let mut codes = self.base(rng);
        codes.truncate(rng.gen_range(0..=codes.len()));
        for _ in 0..rng.gen_range(1..5) {
            codes.push(self.symbol(rng));
        }
        self.pack(&codes)
    }

    fn prefix(&self, rng: &mut ChaCha8Rng) -> PackedKey {
        let mut codes = self.base(rng);
        codes.truncate(rng.gen_range(0..=codes.len().min(64)));
        self.pack(&codes)
    }

    fn pack(&self, codes: &[u8]) -> PackedKey {
        PackedKey::pack(codes, self.alphabet).expect("operand codes come from the corpus alphabet")
    }
}

fn codes(keys: &[PackedKey]) -> Vec<Vec<u8>> {
    keys.iter().map(PackedKey::unpack).collect()
}

fn answer_matches(oracle: &OracleDict, x: &[u8], got: &SearchAnswer) -> bool {
    got.found == oracle.contains(x)
        && got.pred.as_ref().map(PackedKey::unpack).as_deref() == oracle.pred(x)
        && got.succ.as_ref().map(PackedKey::unpack).as_deref() == oracle.succ(x)
}

/// Runs `spec` on a fresh instance per repetition, recording one row per
/// operation. The oracle tracks the key set throughout; with
/// `oracle_check` every answer is also compared against it.
pub fn run(corpus: &Corpus, cfg: &StructureConfig, spec: &WorkloadSpec) -> Result<RunReport, WorkloadError> {
    if cfg.kind == StructureKind::BTree {
        for op in [Op::Insert, Op::Delete] {
            if spec.mix.weight(op) > 0.0 {
                return Err(WorkloadError::Unsupported(op));
            }
        }
    }
    let label = cfg.label();
    let keys = corpus.distinct_keys();
    let mut report = RunReport::default();
    for rep in 0..spec.repetitions.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(rep as u64));
        let mut structure = Structure::build(cfg, &keys)?;
        let mut oracle = OracleDict::from_keys(codes(&keys));
        let operands = Operands {
            pool: codes(&keys),
            alphabet: corpus.alphabet,
        };
        for _ in 0..spec.ops {
            let op = spec.mix.sample(&mut rng);
            let n = oracle.len();
            let mut ledger = CostLedger::default();
            let (lcp, elapsed, ok, visited) = match op {
                Op::Search => {
                    let x = operands.mutated(&mut rng);
                    let xc = x.unpack();
                    let t = Instant::now();
                    let got = structure.search(&x, &mut ledger);
                    let e = t.elapsed();
                    (
                        oracle.max_lcp(&xc),
                        e,
                        answer_matches(&oracle, &xc, &got),
                        got.nodes_visited,
                    )
                }
                Op::Insert => {
                    let x = operands.mutated(&mut rng);
                    let xc = x.unpack();
                    let lcp = oracle.max_lcp(&xc);
                    let t = Instant::now();
                    let got = structure.insert(x, &mut ledger)?;
                    let e = t.elapsed();
                    (lcp, e, got == oracle.insert(&xc), 0)
                }
                Op::Delete => {
                    let x = if !oracle.is_empty() && rng.gen_bool(0.8) {
                        operands.pack(&oracle.keys()[rng.gen_range(0..oracle.len())])
                    } else {
                        operands.mutated(&mut rng)
                    };
                    let xc = x.unpack();
                    let lcp = oracle.max_lcp(&xc);
                    let t = Instant::now();
                    let got = structure.delete(&x, &mut ledger)?;
                    let e = t.elapsed();
                    (lcp, e, got == oracle.delete(&xc), 0)
                }
                Op::Prefix => {
                    let p = operands.prefix(&mut rng);
                    let pc = p.unpack();
                    let t = Instant::now();
                    let got = structure.prefix(&p, &mut ledger);
                    let e = t.elapsed();
                    (oracle.max_lcp(&pc), e, codes(&got) == oracle.prefix(&pc), 0)
                }
                Op::Range => {
                    let a = operands.mutated(&mut rng);
                    let b = operands.mutated(&mut rng);
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    let (lc, hc) = (lo.unpack(), hi.unpack());
                    let t = Instant::now();
                    let got = structure.range(&lo, &hi, &mut ledger);
                    let e = t.elapsed();
                    (oracle.max_lcp(&lc), e, codes(&got) == oracle.range(&lc, &hc), 0)
                }
            };
            if spec.oracle_check && !ok {
                report.divergences += 1;
            }
            report.rows.push(Row {
                structure: label.clone(),
                op,
                lcp,
                n,
                wall_ns: elapsed.as_nanos() as u64,
                ledger,
                nodes_visited: visited,
            });
        }
    }
    Ok(report)
}

/// Searches for each of `queries` in a structure built over `corpus`.
pub fn run_queries(corpus: &Corpus, cfg: &StructureConfig, queries: &[PackedKey]) -> Result<RunReport, WorkloadError> {
    let keys = corpus.distinct_keys();
    let structure = Structure::build(cfg, &keys)?;
    let oracle = OracleDict::from_keys(codes(&keys));
    let label = cfg.label();
    let mut report = RunReport::default();
    for x in queries {
        let xc = x.unpack();
        let mut ledger = CostLedger::default();
        let t = Instant::now();
        let got = structure.search(x, &mut ledger);
        let elapsed = t.elapsed();
        if !answer_matches(&oracle, &xc, &got) {
            report.divergences += 1;
        }
        report.rows.push(Row {
            structure: label.clone(),
            op: Op::Search,
            lcp: oracle.max_lcp(&xc),
            n: oracle.len(),
            wall_ns: elapsed.as_nanos() as u64,
            ledger,
            nodes_visited: got.nodes_visited,
        });
    }
    Ok(report)
}
