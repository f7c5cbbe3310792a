//! Codec sweep, word/block primitives, and B-tree branching checks.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ziptrie::bookend::SequentialLcp;
use ziptrie::lcp_codec::CodecConfig;
use ziptrie::oracle::naive_lcp;
use ziptrie::packed_key::{lcp_from, msw_linear};
use ziptrie::parallel_lcp::{msw_sqrt, pem_lcp};
use ziptrie::string_btree::{naive_union, range_tree_eliminate, StringBTree};
use ziptrie::{Alphabet, BookendState, CostLedger, MetadataCodec, PackedKey, Side};

use crate::Outcome;

/// Smallest `e` with `2^(2^e) >= l`, i.e. `ceil(log2 log2 l)` for `l >= 2`.
fn ceil_log_log(l: usize) -> u32 {
    let mut e = 0;
    while (1u128 << (1u32 << e)) < l as u128 {
        e += 1;
    }
    e
}

fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        (x - 1).ilog2() + 1
    }
}

pub fn codec_sweep() -> Outcome {
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for f in [4usize, 16, 64, 1024] {
        let cfg = CodecConfig::new(f, 1 << 20).unwrap();
        let width_cap = |l: usize| ceil_log_log(l.max(2)) + ceil_log2(2 * f);
        for l in 0..=1usize << 20 {
            checked += 1;
            let v = cfg.encode(l).unwrap();
            let d = v.decode();
            let gap_ok = if l < f { d == l } else { (l - d) * f <= l };
            let width = cfg.packed_width(v);
            if (d > l || !gap_ok || width > width_cap(l)) && failures.len() < 3 {
                failures.push(format!("f={f} l={l} decode={d} width={width} cap={}", width_cap(l)));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{checked} (l, f) pairs, violations: {}",
            if failures.is_empty() {
                "none".into()
            } else {
                failures.join("; ")
            }
        ),
    )
}

pub fn word_primitives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut msw_mismatch = 0;
    let mut bad_span = 0;
    let mut pem_mismatch = 0;
    let mut pem_io_over = 0;
    let mut worst_io = (0u64, 0u64);
    let trials = 10_000;
    for _ in 0..trials {
        let m = rng.gen_range(0..300);
        let lead = rng.gen_range(0..=m);
        let words: Vec<u64> = (0..m)
            .map(|i| {
                if i < lead || rng.gen_bool(0.3) {
                    0
                } else {
                    rng.gen::<u64>() >> rng.gen_range(0..64)
                }
            })
            .collect();
        let mut ledger = CostLedger::default();
        if msw_sqrt(&words, &mut ledger) != msw_linear(&words) {
            msw_mismatch += 1;
        }
        if ledger.span_units != 3 {
            bad_span += 1;
        }

        let bits = [1, 2, 4, 8][rng.gen_range(0..4)];
        let word_bits = [16, 32, 64][rng.gen_range(0..3)];
        let ab = Alphabet::new(bits, word_bits).unwrap();
        let sigma = 1u16 << bits;
        let shared: Vec<u8> = (0..rng.gen_range(0..2000))
            .map(|_| rng.gen_range(0..sigma) as u8)
            .collect();
        let mut a = shared.clone();
        let mut b = shared;
        for _ in 0..rng.gen_range(0..50) {
            a.push(rng.gen_range(0..sigma) as u8);
        }
        for _ in 0..rng.gen_range(0..50) {
            b.push(rng.gen_range(0..sigma) as u8);
        }
        let (ka, kb) = (PackedKey::pack(&a, ab).unwrap(), PackedKey::pack(&b, ab).unwrap());
        let l = naive_lcp(&a, &b);
        let start = rng.gen_range(0..=l);
        let block = rng.gen_range(1..32);
        let mut ledger = CostLedger::default();
        let got = pem_lcp(&ka, &kb, start, block, &mut ledger);
        if got != lcp_from(&ka, &kb, start, &mut CostLedger::default()) || got != l {
            pem_mismatch += 1;
        }
        let alpha = ab.alpha();
        let window = a.len().min(b.len()).div_ceil(alpha) - start / alpha;
        let cap = window.div_ceil(block) as u64 + 2;
        if ledger.io_work > cap {
            pem_io_over += 1;
        }
        if ledger.io_work * worst_io.1.max(1) > worst_io.0 * cap {
            worst_io = (ledger.io_work, cap);
        }
    }
    let pass = msw_mismatch == 0 && bad_span == 0 && pem_mismatch == 0 && pem_io_over == 0;
    Outcome::new(
        pass,
        format!(
            "{trials} inputs: msw mismatches {msw_mismatch}, span != 3 {bad_span}, pem mismatches {pem_mismatch}, \
             io over cap {pem_io_over} (tightest {}/{})",
            worst_io.0, worst_io.1
        ),
    )
}

/// Branch equivalence and work on real tree nodes, plus range-tree unions.
pub struct BranchReport {
    pub pairs: u64,
    pub mismatches: u64,
    pub work_violations: u64,
    pub worst_work_ratio: f64,
    pub families: u64,
    pub union_mismatches: u64,
}

pub fn branching() -> BranchReport {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut rep = BranchReport {
        pairs: 0,
        mismatches: 0,
        work_violations: 0,
        worst_work_ratio: 0.0,
        families: 0,
        union_mismatches: 0,
    };
    while rep.pairs < 100_000 {
        let bits = [2, 8][rng.gen_range(0..2)];
        let ab = Alphabet::new(bits, 64).unwrap();
        let sigma = if bits == 2 { 4 } else { 6 };
        let mut codes: Vec<Vec<u8>> = Vec::new();
        for _ in 0..rng.gen_range(1..400) {
            let mut k = if !codes.is_empty() && rng.gen_bool(0.6) {
                let base: &Vec<u8> = &codes[rng.gen_range(0..codes.len())];
                base[..rng.gen_range(0..=base.len())].to_vec()
            } else {
                Vec::new()
            };
            for _ in 0..rng.gen_range(0..8) {
                k.push(rng.gen_range(0..sigma));
            }
            codes.push(k);
        }
        codes.sort();
        codes.dedup();
        let keys: Vec<PackedKey> = codes.iter().map(|c| PackedKey::pack(c, ab).unwrap()).collect();
        let block = rng.gen_range(4..=64);
        let tree = StringBTree::build(keys, block, StringBTree::default_fanout(block)).unwrap();
        let cap = 4.0 * block as f64 * (block as f64).log2();
        for node in tree.nodes() {
            for _ in 0..20 {
                let base = &codes[rng.gen_range(0..codes.len())];
                let mut xc = base[..rng.gen_range(0..=base.len())].to_vec();
                for _ in 0..rng.gen_range(0..4) {
                    xc.push(rng.gen_range(0..sigma));
                }
                let x = PackedKey::pack(&xc, ab).unwrap();
                let ids = node.key_ids();
                let first = &tree.keys()[ids[0] as usize];
                let last = &tree.keys()[ids[ids.len() - 1] as usize];
                // bookends are k_0 and k_last whenever x lies strictly between them
                let state = (first < &x && &x < last).then(|| {
                    let lf = naive_lcp(&xc, &first.unpack());
                    let ll = naive_lcp(&xc, &last.unpack());
                    let (side, l) = if lf >= ll { (Side::Pred, lf) } else { (Side::Succ, ll) };
                    BookendState::with(side, l, &MetadataCodec::Exact)
                });
                let br = tree.branch(node, &x, state.as_ref(), &mut SequentialLcp, &mut CostLedger::default());
                rep.pairs += 1;
                if br.slot != tree.naive_branch(node, &x) {
                    rep.mismatches += 1;
                }
                if br.ordering == Ordering::Equal && tree.keys()[ids[br.w] as usize] != x {
                    rep.mismatches += 1;
                }
                let ratio = br.stats.work as f64 / cap;
                rep.worst_work_ratio = rep.worst_work_ratio.max(ratio);
                if ratio > 1.0 {
                    rep.work_violations += 1;
                }
            }
        }
    }
    for _ in 0..10_000 {
        let slots = rng.gen_range(1..=128);
        let ranges: Vec<(usize, usize)> = (0..rng.gen_range(0..12))
            .map(|_| {
                let s = rng.gen_range(0..slots);
                (s, rng.gen_range(s..=slots))
            })
            .collect();
        rep.families += 1;
        if range_tree_eliminate(&ranges, slots) != naive_union(&ranges, slots) {
            rep.union_mismatches += 1;
        }
    }
    rep
}
