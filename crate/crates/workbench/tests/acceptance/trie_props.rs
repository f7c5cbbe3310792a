//! Structural properties of zip-tries: depth, history independence and
//! stability of nodes off the update path.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ziptrie::zip_trie::Rank;
use ziptrie::{Alphabet, CostLedger, PackedKey, TrieConfig, ZipTrie};

use crate::Outcome;

fn random_key(rng: &mut ChaCha8Rng, ab: Alphabet, len: usize, sigma: u16) -> PackedKey {
    let codes: Vec<u8> = (0..len).map(|_| rng.gen_range(0..sigma) as u8).collect();
    PackedKey::pack(&codes, ab).unwrap()
}

pub fn depth() -> Outcome {
    let n = 1usize << 17;
    let log_n = 17.0;
    let ratios: Vec<f64> = (0..5u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
            let mut t = ZipTrie::new(TrieConfig::approx().with_seed(seed));
            let ab = Alphabet::bytes();
            while t.len() < n {
                t.insert(random_key(&mut rng, ab, 12, 256));
            }
            t.mean_depth() / log_n
        })
        .collect();
    let pass = ratios.iter().all(|r| (1.25..=1.53).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Outcome::new(
        pass,
        format!(
            "n = 2^17, mean depth / log2 n per seed: [{}], band [1.25, 1.53]",
            shown.join(", ")
        ),
    )
}

/// Keys with varied shared prefixes so metadata is non-trivial.
fn key_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<PackedKey> {
    let ab = Alphabet::new(2, 64).unwrap();
    let mut seen = HashSet::new();
    let mut pool: Vec<Vec<u8>> = Vec::new();
    let mut out = Vec::new();
    while out.len() < n {
        let mut c = if !pool.is_empty() && rng.gen_bool(0.7) {
            let b = &pool[rng.gen_range(0..pool.len())];
            b[..rng.gen_range(0..=b.len())].to_vec()
        } else {
            Vec::new()
        };
        for _ in 0..rng.gen_range(1..40) {
            c.push(rng.gen_range(0..4));
        }
        if seen.insert(c.clone()) {
            out.push(PackedKey::pack(&c, ab).unwrap());
            pool.push(c);
        }
    }
    out
}

fn build_plain(config: TrieConfig, items: &[(PackedKey, Rank)], order: &[usize]) -> ZipTrie {
    let mut t = ZipTrie::new(config);
    for &i in order {
        t.insert_with(items[i].0.clone(), Some(items[i].1), &mut CostLedger::default());
    }
    t
}

/// Same final set, reached through transient keys and delete/reinsert churn.
fn build_churned(
    config: TrieConfig,
    items: &[(PackedKey, Rank)],
    order: &[usize],
    junk: &[(PackedKey, Rank)],
    rng: &mut ChaCha8Rng,
) -> ZipTrie {
    let mut t = ZipTrie::new(config);
    let mut l = CostLedger::default();
    let mut live_junk: Vec<usize> = Vec::new();
    let mut next_junk = 0;
    let mut removed: Vec<usize> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        t.insert_with(items[i].0.clone(), Some(items[i].1), &mut l);
        if next_junk < junk.len() && rng.gen_bool(0.2) {
            t.insert_with(junk[next_junk].0.clone(), Some(junk[next_junk].1), &mut l);
            live_junk.push(next_junk);
            next_junk += 1;
        }
        if !live_junk.is_empty() && rng.gen_bool(0.1) {
            let j = live_junk.swap_remove(rng.gen_range(0..live_junk.len()));
            t.delete_with(&junk[j].0, &mut l);
        }
        if rng.gen_bool(0.1) {
            let victim = order[rng.gen_range(0..=pos)];
            if t.delete_with(&items[victim].0, &mut l).applied {
                removed.push(victim);
            }
        }
        if !removed.is_empty() && rng.gen_bool(0.15) {
            let back = removed.swap_remove(rng.gen_range(0..removed.len()));
            t.insert_with(items[back].0.clone(), Some(items[back].1), &mut l);
        }
    }
    for j in live_junk {
        t.delete_with(&junk[j].0, &mut l);
    }
    for back in removed {
        t.insert_with(items[back].0.clone(), Some(items[back].1), &mut l);
    }
    t
}

pub fn history_independence() -> Outcome {
    let trials = 100;
    let mismatches: Vec<usize> = (0..trials)
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + trial as u64);
            let keys = key_set(&mut rng, 1300);
            // narrow tiebreak ranges force equal ranks in half the trials
            let r2_range = if trial % 2 == 0 { 1 << 32 } else { 3 };
            let mut ranked: Vec<(PackedKey, Rank)> =
                keys.into_iter().map(|k| (k, Rank::draw(&mut rng, r2_range))).collect();
            let junk = ranked.split_off(1000);
            let config = if trial % 4 < 2 {
                TrieConfig::exact()
            } else {
                TrieConfig::approx()
            };
            let mut a_order: Vec<usize> = (0..ranked.len()).collect();
            a_order.shuffle(&mut rng);
            let mut b_order = a_order.clone();
            b_order.shuffle(&mut rng);
            let a = build_plain(config, &ranked, &a_order);
            let b = build_churned(config, &ranked, &b_order, &junk, &mut rng);
            (a.len() != 1000 || a.canonical() != b.canonical()).then_some(trial)
        })
        .collect();
    Outcome::new(
        mismatches.is_empty(),
        format!("{trials} trials of 1000 keys, structure or metadata mismatches: {mismatches:?}"),
    )
}

pub fn off_path_stability() -> Outcome {
    let results: Vec<(u64, u64, u64)> = [TrieConfig::exact(), TrieConfig::approx()]
        .into_par_iter()
        .enumerate()
        .map(|(i, config)| {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + i as u64);
            let mut t = ZipTrie::new(config.with_seed(i as u64));
            let keys = key_set(&mut rng, 6000);
            let (initial, spare) = keys.split_at(2000);
            for k in initial {
                t.insert(k.clone());
            }
            let mut live: Vec<PackedKey> = initial.to_vec();
            let mut spare: Vec<PackedKey> = spare.to_vec();
            let (mut updates, mut nodes_checked, mut violations) = (0, 0, 0);
            while updates < 5000 {
                let before = t.bookend_snapshot();
                let trace = if rng.gen_bool(0.5) && !spare.is_empty() {
                    let k = spare.swap_remove(rng.gen_range(0..spare.len()));
                    live.push(k.clone());
                    t.insert_with(k, None, &mut CostLedger::default())
                } else if !live.is_empty() {
                    let k = live.swap_remove(rng.gen_range(0..live.len()));
                    spare.push(k.clone());
                    t.delete_with(&k, &mut CostLedger::default())
                } else {
                    continue;
                };
                updates += 1;
                let after = t.bookend_snapshot();
                let touched: HashSet<_> = trace
                    .lower
                    .iter()
                    .chain(&trace.upper)
                    .chain(&trace.target)
                    .copied()
                    .collect();
                for (id, view) in &before {
                    if touched.contains(id) {
                        continue;
                    }
                    nodes_checked += 1;
                    if after.get(id) != Some(view) {
                        violations += 1;
                    }
                }
                if after.keys().any(|id| !touched.contains(id) && !before.contains_key(id)) {
                    violations += 1;
                }
            }
            (updates, nodes_checked, violations)
        })
        .collect();
    let updates: u64 = results.iter().map(|r| r.0).sum();
    let checked: u64 = results.iter().map(|r| r.1).sum();
    let violations: u64 = results.iter().map(|r| r.2).sum();
    Outcome::new(
        violations == 0,
        format!("{updates} updates, {checked} off-path node snapshots compared, {violations} changed"),
    )
}
