use ziptrie::{CostLedger, PackedKey, TextEncoding, TrieConfig, ZipTrie};

fn main() {
    let key = |s: &str| PackedKey::from_text(s.as_bytes(), TextEncoding::Dna, 64).unwrap();
    let mut trie = ZipTrie::new(TrieConfig::approx().with_seed(7));
    for s in ["ACGTACGT", "ACGTTT", "GATTACA"] {
        trie.insert(key(s));
    }
    let mut ledger = CostLedger::default();
    let hit = trie.search(&key("ACGTA"), &mut ledger);
    assert!(!hit.found);
    assert_eq!(hit.succ, Some(&key("ACGTACGT")));
    println!("{} words examined", ledger.words_examined);
}
