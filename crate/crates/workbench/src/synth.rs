//! Synthetic corpora with planted LCP lengths.
//!
//! Each bucket value `l` gets `pairs_per_bucket` pairs of keys sharing
//! exactly `l` characters; the remaining keys are uniform random filler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use ziptrie::{PackedKey, TextEncoding};

use crate::corpus::{Corpus, Record};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("{planted} planted keys do not fit in a corpus of {n}")]
    TooManyPlanted { planted: usize, n: usize },
    #[error("len_min {min} exceeds len_max {max}")]
    BadLengths { min: usize, max: usize },
    #[error("planting needs at least 3 symbols, alphabet has {0}")]
    AlphabetTooSmall(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSpec {
    pub n: usize,
    /// Filler key length range.
    pub len_min: usize,
    pub len_max: usize,
    /// LCP lengths to plant.
    pub buckets: Vec<usize>,
    pub pairs_per_bucket: usize,
    pub encoding: TextEncoding,
    pub word_bits: u32,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n: usize, encoding: TextEncoding, seed: u64) -> Self {
        Self {
            n,
            len_min: 8,
            len_max: 32,
            buckets: Vec::new(),
            pairs_per_bucket: 0,
            encoding,
            word_bits: 64,
            seed,
        }
    }

    /// Buckets `2^lo, 2^(lo+1), ..., 2^hi`.
    pub fn with_pow2_buckets(mut self, lo: u32, hi: u32, pairs: usize) -> Self {
        self.buckets = (lo..=hi).map(|e| 1usize << e).collect();
        self.pairs_per_bucket = pairs;
        self
    }
}

/// A planted pair: record indices `a < b` sharing exactly `lcp` characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Planted {
    pub lcp: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub corpus: Corpus,
    pub planted: Vec<Planted>,
    sigma: u8,
    base: u8,
}

impl Synthetic {
    /// A query diverging from pair `p` right after its shared prefix, so it
    /// shares exactly `p.lcp` characters with both keys of the pair.
    pub fn query(&self, p: &Planted, rng: &mut ChaCha8Rng) -> PackedKey {
        let a = self.corpus.records[p.a].key.unpack();
        let b = self.corpus.records[p.b].key.unpack();
        let mut codes = a[..p.lcp].to_vec();
        let taken = [a.get(p.lcp).copied(), b.get(p.lcp).copied()];
        let mut c = self.base + rng.gen_range(0..self.sigma);
        while taken.contains(&Some(c)) {
            c = self.base + rng.gen_range(0..self.sigma);
        }
        codes.push(c);
        let tail = rng.gen_range(0..8);
        codes.extend((0..tail).map(|_| self.base + rng.gen_range(0..self.sigma)));
        PackedKey::pack(&codes, self.corpus.alphabet).expect("codes within alphabet")
    }
}

fn symbols(encoding: TextEncoding) -> u8 {
    match encoding {
        TextEncoding::Dna => 4,
        // printable lowercase keeps the corpus readable when dumped
        TextEncoding::Bytes => 26,
    }
}

fn offset(encoding: TextEncoding) -> u8 {
    match encoding {
        TextEncoding::Dna => 0,
        TextEncoding::Bytes => b'a',
    }
}

pub fn synth(spec: &SynthSpec) -> Result<Synthetic, SynthError> {
    if spec.len_min > spec.len_max {
        return Err(SynthError::BadLengths {
            min: spec.len_min,
            max: spec.len_max,
        });
    }
    let planted_keys = 2 * spec.pairs_per_bucket * spec.buckets.len();
    if planted_keys > spec.n {
        return Err(SynthError::TooManyPlanted {
            planted: planted_keys,
            n: spec.n,
        });
    }
    let sigma = symbols(spec.encoding);
    if planted_keys > 0 && sigma < 3 {
        return Err(SynthError::AlphabetTooSmall(sigma as usize));
    }
    let base = offset(spec.encoding);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut corpus = Corpus::new(spec.encoding, spec.word_bits);
    let mut planted = Vec::with_capacity(planted_keys / 2);
    let random = |rng: &mut ChaCha8Rng, len: usize| -> Vec<u8> { (0..len).map(|_| rng.gen_range(0..sigma)).collect() };

    let push = |corpus: &mut Corpus, codes: &[u8]| {
        let shifted: Vec<u8> = codes.iter().map(|c| c + base).collect();
        let key = PackedKey::pack(&shifted, corpus.alphabet).expect("synthetic codes fit the alphabet");
        let id = format!("s{}", corpus.records.len());
        corpus.records.push(Record { id, key });
        corpus.records.len() - 1
    };

    for &l in &spec.buckets {
        for _ in 0..spec.pairs_per_bucket {
            let prefix = random(&mut rng, l);
            let ca = rng.gen_range(0..sigma);
            let mut cb = rng.gen_range(0..sigma);
            while cb == ca {
                cb = rng.gen_range(0..sigma);
            }
            let (ca, cb) = (ca.min(cb), ca.max(cb));
            let mut a = prefix.clone();
            a.push(ca);
            let extra = rng.gen_range(0..=spec.len_min);
            a.extend(random(&mut rng, extra));
            let mut b = prefix;
            b.push(cb);
            let extra = rng.gen_range(0..=spec.len_min);
            b.extend(random(&mut rng, extra));
            let ia = push(&mut corpus, &a);
            let ib = push(&mut corpus, &b);
            planted.push(Planted { lcp: l, a: ia, b: ib });
        }
    }
    while corpus.records.len() < spec.n {
        let len = rng.gen_range(spec.len_min..=spec.len_max);
        let codes = random(&mut rng, len);
        push(&mut corpus, &codes);
    }
    Ok(Synthetic {
        corpus,
        planted,
        sigma,
        base,
    })
}
