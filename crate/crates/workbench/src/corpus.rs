//! Corpus ingestion (newline-delimited or FASTA) and summary statistics.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;
use ziptrie::packed_key::lcp_from;
use ziptrie::{Alphabet, CostLedger, PackedKey, TextEncoding};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Lines,
    Fasta,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lines" => Ok(Format::Lines),
            "fasta" => Ok(Format::Fasta),
            other => Err(format!("unknown format `{other}` (expected lines or fasta)")),
        }
    }
}

/// Parses `dna` or `bytes`.
pub fn parse_encoding(s: &str) -> Result<TextEncoding, String> {
    match s.to_ascii_lowercase().as_str() {
        "dna" => Ok(TextEncoding::Dna),
        "bytes" | "ascii" => Ok(TextEncoding::Bytes),
        other => Err(format!("unknown alphabet `{other}` (expected dna or bytes)")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub key: PackedKey,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<Record>,
    pub encoding: TextEncoding,
    pub alphabet: Alphabet,
}

/// Median length and median longest LCP with any other key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub count: usize,
    pub distinct: usize,
    pub total_chars: usize,
    pub median_len: f64,
    pub median_max_lcp: f64,
}

impl Corpus {
    pub fn new(encoding: TextEncoding, word_bits: u32) -> Self {
        Self {
            records: Vec::new(),
            encoding,
            alphabet: encoding.alphabet(word_bits),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &PackedKey> {
        self.records.iter().map(|r| &r.key)
    }

    /// Sorted distinct keys.
    pub fn distinct_keys(&self) -> Vec<PackedKey> {
        let mut keys: Vec<PackedKey> = self.keys().cloned().collect();
        keys.sort();
        keys.dedup();
        keys
    }

    fn push(&mut self, id: String, text: &[u8], line: usize, ids: &mut HashSet<String>) -> Result<(), IngestError> {
        let malformed = |message: String| IngestError::Malformed { line, message };
        if !ids.insert(id.clone()) {
            return Err(malformed(format!("duplicate record id `{id}`")));
        }
        let codes = self.encoding.encode(text).map_err(|e| malformed(e.to_string()))?;
        let key = PackedKey::pack(&codes, self.alphabet).map_err(|e| malformed(e.to_string()))?;
        self.records.push(Record { id, key });
        Ok(())
    }

    /// Longest LCP of each key with any other record, in record order.
    pub fn max_lcps(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.records.len()).collect();
        order.sort_by(|&a, &b| self.records[a].key.cmp(&self.records[b].key));
        let mut best = vec![0; self.records.len()];
        let mut ledger = CostLedger::default();
        for w in order.windows(2) {
            let l = lcp_from(&self.records[w[0]].key, &self.records[w[1]].key, 0, &mut ledger);
            best[w[0]] = best[w[0]].max(l);
            best[w[1]] = best[w[1]].max(l);
        }
        best
    }

    pub fn stats(&self) -> CorpusStats {
        let lens: Vec<usize> = self.keys().map(PackedKey::len).collect();
        CorpusStats {
            count: self.len(),
            distinct: self.distinct_keys().len(),
            total_chars: lens.iter().sum(),
            median_len: median(&lens),
            median_max_lcp: median(&self.max_lcps()),
        }
    }
}

/// Median, averaging the two middle values; 0 for an empty slice.
pub fn median(values: &[usize]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}

/// Reads one record per non-blank line (ids are line numbers), or FASTA
/// records (`>id` header, sequence lines concatenated).
pub fn ingest_reader<R: BufRead>(
    reader: R,
    format: Format,
    encoding: TextEncoding,
    word_bits: u32,
) -> Result<Corpus, IngestError> {
    let mut corpus = Corpus::new(encoding, word_bits);
    let mut ids = HashSet::new();
    // (id, header line, sequence)
    let mut open: Option<(String, usize, Vec<u8>)> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        match format {
            Format::Lines => {
                if !line.is_empty() {
                    corpus.push(line_no.to_string(), line.as_bytes(), line_no, &mut ids)?;
                }
            }
            Format::Fasta => {
                if let Some(header) = line.strip_prefix('>') {
                    if let Some((id, at, seq)) = open.take() {
                        corpus.push(id, &seq, at, &mut ids)?;
                    }
                    let id = header.split_whitespace().next().unwrap_or("");
                    if id.is_empty() {
                        return Err(IngestError::Malformed {
                            line: line_no,
                            message: "empty FASTA header".into(),
                        });
                    }
                    open = Some((id.to_string(), line_no, Vec::new()));
                } else if !line.trim().is_empty() {
                    let Some((_, _, seq)) = open.as_mut() else {
                        return Err(IngestError::Malformed {
                            line: line_no,
                            message: "sequence data before the first `>` header".into(),
                        });
                    };
                    seq.extend_from_slice(line.trim().as_bytes());
                }
            }
        }
    }
    if let Some((id, at, seq)) = open {
        corpus.push(id, &seq, at, &mut ids)?;
    }
    Ok(corpus)
}

pub fn ingest(path: &Path, format: Format, encoding: TextEncoding, word_bits: u32) -> Result<Corpus, IngestError> {
    ingest_reader(BufReader::new(File::open(path)?), format, encoding, word_bits)
}
