//! Benchmark harness for the `ziptrie` dictionaries: corpus ingestion,
//! synthetic corpora with planted LCPs, and per-operation CSV reports.

pub mod corpus;
pub mod synth;
pub mod workload;

pub use corpus::{ingest, ingest_reader, Corpus, CorpusStats, Format};
pub use synth::{synth, Planted, SynthSpec, Synthetic};
pub use workload::{run, run_queries, OpMix, Row, RunReport, StructureConfig, WorkloadSpec};
