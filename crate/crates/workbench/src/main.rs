use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ziptrie::oracle::ancestor_audit;
use ziptrie::{ChunkPolicy, TextEncoding};
use ziptrie_workbench::corpus::{parse_encoding, Format};
use ziptrie_workbench::workload::{aggregate, write_csv, Structure, StructureKind};
use ziptrie_workbench::{ingest, synth, OpMix, StructureConfig, SynthSpec, WorkloadSpec};

#[derive(Parser)]
#[command(
    name = "ziptrie-bench",
    version,
    about = "Corpus tools and benchmarks for zip-tries and string B-trees"
)]
struct Cli {
    /// Default seed for synthesis, ranks and workloads.
    #[arg(long, global = true, env = "ZIPTRIE_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a corpus and print its summary statistics.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Generate a corpus with planted LCP lengths, one key per line.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        len_min: usize,
        #[arg(long, default_value_t = 32)]
        len_max: usize,
        /// Comma-separated LCP lengths to plant.
        #[arg(long, value_delimiter = ',')]
        buckets: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        #[arg(long, default_value = "dna", value_parser = parse_encoding)]
        alphabet: TextEncoding,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a workload and write one CSV row per operation.
    Run {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        structure: StructureArgs,
        #[arg(long, default_value_t = 10_000)]
        ops: usize,
        /// Operation proportions, e.g. `search=0.6,insert=0.2,delete=0.2`.
        #[arg(long, default_value = "search=1")]
        mix: String,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long)]
        csv_out: Option<PathBuf>,
        /// Compare every answer with the reference dictionary.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Build a structure over a corpus and verify its invariants.
    Audit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        structure: StructureArgs,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "lines")]
    format: Format,
    #[arg(long, default_value = "bytes", value_parser = parse_encoding)]
    alphabet: TextEncoding,
    #[arg(long, default_value_t = 64)]
    word_bits: u32,
}

#[derive(Args)]
struct StructureArgs {
    /// zt, mi-zt, zt-fixed, zt-adaptive or sbt.
    #[arg(long, default_value = "zt")]
    structure: String,
    /// Overrides the preset's metadata mode: exact or approx.
    #[arg(long)]
    mode: Option<String>,
    /// Overrides the preset's chunk policy: none, fixed or adaptive.
    #[arg(long)]
    policy: Option<ChunkPolicy>,
    /// Block capacity of the string B-tree.
    #[arg(long = "B", default_value_t = 16)]
    block: usize,
    #[arg(long)]
    fanout: Option<usize>,
    /// Codec and fixed-chunk budget.
    #[arg(long)]
    f: Option<usize>,
}

impl StructureArgs {
    fn config(&self, seed: u64) -> Result<StructureConfig> {
        let mut cfg = StructureConfig::preset(&self.structure)?;
        match self.mode.as_deref() {
            None => {}
            Some("exact") => cfg.exact = true,
            Some("approx") if cfg.kind == StructureKind::BTree => bail!("the string B-tree only stores exact LCPs"),
            Some("approx") => cfg.exact = false,
            Some(other) => bail!("unknown mode `{other}` (expected exact or approx)"),
        }
        if let Some(p) = self.policy {
            cfg.policy = p;
        }
        cfg.block = self.block;
        cfg.fanout = self.fanout;
        cfg.f = self.f;
        cfg.seed = seed;
        Ok(cfg)
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest { input, csv_out } => {
            let corpus = ingest(&input.input, input.format, input.alphabet, input.word_bits)
                .with_context(|| format!("reading {}", input.input.display()))?;
            let s = corpus.stats();
            let mut out = output(&csv_out)?;
            writeln!(out, "records,distinct,total_chars,median_len,median_max_lcp")?;
            writeln!(
                out,
                "{},{},{},{},{}",
                s.count, s.distinct, s.total_chars, s.median_len, s.median_max_lcp
            )?;
        }
        Command::Synth {
            n,
            len_min,
            len_max,
            buckets,
            pairs,
            alphabet,
            out,
        } => {
            let spec = SynthSpec {
                len_min,
                len_max,
                buckets,
                pairs_per_bucket: pairs,
                ..SynthSpec::new(n, alphabet, cli.seed)
            };
            let s = synth(&spec)?;
            let mut out = io::BufWriter::new(output(&out)?);
            for r in &s.corpus.records {
                out.write_all(&alphabet.decode(&r.key.unpack()))?;
                out.write_all(b"\n")?;
            }
            eprintln!("wrote {} keys, {} planted pairs", s.corpus.len(), s.planted.len());
        }
        Command::Run {
            input,
            structure,
            ops,
            mix,
            repetitions,
            csv_out,
            oracle_check,
        } => {
            let corpus = ingest(&input.input, input.format, input.alphabet, input.word_bits)?;
            let cfg = structure.config(cli.seed)?;
            let spec = WorkloadSpec {
                repetitions,
                oracle_check,
                ..WorkloadSpec::new(mix.parse::<OpMix>()?, ops, cli.seed)
            };
            let report = ziptrie_workbench::run(&corpus, &cfg, &spec)?;
            write_csv(&report.rows, io::BufWriter::new(output(&csv_out)?))?;
            for s in aggregate(&report.rows) {
                eprintln!(
                    "{} {} lcp<2^{}: {} ops, mean words {:.1}, comparisons {:.1}, io {:.1}",
                    s.structure, s.op, s.lcp_bucket, s.count, s.mean_words, s.mean_comparisons, s.mean_io_work
                );
            }
            if oracle_check {
                eprintln!("oracle divergences: {}", report.divergences);
                if report.divergences > 0 {
                    bail!(
                        "{} operations disagreed with the reference dictionary",
                        report.divergences
                    );
                }
            }
        }
        Command::Audit {
            input,
            structure,
            csv_out,
        } => {
            let corpus = ingest(&input.input, input.format, input.alphabet, input.word_bits)?;
            let cfg = structure.config(cli.seed)?;
            let mut out = output(&csv_out)?;
            match Structure::build(&cfg, &corpus.distinct_keys())? {
                Structure::Zip(t) => {
                    t.validate().map_err(anyhow::Error::msg)?;
                    let report = ancestor_audit(&t)?;
                    writeln!(out, "nodes,height,mean_depth,max_undershoot")?;
                    writeln!(
                        out,
                        "{},{},{:.4},{}",
                        report.nodes,
                        t.height(),
                        t.mean_depth(),
                        report.max_undershoot
                    )?;
                }
                Structure::BTree(t) => write!(out, "{}", t.stats().csv())?,
            }
        }
    }
    Ok(())
}
