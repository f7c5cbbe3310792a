//! Words examined per search against the LCP length and the key count, on
//! synthetic corpora with planted LCPs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ziptrie::{PackedKey, TextEncoding};
use ziptrie_workbench::{run_queries, synth, StructureConfig, SynthSpec};

use crate::Outcome;

/// Least-squares line through `(x, y)`; returns `(slope, intercept, r2)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

fn queries(spec: &SynthSpec, per_pair: usize) -> (ziptrie_workbench::Corpus, Vec<PackedKey>) {
    let s = synth(spec).expect("feasible synthetic spec");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    let qs = s
        .planted
        .iter()
        .flat_map(|p| (0..per_pair).map(|_| s.query(p, &mut rng)).collect::<Vec<_>>())
        .collect();
    (s.corpus, qs)
}

pub fn trend() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["zt", "mi-zt"] {
        let cfg = StructureConfig::preset(name).unwrap();
        let spec = SynthSpec::new(1 << 14, TextEncoding::Dna, 10).with_pow2_buckets(6, 16, 4);
        let (corpus, qs) = queries(&spec, 4);
        let alpha = corpus.alphabet.alpha() as f64;
        let report = run_queries(&corpus, &cfg, &qs).unwrap();
        let points: Vec<(f64, f64)> = report
            .rows
            .iter()
            .map(|r| (r.lcp as f64 / alpha, r.ledger.words_examined as f64))
            .collect();
        let (slope, intercept, r2) = linear_fit(&points);
        pass &= r2 >= 0.95 && report.divergences == 0;
        details.push(format!(
            "{name}: {} searches, words ~ {slope:.3} * l/alpha + {intercept:.1}, R^2 = {r2:.4}",
            points.len()
        ));

        // fixed LCP bucket, growing key count
        let l = 1 << 10;
        let mut means = Vec::new();
        for e in 8..=14u32 {
            let spec = SynthSpec {
                buckets: vec![l],
                pairs_per_bucket: 8,
                ..SynthSpec::new(1 << e, TextEncoding::Dna, 20 + e as u64)
            };
            let (corpus, qs) = queries(&spec, 4);
            let report = run_queries(&corpus, &cfg, &qs).unwrap();
            pass &= report.divergences == 0;
            let mean =
                report.rows.iter().map(|r| r.ledger.words_examined as f64).sum::<f64>() / report.rows.len() as f64;
            means.push(mean);
        }
        let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
        let tol = 4.0 * 14.0;
        pass &= spread <= tol;
        let shown: Vec<String> = means.iter().map(|m| format!("{m:.1}")).collect();
        details.push(format!(
            "{name}: l = {l}, mean words for n = 2^8..2^14: [{}], spread {spread:.1} (limit {tol})",
            shown.join(", ")
        ));
    }
    Outcome::new(pass, details.join("; "))
}
