//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. `ACCEPTANCE_ONLY=1,4` runs a subset and
//! `ACCEPTANCE_FUZZ_SCALE=0.1` shrinks the fuzz run.

mod primitives;
mod trend;
mod trie_props;

use std::time::Instant;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

const FUZZ_ZIP_OPS: usize = 900_000;
const FUZZ_SBT_SEARCHES: usize = 120_000;

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().is_none_or(|o| o.contains(&n));

    let mut fuzz_report: Option<(fuzz::FuzzReport, f64)> = None;
    let mut fuzz = || {
        fuzz_report
            .get_or_insert_with(|| {
                let t = Instant::now();
                let scale: f64 = std::env::var("ACCEPTANCE_FUZZ_SCALE")
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .unwrap_or(1.0);
                let r = fuzz::run(
                    (FUZZ_ZIP_OPS as f64 * scale) as usize,
                    (FUZZ_SBT_SEARCHES as f64 * scale) as usize,
                );
                (r, t.elapsed().as_secs_f64())
            })
            .clone()
    };

    let mut failed = 0;
    let mut report = |n: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        if !wanted(n) {
            return;
        }
        let t = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} [{name}] {verdict} ({:.1}s): {}",
            t.elapsed().as_secs_f64(),
            o.detail
        );
    };

    report(1, "differential fuzz", &mut || {
        let (r, secs) = fuzz();
        let pass = r.divergences == 0 && r.audit_failures == 0;
        let mut detail = format!(
            "{} ops over {} configurations ({} trie ops, {} B-tree searches) in {secs:.1}s, {} divergences, {} audits, {} audit failures",
            r.zip_ops + r.sbt_ops,
            r.configs,
            r.zip_ops,
            r.sbt_ops,
            r.divergences,
            r.audits,
            r.audit_failures
        );
        if let Some(d) = &r.first_divergence {
            detail.push_str(&format!(", first: {d}"));
        }
        Outcome::new(pass, detail)
    });
    report(2, "comparison bound", &mut || {
        let (r, _) = fuzz();
        let pass = r.telescoping_exact.violations == 0 && r.telescoping_approx.violations == 0;
        Outcome::new(
            pass,
            format!(
                "exact: {}; approx: {}",
                r.telescoping_exact.summary(),
                r.telescoping_approx.summary()
            ),
        )
    });
    report(3, "LCP codec bounds", &mut primitives::codec_sweep);
    report(4, "depth", &mut trie_props::depth);
    report(5, "history independence", &mut trie_props::history_independence);
    report(6, "off-path stability", &mut trie_props::off_path_stability);
    report(7, "chunked schedule bounds", &mut || {
        let (r, _) = fuzz();
        let bounds = [
            &r.fixed_invocations,
            &r.fixed_work,
            &r.adaptive_invocations,
            &r.adaptive_work,
        ];
        Outcome::new(
            bounds.iter().all(|b| b.violations == 0 && b.checked > 0),
            format!(
                "fixed invocations: {}; fixed work: {}; adaptive invocations: {}; adaptive work: {}",
                r.fixed_invocations.summary(),
                r.fixed_work.summary(),
                r.adaptive_invocations.summary(),
                r.adaptive_work.summary()
            ),
        )
    });
    report(8, "word and block primitives", &mut primitives::word_primitives);
    report(9, "string B-tree", &mut || {
        let b = primitives::branching();
        let (r, _) = fuzz();
        let pass = b.mismatches == 0
            && b.work_violations == 0
            && b.union_mismatches == 0
            && r.sbt_io_lcp.violations == 0
            && r.sbt_io_len.violations == 0;
        Outcome::new(
            pass,
            format!(
                "{} branch pairs, {} mismatches, worst work / (4 B log2 B) {:.3}; {} range families, {} union mismatches; \
                 search io vs lcp: {}; search io vs length (fixed chunks): {}; \
                 fixed chunks against the lcp form (not gated): {} checked, {} over, worst {:.3}",
                b.pairs,
                b.mismatches,
                b.worst_work_ratio,
                b.families,
                b.union_mismatches,
                r.sbt_io_lcp.summary(),
                r.sbt_io_len.summary(),
                r.sbt_io_lcp_fixed.checked,
                r.sbt_io_lcp_fixed.violations,
                r.sbt_io_lcp_fixed.worst
            ),
        )
    });
    report(10, "LCP trend", &mut trend::trend);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all selected criteria passed");
}
