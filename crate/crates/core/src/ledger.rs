//! Work/span/I-O counters shared by every instrumented operation.

use std::ops::AddAssign;

/// Counters for one operation (or an accumulation of several).
///
/// `words_examined` counts machine words compared by LCP scans. `work_units`
/// and `span_units` follow the PRAM cost model: a sequential scan charges one
/// unit of each per word, a parallel oracle round charges its words as work
/// and a single unit of span. `io_work`/`io_span` count block transfers in the
/// PEM model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostLedger {
    pub words_examined: u64,
    pub comparisons: u64,
    pub work_units: u64,
    pub span_units: u64,
    pub oracle_invocations: u64,
    pub io_work: u64,
    pub io_span: u64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn charge_sequential_words(&mut self, words: u64) {
        self.words_examined += words;
        self.work_units += words;
        self.span_units += words;
    }

    /// One parallel oracle round touching `words` words.
    #[inline]
    pub(crate) fn charge_oracle_round(&mut self, words: u64) {
        self.words_examined += words;
        self.work_units += words;
        self.span_units += 1;
        self.oracle_invocations += 1;
    }

    pub const CSV_HEADER: [&'static str; 5] = ["work", "span", "invocations", "io_work", "io_span"];

    /// Values in [`CostLedger::CSV_HEADER`] order.
    pub fn csv_row(&self) -> [u64; 5] {
        [
            self.work_units,
            self.span_units,
            self.oracle_invocations,
            self.io_work,
            self.io_span,
        ]
    }

    /// Difference `self - before`, for measuring one operation on a shared ledger.
    pub fn since(&self, before: &CostLedger) -> CostLedger {
        CostLedger {
            words_examined: self.words_examined - before.words_examined,
            comparisons: self.comparisons - before.comparisons,
            work_units: self.work_units - before.work_units,
            span_units: self.span_units - before.span_units,
            oracle_invocations: self.oracle_invocations - before.oracle_invocations,
            io_work: self.io_work - before.io_work,
            io_span: self.io_span - before.io_span,
        }
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, rhs: Self) {
        self.words_examined += rhs.words_examined;
        self.comparisons += rhs.comparisons;
        self.work_units += rhs.work_units;
        self.span_units += rhs.span_units;
        self.oracle_invocations += rhs.oracle_invocations;
        self.io_work += rhs.io_work;
        self.io_span += rhs.io_span;
    }
}
