//! Problem documents, reports and their renderings.

mod document;
mod report;

pub use document::{
    bundled, parse_problem, AlternativeDoc, CriterionDoc, Direction, DomainDoc, Exact, PreferencesDoc,
    ProblemDocument, BUNDLED,
};
pub use report::{
    export_hasse, render_report, resolve_alternative, run_analysis, AnalysisRequest, CheckedSubset, ContradictionRow,
    InequalityRow, PairReport, RangeRow, ReportDocument, ReportFormat, TermDoc, TraceDoc,
};
