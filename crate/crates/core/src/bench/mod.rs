//! Method-by-problem benchmark runs, summary tables and voltage overlays.

mod emit;
mod manifest;
mod reference;
mod suite;

pub use emit::{
    emit_overlay, emit_report, overlay_file_name, read_summary_json, ReportFormat, SummaryDocument,
};
pub use manifest::{load_problems, LoadOptions, Manifest, ManifestEntry, DEFAULT_JOINT_DEGREE};
pub use reference::{reference_lookup, reference_table, ReferenceEntry};
pub use suite::{
    aggregate, median, run_suite, run_suite_detailed, BenchProblem, BenchRow, BenchmarkReport,
    BenchmarkSuite, MethodAggregate, Provenance,
};
