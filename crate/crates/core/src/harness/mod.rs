//! Benchmark orchestration: config, per-cell execution and report output.

mod config;
mod methods;
mod report;
mod runner;

pub use config::{DatasetKind, DatasetSpec, RunConfig, DEFAULT_POLY_BUDGET, DEFAULT_SEEDS, EXTENDED_SEEDS};
pub use methods::{Encoder, MethodKind, MEDIAN_HEURISTIC_ROWS};
pub use report::{
    accuracy_summary, cells_table, cka_table, comparisons_table, emit_report, forest_table, read_report,
    render_markdown, to_json, Table,
};
pub use runner::{
    run_benchmark, time_encoding, CellResult, CellStatus, CkaRecord, ErrorRecord, Report, SeedValue, SplitRecord,
    CKA_REFERENCE, SCHEMA_VERSION,
};
