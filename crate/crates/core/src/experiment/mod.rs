//! Parameter sweeps over beacon rate, density and queue configuration, with
//! seed aggregation, grid optimum search and figure-ready CSV output.
//!
//! A sweep directory holds `runs.csv` (one row per run, canonical order)
//! and `summary.csv` (across-seed mean and sample standard deviation per
//! cell). Both are byte-identical for a given spec whatever the worker
//! count or execution order.

mod analysis;
mod spec;
mod sweep;

pub use analysis::{emit_figure_data, optimal_rate, write_figure_csv, OptimalRate, FIGURE_COLUMNS};
pub use spec::{Cell, SweepSpec};
pub use sweep::{
    run_config, run_sweep, summarize, CellSummary, Metric, RunRow, Stat, SweepOptions, SweepResult,
    RUNS_FILE, SUMMARY_FILE,
};
