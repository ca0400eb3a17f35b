use std::io::Write;
use std::path::Path;

use super::sweep::{CellSummary, Metric, Stat, SweepResult};
use crate::config::QueueDiscipline;
use crate::error::{Error, Result};

/// Best grid rate for a metric in one slice, with the curve it was read from.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalRate {
    pub rate_hz: f64,
    pub value: f64,
    /// `(rate_hz, stat)` in ascending rate order; rates where the metric is
    /// undefined for every seed are omitted.
    pub curve: Vec<(f64, Stat)>,
}

fn slice<'a>(
    result: &'a SweepResult,
    density: f64,
    capacity: usize,
    discipline: QueueDiscipline,
) -> Vec<&'a CellSummary> {
    result
        .summary
        .iter()
        .filter(|s| s.density == density && s.capacity == capacity && s.discipline == discipline)
        .collect()
}

fn available(result: &SweepResult) -> String {
    let mut seen: Vec<String> = Vec::new();
    for s in &result.summary {
        let tag = format!("density={} capacity={} discipline={}", s.density, s.capacity, s.discipline);
        if !seen.contains(&tag) {
            seen.push(tag);
        }
    }
    if seen.is_empty() {
        "none".to_string()
    } else {
        seen.join("; ")
    }
}

/// Grid argmin of the across-seed mean (argmax for throughput). Ties go to
/// the lowest rate.
pub fn optimal_rate(
    result: &SweepResult,
    metric: Metric,
    density: f64,
    capacity: usize,
    discipline: QueueDiscipline,
) -> Result<OptimalRate> {
    let cells = slice(result, density, capacity, discipline);
    let missing = || Error::MissingSlice {
        requested: format!("density={density} capacity={capacity} discipline={discipline} metric={}", metric.column()),
        available: available(result),
    };
    let mut curve: Vec<(f64, Stat)> = cells
        .iter()
        .filter_map(|c| c.stat(metric).map(|s| (c.rate_hz, s)))
        .collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, f64)> = None;
    for &(rate, stat) in &curve {
        let better = match best {
            None => true,
            Some((_, v)) if metric.higher_is_better() => stat.mean > v,
            Some((_, v)) => stat.mean < v,
        };
        if better {
            best = Some((rate, stat.mean));
        }
    }
    let (rate_hz, value) = best.ok_or_else(missing)?;
    Ok(OptimalRate { rate_hz, value, curve })
}

pub const FIGURE_COLUMNS: [&str; 7] = [
    "density",
    "capacity",
    "discipline",
    "rate_hz",
    "metric_mean",
    "metric_std",
    "n_seeds",
];

/// Long-format figure data: one row per (density, capacity, discipline,
/// rate) cell where the metric is defined, in sweep order. `n_seeds` counts
/// the runs that contributed a value.
pub fn emit_figure_data<W: Write>(result: &SweepResult, metric: Metric, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIGURE_COLUMNS)?;
    for s in &result.summary {
        if let Some(st) = s.stat(metric) {
            w.write_record([
                s.density.to_string(),
                s.capacity.to_string(),
                s.discipline.to_string(),
                s.rate_hz.to_string(),
                st.mean.to_string(),
                st.std.to_string(),
                st.n.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<figure output>", e))
}

pub fn write_figure_csv(result: &SweepResult, metric: Metric, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    emit_figure_data(result, metric, std::io::BufWriter::new(file))
}
