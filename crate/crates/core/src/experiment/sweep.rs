use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use super::spec::{Cell, SweepSpec};
use crate::config::{QueueDiscipline, SimConfig};
use crate::engine::run_with_sink;
use crate::error::{Error, Result};
use crate::metrics::{MetricsCollector, RunMetrics};

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
const PARTIAL_FILE: &str = "runs.partial.csv";

/// Network metrics a sweep aggregates across seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Risk,
    Aoi,
    TrackingError,
    Throughput,
    Delay,
    CollisionLoss,
    QueueDrops,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Risk,
        Metric::Aoi,
        Metric::TrackingError,
        Metric::Throughput,
        Metric::Delay,
        Metric::CollisionLoss,
        Metric::QueueDrops,
    ];

    /// Column of `runs.csv` holding the metric.
    pub fn column(self) -> &'static str {
        match self {
            Metric::Risk => "risk_proportion",
            Metric::Aoi => "system_aoi_s",
            Metric::TrackingError => "mean_tracking_error_m",
            Metric::Throughput => "throughput_pps",
            Metric::Delay => "mean_delay_s",
            Metric::CollisionLoss => "collision_losses",
            Metric::QueueDrops => "queue_drops",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Throughput)
    }

    pub fn value(self, m: &RunMetrics) -> Option<f64> {
        match self {
            Metric::Risk => m.risk_proportion,
            Metric::Aoi => m.system_aoi_s,
            Metric::TrackingError => m.mean_tracking_error_m,
            Metric::Throughput => Some(m.throughput_pps),
            Metric::Delay => m.mean_delay_s,
            Metric::CollisionLoss => Some(m.collision_losses as f64),
            Metric::QueueDrops => Some(m.queue_drops as f64),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "risk" => Metric::Risk,
            "aoi" => Metric::Aoi,
            "tracking" | "tracking_error" => Metric::TrackingError,
            "throughput" => Metric::Throughput,
            "delay" => Metric::Delay,
            "loss" | "collision_loss" => Metric::CollisionLoss,
            "queue_drops" => Metric::QueueDrops,
            other => return Err(Error::UnknownKey(other.to_string())),
        })
    }
}

/// One executed run of the grid. `metrics` is `None` when the run failed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub config_hash: String,
    pub cell: Cell,
    pub metrics: Option<RunMetrics>,
    pub error: Option<String>,
    /// Whether the run's beacon accounting balanced.
    pub counters_balance: bool,
}

impl RunRow {
    pub fn is_ok(&self) -> bool {
        self.metrics.is_some()
    }
}

/// Across-seed mean and sample standard deviation of one metric in one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    fn of(values: &[f64]) -> Option<Stat> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std, n })
    }
}

/// Seed-aggregated values of one (density, discipline, capacity, rate) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub density: f64,
    pub discipline: QueueDiscipline,
    pub capacity: usize,
    pub rate_hz: f64,
    /// Successful runs in the cell.
    pub n_seeds: usize,
    pub stats: HashMap<Metric, Stat>,
}

impl CellSummary {
    pub fn stat(&self, metric: Metric) -> Option<Stat> {
        self.stats.get(&metric).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<RunRow>,
    pub summary: Vec<CellSummary>,
    /// Runs simulated by this invocation, as opposed to reused from disk.
    pub executed: usize,
}

impl SweepResult {
    pub fn from_rows(rows: Vec<RunRow>) -> Self {
        let summary = summarize(&rows);
        SweepResult {
            rows,
            summary,
            executed: 0,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunRow> {
        self.rows.iter().filter(|r| !r.is_ok())
    }

    /// Reads `runs.csv` from a sweep directory and re-aggregates it.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(RUNS_FILE);
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let rows = read_rows(file, false)?;
        Ok(SweepResult::from_rows(rows))
    }
}

fn same_cell_key(a: &Cell, b: &Cell) -> bool {
    a.density == b.density
        && a.discipline == b.discipline
        && a.capacity == b.capacity
        && a.rate_hz == b.rate_hz
}

/// Groups rows by cell, keeping first-appearance order. Failed runs are
/// left out of the statistics.
pub fn summarize(rows: &[RunRow]) -> Vec<CellSummary> {
    let mut groups: Vec<(Cell, Vec<&RunMetrics>)> = Vec::new();
    for row in rows {
        let idx = match groups.iter().position(|(c, _)| same_cell_key(c, &row.cell)) {
            Some(i) => i,
            None => {
                groups.push((row.cell, Vec::new()));
                groups.len() - 1
            }
        };
        if let Some(m) = &row.metrics {
            groups[idx].1.push(m);
        }
    }
    groups
        .into_iter()
        .map(|(cell, runs)| {
            let stats = Metric::ALL
                .iter()
                .filter_map(|&metric| {
                    let values: Vec<f64> = runs.iter().filter_map(|m| metric.value(m)).collect();
                    Stat::of(&values).map(|s| (metric, s))
                })
                .collect();
            CellSummary {
                density: cell.density,
                discipline: cell.discipline,
                capacity: cell.capacity,
                rate_hz: cell.rate_hz,
                n_seeds: runs.len(),
                stats,
            }
        })
        .collect()
}

/// Runs one configuration with streaming metrics.
pub fn run_config(config: &SimConfig) -> Result<(RunMetrics, bool)> {
    let mut collector = MetricsCollector::new(config);
    let summary = run_with_sink(config, &mut collector)?;
    let (_, metrics) = collector.finish(&summary.counters, config);
    Ok((metrics, summary.counters.balances()))
}

fn execute(spec: &SweepSpec, cell: &Cell) -> RunRow {
    let config = spec.config_for(cell);
    let config_hash = config.config_hash();
    let outcome = catch_unwind(AssertUnwindSafe(|| run_config(&config)));
    let (metrics, error, counters_balance) = match outcome {
        Ok(Ok((m, balanced))) => (Some(m), None, balanced),
        Ok(Err(e)) => (None, Some(e.to_string()), false),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            (None, Some(format!("panicked: {msg}")), false)
        }
    };
    RunRow {
        config_hash,
        cell: *cell,
        metrics,
        error,
        counters_balance,
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses one per available core.
    pub workers: Option<usize>,
    /// Print a line per finished run on stderr.
    pub progress: bool,
}

/// Executes every run of `spec` not already present in `out_dir`, then
/// writes `runs.csv` and `summary.csv` in canonical order.
///
/// Finished runs are appended to a side file as they complete, so an
/// interrupted sweep picks up where it stopped. Failed runs are recorded and
/// retried on the next invocation; check [`SweepResult::failures`].
pub fn run_sweep(spec: &SweepSpec, out_dir: impl AsRef<Path>, options: &SweepOptions) -> Result<SweepResult> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut done: HashMap<String, RunRow> = HashMap::new();
    for (name, tolerant) in [(RUNS_FILE, false), (PARTIAL_FILE, true)] {
        let path = out_dir.join(name);
        if let Ok(file) = File::open(&path) {
            for row in read_rows(file, tolerant)? {
                if row.is_ok() {
                    done.insert(row.config_hash.clone(), row);
                }
            }
        }
    }

    let cells = spec.cells();
    let hashes: Vec<String> = cells.iter().map(|c| spec.config_for(c).config_hash()).collect();
    let todo: Vec<usize> = (0..cells.len()).filter(|&i| !done.contains_key(&hashes[i])).collect();

    let partial_path = out_dir.join(PARTIAL_FILE);
    let fresh: Vec<RunRow> = if todo.is_empty() {
        Vec::new()
    } else {
        let partial = PartialLog::open(&partial_path)?;
        let total = todo.len();
        let finished = Mutex::new(0usize);
        let work = || {
            todo.par_iter()
                .map(|&i| {
                    let row = execute(spec, &cells[i]);
                    partial.append(&row);
                    if options.progress {
                        let mut n = finished.lock().expect("progress lock");
                        *n += 1;
                        eprintln!(
                            "[{}/{}] density={} {} cap={} rate={} seed={} {}",
                            *n,
                            total,
                            row.cell.density,
                            row.cell.discipline,
                            row.cell.capacity,
                            row.cell.rate_hz,
                            row.cell.seed,
                            if row.is_ok() { "ok" } else { "FAILED" }
                        );
                    }
                    row
                })
                .collect()
        };
        match options.workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("thread pool")
                .install(work),
            None => work(),
        }
    };
    let executed = fresh.len();
    for row in fresh {
        done.insert(row.config_hash.clone(), row);
    }

    let rows: Vec<RunRow> = hashes
        .iter()
        .map(|h| done.remove(h).expect("every cell executed"))
        .collect();
    let result = SweepResult {
        executed,
        ..SweepResult::from_rows(rows)
    };
    write_atomically(&out_dir.join(RUNS_FILE), |w| write_rows(w, &result.rows))?;
    write_atomically(&out_dir.join(SUMMARY_FILE), |w| write_summary(w, &result.summary))?;
    if partial_path.exists() {
        std::fs::remove_file(&partial_path).map_err(|e| Error::io(&partial_path, e))?;
    }
    Ok(result)
}

struct PartialLog {
    writer: Mutex<csv::Writer<File>>,
}

impl PartialLog {
    fn open(path: &Path) -> Result<Self> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        if fresh {
            writer.write_record(RUN_COLUMNS)?;
            writer.flush().map_err(|e| Error::io(path, e))?;
        }
        Ok(PartialLog {
            writer: Mutex::new(writer),
        })
    }

    // best effort: losing a line only costs a rerun of that cell
    fn append(&self, row: &RunRow) {
        let mut w = self.writer.lock().expect("partial log lock");
        if w.write_record(row_record(row)).is_ok() {
            let _ = w.flush();
        }
    }
}

fn write_atomically(path: &Path, body: impl FnOnce(&mut csv::Writer<File>) -> Result<()>) -> Result<()> {
    let tmp: PathBuf = path.with_extension("csv.tmp");
    let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut w = csv::Writer::from_writer(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(&tmp, e))?;
    drop(w);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

const RUN_COLUMNS: [&str; 22] = [
    "config_hash",
    "density",
    "discipline",
    "capacity",
    "rate_hz",
    "seed",
    "status",
    "error",
    "vehicle_count",
    "risk_proportion",
    "system_aoi_s",
    "mean_tracking_error_m",
    "throughput_pps",
    "per_vehicle_throughput_pps",
    "mean_delay_s",
    "receptions",
    "queue_drops",
    "collision_losses",
    "communicating_pairs",
    "excluded_pairs",
    "risky_pairs",
    "counters_balance",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row_record(row: &RunRow) -> Vec<String> {
    let c = &row.cell;
    let mut rec = vec![
        row.config_hash.clone(),
        c.density.to_string(),
        c.discipline.to_string(),
        c.capacity.to_string(),
        c.rate_hz.to_string(),
        c.seed.to_string(),
        if row.is_ok() { "ok" } else { "failed" }.to_string(),
        row.error.clone().unwrap_or_default(),
    ];
    match &row.metrics {
        Some(m) => rec.extend([
            m.vehicle_count.to_string(),
            opt(m.risk_proportion),
            opt(m.system_aoi_s),
            opt(m.mean_tracking_error_m),
            m.throughput_pps.to_string(),
            m.per_vehicle_throughput_pps.to_string(),
            opt(m.mean_delay_s),
            m.receptions.to_string(),
            m.queue_drops.to_string(),
            m.collision_losses.to_string(),
            m.communicating_pair_count.to_string(),
            m.excluded_pair_count.to_string(),
            m.risky_pair_count.to_string(),
        ]),
        None => rec.extend(std::iter::repeat_n(String::new(), 13)),
    }
    rec.push(row.counters_balance.to_string());
    rec
}

fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, rows: &[RunRow]) -> Result<()> {
    w.write_record(RUN_COLUMNS)?;
    for row in rows {
        w.write_record(row_record(row))?;
    }
    Ok(())
}

fn write_summary<W: std::io::Write>(w: &mut csv::Writer<W>, summary: &[CellSummary]) -> Result<()> {
    let mut header = vec![
        "density".to_string(),
        "discipline".to_string(),
        "capacity".to_string(),
        "rate_hz".to_string(),
        "n_seeds".to_string(),
    ];
    for m in Metric::ALL {
        header.push(format!("{}_mean", m.column()));
        header.push(format!("{}_std", m.column()));
    }
    w.write_record(&header)?;
    for s in summary {
        let mut rec = vec![
            s.density.to_string(),
            s.discipline.to_string(),
            s.capacity.to_string(),
            s.rate_hz.to_string(),
            s.n_seeds.to_string(),
        ];
        for m in Metric::ALL {
            let st = s.stat(m);
            rec.push(opt(st.map(|x| x.mean)));
            rec.push(opt(st.map(|x| x.std)));
        }
        w.write_record(&rec)?;
    }
    Ok(())
}

fn bad(reason: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        reason: reason.into(),
    }
}

struct Fields<'a> {
    index: &'a HashMap<String, usize>,
    rec: &'a csv::StringRecord,
}

impl Fields<'_> {
    fn raw(&self, col: &str) -> Result<&str> {
        let i = *self
            .index
            .get(col)
            .ok_or_else(|| bad(format!("missing column `{col}`")))?;
        Ok(self.rec.get(i).unwrap_or(""))
    }

    fn num<T: std::str::FromStr>(&self, col: &str) -> Result<T> {
        let s = self.raw(col)?;
        s.parse()
            .map_err(|_| bad(format!("column `{col}`: cannot parse `{s}`")))
    }

    fn opt_f64(&self, col: &str) -> Result<Option<f64>> {
        match self.raw(col)? {
            "" => Ok(None),
            _ => self.num(col).map(Some),
        }
    }
}

fn parse_row(f: &Fields<'_>) -> Result<RunRow> {
    let cell = Cell {
        density: f.num("density")?,
        discipline: f.raw("discipline")?.parse()?,
        capacity: f.num("capacity")?,
        rate_hz: f.num("rate_hz")?,
        seed: f.num("seed")?,
    };
    let ok = f.raw("status")? == "ok";
    let metrics = if ok {
        Some(RunMetrics {
            vehicle_count: f.num("vehicle_count")?,
            risk_proportion: f.opt_f64("risk_proportion")?,
            system_aoi_s: f.opt_f64("system_aoi_s")?,
            mean_tracking_error_m: f.opt_f64("mean_tracking_error_m")?,
            throughput_pps: f.num("throughput_pps")?,
            per_vehicle_throughput_pps: f.num("per_vehicle_throughput_pps")?,
            mean_delay_s: f.opt_f64("mean_delay_s")?,
            receptions: f.num("receptions")?,
            queue_drops: f.num("queue_drops")?,
            collision_losses: f.num("collision_losses")?,
            communicating_pair_count: f.num("communicating_pairs")?,
            excluded_pair_count: f.num("excluded_pairs")?,
            risky_pair_count: f.num("risky_pairs")?,
        })
    } else {
        None
    };
    let error = match f.raw("error")? {
        "" => None,
        e => Some(e.to_string()),
    };
    Ok(RunRow {
        config_hash: f.raw("config_hash")?.to_string(),
        cell,
        metrics,
        error,
        counters_balance: f.raw("counters_balance")? == "true",
    })
}

/// Parses run rows. `tolerant` skips malformed records, as left behind by
/// an interrupted write.
fn read_rows<R: std::io::Read>(reader: R, tolerant: bool) -> Result<Vec<RunRow>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(tolerant).from_reader(reader);
    let index: HashMap<String, usize> = rdr
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let parsed = rec.map_err(Error::from).and_then(|rec| {
            parse_row(&Fields {
                index: &index,
                rec: &rec,
            })
        });
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if tolerant => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}
